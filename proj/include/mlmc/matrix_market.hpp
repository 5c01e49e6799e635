#pragma once

#include "mlmc/sparse_matrix.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace mlmc {

/// Reads a Matrix Market `coordinate real|integer general|symmetric` file.
///
/// Symmetric files are expanded to full storage. Duplicate coordinates are
/// rejected (including a symmetric file listing both (i,j) and (j,i)), as are
/// out-of-range indices and malformed lines; every ParseError names the line.
/// Explicit zeros in the file are dropped.
SparseMatrix read_matrix_market(const std::filesystem::path& path);
SparseMatrix read_matrix_market(std::istream& in);

/// Writes `coordinate real general` with one-based indices and shortest
/// round-trip decimal values.
void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path);
void write_matrix_market(const SparseMatrix& a, std::ostream& out);

/// Dense vector: either a Matrix Market `array real general` file with one
/// column, or plain text with one value per line (blank lines and `%`/`#`
/// comment lines ignored).
std::vector<double> read_vector(const std::filesystem::path& path);
std::vector<double> read_vector(std::istream& in);

/// Plain text, one shortest round-trip value per line.
void write_vector(std::span<const double> v, const std::filesystem::path& path);
void write_vector(std::span<const double> v, std::ostream& out);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

} // namespace mlmc
