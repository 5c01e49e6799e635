#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mlmc {

using index_t = std::uint32_t;

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Compressed row storage for a real matrix.
///
/// Column indices are strictly increasing inside every row and no explicit
/// zeros are stored. Instances are immutable once built, so they can be shared
/// freely between worker threads.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Takes ownership of CSR arrays after checking every structural invariant.
    /// Throws ValidationError on a malformed layout.
    SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                 std::vector<index_t> col_indices, std::vector<double> values);

    /// Builds from unordered coordinates. Zero values are dropped; a repeated
    /// (row, col) pair is rejected.
    static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> entries);

    /// Row-major dense input, zeros skipped.
    static SparseMatrix from_dense(std::size_t n_rows, std::size_t n_cols, std::span<const double> dense);

    std::size_t n_rows() const noexcept { return n_rows_; }
    std::size_t n_cols() const noexcept { return n_cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }
    bool is_square() const noexcept { return n_rows_ == n_cols_; }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const index_t> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const index_t> row_cols(std::size_t i) const noexcept {
        return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }
    std::span<const double> row_values(std::size_t i) const noexcept {
        return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }

    /// Stored value at (i, j), or 0.
    double at(std::size_t i, std::size_t j) const noexcept;

    /// Diagonal entries (0 where not stored). Requires a square matrix.
    std::vector<double> diagonal() const;

    /// y = A x
    std::vector<double> multiply(std::span<const double> x) const;

    /// Row-major dense copy.
    std::vector<double> to_dense() const;

    /// Returns a copy with every row i multiplied by factors[i].
    SparseMatrix scale_rows(std::span<const double> factors) const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<index_t> col_indices_;
    std::vector<double> values_;
};

/// Exact structural transpose.
SparseMatrix transpose(const SparseMatrix& a);

} // namespace mlmc
