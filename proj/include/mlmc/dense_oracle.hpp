#pragma once

#include "mlmc/sparse_matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mlmc {

/// Small row-major square matrix used by the reference computations.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> values;

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t size) : n(size), values(size * size, 0.0) {}
    DenseMatrix(std::size_t size, std::vector<double> row_major);

    static DenseMatrix from_sparse(const SparseMatrix& a);

    double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }

    std::vector<double> apply(std::span<const double> x) const;
};

enum class OracleRoute {
    automatic, ///< eigen route when the spectrum is real and the basis well conditioned, else series
    eigen,     ///< V E_alpha(Lambda t^alpha) V^-1
    series,    ///< truncated Taylor series in extended precision
};

/// Reference value of E_alpha(A t^alpha) for n <= 64, 0 < alpha <= 1.
///
/// The eigen route needs a diagonalizable A with real spectrum; the series
/// route needs ||A||_inf t^alpha <= 5. Throws OracleUnavailable when the
/// requested (or every) route does not apply.
DenseMatrix dense_ml_oracle(const DenseMatrix& a, double alpha, double t,
                            OracleRoute route = OracleRoute::automatic);

} // namespace mlmc
