#include "mlmc/dense_oracle.hpp"

#include "mlmc/errors.hpp"
#include "mlmc/special.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace mlmc {

namespace {

constexpr std::size_t kMaxOracleSize = 64;
constexpr double kSeriesNormBound = 5.0;

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
    Eigen::MatrixXd m(a.n, a.n);
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t j = 0; j < a.n; ++j) m(i, j) = a(i, j);
    return m;
}

DenseMatrix from_eigen(const Eigen::MatrixXd& m) {
    DenseMatrix out(static_cast<std::size_t>(m.rows()));
    for (std::size_t i = 0; i < out.n; ++i)
        for (std::size_t j = 0; j < out.n; ++j) out(i, j) = m(i, j);
    return out;
}

bool is_symmetric(const Eigen::MatrixXd& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() == 0.0;
}

double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

// Returns false when the eigen route does not apply.
bool eigen_route(const Eigen::MatrixXd& a, double alpha, double t, Eigen::MatrixXd& out) {
    const double scale = std::pow(t, alpha);
    if (is_symmetric(a)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        if (es.info() != Eigen::Success) return false;
        Eigen::VectorXd f(a.rows());
        for (Eigen::Index i = 0; i < a.rows(); ++i) f(i) = ml_scalar({alpha, 1.0}, es.eigenvalues()(i) * scale);
        out = es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose();
        return true;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) return false;
    const Eigen::VectorXcd lambda = es.eigenvalues();
    const double spread = 1.0 + lambda.cwiseAbs().maxCoeff();
    if (lambda.imag().cwiseAbs().maxCoeff() > 1e-10 * spread) return false;
    const Eigen::MatrixXd v = es.eigenvectors().real();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(v);
    const auto sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e6) return false;
    Eigen::VectorXd f(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) f(i) = ml_scalar({alpha, 1.0}, lambda(i).real() * scale);
    out = v * f.asDiagonal() * v.inverse();
    return true;
}

bool series_route(const Eigen::MatrixXd& a, double alpha, double t, Eigen::MatrixXd& out) {
    const double scale = std::pow(t, alpha);
    if (inf_norm(a) * scale > kSeriesNormBound) return false;
    const auto n = a.rows();
    const MatrixXld x = (a * scale).cast<long double>();
    MatrixXld power = MatrixXld::Identity(n, n);
    MatrixXld sum = MatrixXld::Zero(n, n);
    long double prev = INFINITY;
    for (int k = 0; k < 2000; ++k) {
        const long double coef = std::exp(-std::lgamma(static_cast<long double>(alpha) * k + 1.0L));
        const MatrixXld term = power * coef;
        sum += term;
        const long double mag = term.cwiseAbs().maxCoeff();
        if (mag < prev && mag <= 1e-22L * sum.cwiseAbs().maxCoeff()) {
            out = sum.cast<double>();
            return true;
        }
        prev = mag;
        power = power * x;
    }
    return false;
}

} // namespace

DenseMatrix::DenseMatrix(std::size_t size, std::vector<double> row_major) : n(size), values(std::move(row_major)) {
    if (values.size() != n * n) throw DimensionError("dense matrix needs n*n values");
}

DenseMatrix DenseMatrix::from_sparse(const SparseMatrix& a) {
    if (!a.is_square()) throw DimensionError("dense oracle expects a square matrix");
    return DenseMatrix(a.n_rows(), a.to_dense());
}

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
    if (x.size() != n) throw DimensionError("dense apply: vector length mismatch");
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += values[i * n + j] * x[j];
        y[i] = acc;
    }
    return y;
}

DenseMatrix dense_ml_oracle(const DenseMatrix& a, double alpha, double t, OracleRoute route) {
    if (a.n == 0 || a.n > kMaxOracleSize) {
        throw OracleUnavailable("dense oracle supports 1 <= n <= 64, got n=" + std::to_string(a.n));
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("dense oracle: alpha must lie in (0, 1]");
    if (!(t >= 0.0)) throw DomainError("dense oracle: t must be >= 0");
    if (t == 0.0) {
        DenseMatrix id(a.n);
        for (std::size_t i = 0; i < a.n; ++i) id(i, i) = 1.0;
        return id;
    }
    const Eigen::MatrixXd m = to_eigen(a);
    Eigen::MatrixXd out;
    switch (route) {
    case OracleRoute::eigen:
        if (eigen_route(m, alpha, t, out)) return from_eigen(out);
        throw OracleUnavailable("eigen route needs a diagonalizable matrix with real spectrum");
    case OracleRoute::series:
        if (series_route(m, alpha, t, out)) return from_eigen(out);
        throw OracleUnavailable("series route needs ||A||_inf * t^alpha <= 5");
    case OracleRoute::automatic:
        if (eigen_route(m, alpha, t, out) || series_route(m, alpha, t, out)) return from_eigen(out);
        break;
    }
    throw OracleUnavailable("no dense oracle route applies (complex or defective spectrum and large norm)");
}

} // namespace mlmc
