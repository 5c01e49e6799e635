#include "mlmc/problems.hpp"

#include "mlmc/chain_kernel.hpp"
#include "mlmc/errors.hpp"
#include "mlmc/matrix_market.hpp"
#include "mlmc/special.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

namespace mlmc {

namespace {

constexpr std::size_t kMaxAnalyticM = 256;

double grid_scale(const DiffusionSpec& spec) {
    const double m = static_cast<double>(spec.m);
    return m * m / (4.0 * spec.mu * spec.mu);
}

// c_p = 2 cos(p pi / (m+1)) - 2 for p = 1..m
std::vector<double> one_dim_eigenvalues(std::size_t m) {
    std::vector<double> c(m);
    for (std::size_t p = 0; p < m; ++p) {
        c[p] = 2.0 * std::cos(static_cast<double>(p + 1) * std::numbers::pi / static_cast<double>(m + 1)) - 2.0;
    }
    return c;
}

} // namespace

void validate(const DiffusionSpec& spec) {
    if (spec.m < 2) throw ValidationError("diffusion grid needs m >= 2");
    if (!(spec.mu > 0.0) || !std::isfinite(spec.mu)) throw ValidationError("mu must be finite and > 0");
    if (!std::isfinite(spec.c_strength)) throw ValidationError("impulse strength must be finite");
    if (!std::isfinite(spec.t) || !std::isfinite(spec.alpha)) throw ValidationError("t and alpha must be finite");
}

ProblemBundle build_diffusion_2d(const DiffusionSpec& spec) {
    validate(spec);
    const std::size_t m = spec.m;
    const std::size_t n = m * m;
    const double s = grid_scale(spec);
    std::vector<std::size_t> offsets{0};
    std::vector<index_t> cols;
    std::vector<double> vals;
    offsets.reserve(n + 1);
    cols.reserve(5 * n);
    vals.reserve(5 * n);
    auto add = [&](std::size_t col, double v) {
        cols.push_back(static_cast<index_t>(col));
        vals.push_back(v);
    };
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t row = i * m + j;
            // Ascending column order: up, left, self, right, down.
            if (i > 0) add(row - m, s);
            if (j > 0) add(row - 1, s);
            add(row, -4.0 * s);
            if (j + 1 < m) add(row + 1, s);
            if (i + 1 < m) add(row + m, s);
            offsets.push_back(cols.size());
        }
    }
    ProblemBundle b;
    b.a = SparseMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
    b.u0 = impulse_vector(spec);
    b.diffusion = spec;
    b.metadata = {
        {"kind", "diffusion_2d"},
        {"m", m},
        {"mu", spec.mu},
        {"c", spec.c_strength},
        {"dimension", n},
        {"nnz", b.a.nnz()},
        {"offdiagonal_nnz", b.a.nnz() - n},
        {"ordering", "row-major, node (i,j) -> (i-1)*m + (j-1)"},
        {"impulse_node", {m / 2, m / 2}},
    };
    return b;
}

std::vector<double> impulse_vector(const DiffusionSpec& spec) {
    validate(spec);
    const std::size_t m = spec.m;
    std::vector<double> u(m * m, 0.0);
    const std::size_t c = m / 2 - 1; // 0-based coordinate of node m/2
    u[c * m + c] = spec.c_strength * static_cast<double>(m * m);
    return u;
}

std::vector<double> diffusion_eigenvalues(const DiffusionSpec& spec) {
    validate(spec);
    const std::size_t m = spec.m;
    const double s = grid_scale(spec);
    const auto c = one_dim_eigenvalues(m);
    std::vector<double> lambda(m * m);
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q) lambda[p * m + q] = s * (c[p] + c[q]);
    return lambda;
}

std::vector<double> diffusion_analytic_solution(const DiffusionSpec& spec) {
    return diffusion_analytic_solution(spec, impulse_vector(spec));
}

std::vector<double> diffusion_analytic_solution(const DiffusionSpec& spec, const std::vector<double>& u0) {
    validate(spec);
    const std::size_t m = spec.m;
    if (m > kMaxAnalyticM) throw OracleUnavailable("analytic diffusion solution supports m <= 256");
    if (u0.size() != m * m) throw DimensionError("initial vector must have m^2 entries");
    if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
    if (!(spec.t >= 0.0)) throw DomainError("t must be >= 0");
    if (spec.t == 0.0) return u0;

    const auto mi = static_cast<Eigen::Index>(m);
    const double norm = std::sqrt(2.0 / static_cast<double>(m + 1));
    Eigen::MatrixXd sines(mi, mi);
    for (Eigen::Index i = 0; i < mi; ++i)
        for (Eigen::Index j = 0; j < mi; ++j)
            sines(i, j) = norm * std::sin(static_cast<double>((i + 1) * (j + 1)) * std::numbers::pi /
                                          static_cast<double>(m + 1));

    Eigen::MatrixXd grid(mi, mi);
    for (Eigen::Index i = 0; i < mi; ++i)
        for (Eigen::Index j = 0; j < mi; ++j) grid(i, j) = u0[static_cast<std::size_t>(i * mi + j)];

    const double s = grid_scale(spec);
    const double scale = std::pow(spec.t, spec.alpha);
    const auto c = one_dim_eigenvalues(m);
    Eigen::MatrixXd coeff = sines * grid * sines;
    for (Eigen::Index p = 0; p < mi; ++p) {
        for (Eigen::Index q = p; q < mi; ++q) {
            const double lambda = s * (c[static_cast<std::size_t>(p)] + c[static_cast<std::size_t>(q)]);
            const double e = spec.t == 0.0 ? 1.0 : ml_scalar({spec.alpha, 1.0}, lambda * scale);
            coeff(p, q) *= e;
            if (q != p) coeff(q, p) *= e;
        }
    }
    const Eigen::MatrixXd out = sines * coeff * sines;
    std::vector<double> u(m * m);
    for (Eigen::Index i = 0; i < mi; ++i)
        for (Eigen::Index j = 0; j < mi; ++j) u[static_cast<std::size_t>(i * mi + j)] = out(i, j);
    return u;
}

double stiffness_ratio(std::size_t m, double mu) {
    if (m < 2) throw ValidationError("stiffness ratio needs m >= 2");
    if (!(mu > 0.0)) throw ValidationError("mu must be > 0");
    const double c = std::cos(std::numbers::pi / static_cast<double>(m + 1));
    return (1.0 + c) / (1.0 - c);
}

double variance_prediction(double c, double n, double alpha, double t) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("variance prediction needs 0 < alpha < 1 (Gamma(1 - alpha) has a pole at alpha = 1)");
    }
    if (!(t > 0.0)) throw DomainError("variance prediction needs t > 0");
    return c * c * n * std::pow(t, -alpha) / gamma_fn(1.0 - alpha);
}

ProblemBundle load_fem_system(const SparseMatrix& stiffness, const std::vector<double>& mass_diag,
                              std::vector<double> initial) {
    if (!stiffness.is_square()) throw DimensionError("stiffness matrix must be square");
    const std::size_t n = stiffness.n_rows();
    if (mass_diag.size() != n) throw DimensionError("mass diagonal length does not match the stiffness matrix");
    if (initial.size() != n) throw DimensionError("initial vector length does not match the stiffness matrix");
    std::vector<double> inv(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(mass_diag[i] > 0.0) || !std::isfinite(mass_diag[i])) {
            throw ValidationError("mass entry " + std::to_string(i) + " must be finite and > 0");
        }
        inv[i] = 1.0 / mass_diag[i];
    }
    ProblemBundle b;
    b.a = stiffness.scale_rows(inv);
    const ValidationReport report = validate_generator(b.a);
    if (!report.ok) {
        throw ValidationError("B^-1 K has a positive diagonal at row " + std::to_string(report.bad_diagonal_rows.front()));
    }
    b.u0 = std::move(initial);
    b.metadata = {{"kind", "fem"}, {"dimension", n}, {"nnz", b.a.nnz()}};
    return b;
}

ProblemBundle load_fem_system(const std::filesystem::path& stiffness_path, const std::filesystem::path& mass_diag_path,
                              const std::filesystem::path& initial_path) {
    ProblemBundle b =
        load_fem_system(read_matrix_market(stiffness_path), read_vector(mass_diag_path), read_vector(initial_path));
    b.metadata["stiffness"] = stiffness_path.string();
    b.metadata["mass"] = mass_diag_path.string();
    b.metadata["initial"] = initial_path.string();
    return b;
}

} // namespace mlmc
