#pragma once

#include "mlmc/sparse_matrix.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace mlmc {

/// Time-fractional heat equation on [-mu, mu]^2 with homogeneous Dirichlet
/// data, discretized on an m x m interior grid.
struct DiffusionSpec {
    std::size_t m = 16;
    double mu = 1.0;
    double c_strength = 1.0 / 4096.0;
    double t = 0.1;
    double alpha = 1.0;
};

struct ProblemBundle {
    SparseMatrix a;
    std::vector<double> u0;
    std::optional<DiffusionSpec> diffusion; ///< set when the analytic solution applies
    nlohmann::json metadata;
};

/// Throws ValidationError unless m >= 2, mu > 0 and every field is finite.
void validate(const DiffusionSpec& spec);

/// A = m^2 / (4 mu^2) * L, L the 5-point Laplacian (-4 diagonal, +1 per
/// neighbour) truncated at the boundary. Node (i, j), 1-based, is row
/// (i-1) m + (j-1). The bundle also carries impulse_vector(spec).
ProblemBundle build_diffusion_2d(const DiffusionSpec& spec);

/// c m^2 at node (m/2, m/2) (integer division), zero elsewhere.
std::vector<double> impulse_vector(const DiffusionSpec& spec);

/// E_alpha(A t^alpha) u0 for the impulse, through the orthonormal sine basis
/// S_ij = sqrt(2/(m+1)) sin(i j pi/(m+1)): U = S (E o (S U0 S)) S with
/// E_pq = E_alpha(lambda_pq t^alpha). Requires m <= 256.
std::vector<double> diffusion_analytic_solution(const DiffusionSpec& spec);

/// Same, for an arbitrary initial vector of length m^2.
std::vector<double> diffusion_analytic_solution(const DiffusionSpec& spec, const std::vector<double>& u0);

/// Eigenvalues lambda_pq = m^2/(4 mu^2) (2 cos(p pi/(m+1)) + 2 cos(q pi/(m+1)) - 4),
/// row-major in (p, q).
std::vector<double> diffusion_eigenvalues(const DiffusionSpec& spec);

/// |lambda_max| / |lambda_min| = (1 + cos(pi/(m+1))) / (1 - cos(pi/(m+1))).
double stiffness_ratio(std::size_t m, double mu = 1.0);

/// c^2 N t^(-alpha) / Gamma(1 - alpha); DomainError unless 0 < alpha < 1.
double variance_prediction(double c, double n, double alpha, double t);

/// A = B^-1 K for a lumped (diagonal, strictly positive) mass B.
/// Throws DimensionError on mismatched sizes, ValidationError on a
/// non-positive mass entry or a positive diagonal in A.
ProblemBundle load_fem_system(const SparseMatrix& stiffness, const std::vector<double>& mass_diag,
                              std::vector<double> initial);
ProblemBundle load_fem_system(const std::filesystem::path& stiffness_path, const std::filesystem::path& mass_diag_path,
                              const std::filesystem::path& initial_path);

} // namespace mlmc
