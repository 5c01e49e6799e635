#pragma once

#include "mlmc/chain_kernel.hpp"
#include "mlmc/random.hpp"
#include "mlmc/sparse_matrix.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mlmc {

enum class SolveMode { entries, full };

std::string to_string(SolveMode mode);
/// Inverse of to_string; throws ParseError on anything else.
SolveMode parse_solve_mode(const std::string& s);

/// Monte Carlo estimate of entries of y = E_alpha(A t^alpha) u.
struct SolveRequest {
    double alpha = 1.0;
    double t = 0.0;
    std::uint64_t n_paths = 1;
    std::uint64_t root_seed = 0;
    unsigned workers = 1;
    SolveMode mode = SolveMode::full;
    std::vector<index_t> entries; ///< entries mode only; non-empty, in range
    double confidence = 0.95;     ///< two-sided level of ci_halfwidth
    bool allow_absorbing = false;
};

struct EstimateReport {
    SolveMode mode = SolveMode::full;
    std::vector<index_t> indices; ///< entry index of each value (0..n-1 in full mode)
    std::vector<double> values;
    std::vector<double> sample_variance; ///< per-path variance of each value
    std::vector<double> ci_halfwidth;    ///< z * sqrt(variance / n_paths)
    std::uint64_t n_paths = 0;           ///< paths per estimated value
    double mean_events_per_path = 0.0;
    std::uint64_t total_events = 0;
    double alpha = 1.0;
    double t = 0.0;
    std::uint64_t root_seed = 0;
    unsigned workers = 1;
    double confidence = 0.95;
    double wall_time_s = 0.0; ///< not part of the deterministic output
};

/// Per-worker accumulators. Values are shift + sum / n_paths.
///
/// Entries mode keeps one accumulator per requested entry, full mode one per
/// state; sums hold deviations from `shift` so that estimates close to their
/// shift keep full precision in sum_sq.
struct PartialSums {
    unsigned worker_id = 0;
    unsigned worker_count = 1;
    SolveMode mode = SolveMode::full;
    std::uint64_t dimension = 0; ///< n of the system
    std::vector<index_t> indices;
    std::vector<double> shift;
    std::vector<double> sum;
    std::vector<double> sum_sq;
    std::uint64_t n_paths = 0; ///< paths per value in this part
    std::uint64_t event_count = 0;
    double alpha = 1.0;
    double t = 0.0;
    std::uint64_t root_seed = 0;

    friend bool operator==(const PartialSums&, const PartialSums&) = default;
};

struct WalkResult {
    index_t end = 0;
    double weight = 1.0;
    std::uint64_t n_events = 0; ///< sojourns completed before t
};

/// Walk simulator over one kernel at fixed (alpha, t). Immutable; share freely.
class PathSimulator {
public:
    /// Keeps a reference to `kernel`, which must outlive the simulator.
    PathSimulator(const ChainKernel& kernel, double alpha, double t);

    /// Accumulates ML sojourns until they pass t, multiplying the weight by
    /// w_x g_xy on every jump. A path that completes a sojourn in a killing
    /// row (d < 0, no exits) ends with weight 0; a d == 0 row never ends its
    /// sojourn. Draws per step: the sojourn first, then the transition.
    WalkResult walk(index_t start, RandomStream& s) const;

    const ChainKernel& kernel() const noexcept { return *kernel_; }

private:
    const ChainKernel* kernel_;
    MittagLefflerSampler sampler_;
    double t_;
    std::vector<double> rate_;
    std::vector<double> scale_;
};

/// Single walk; builds a PathSimulator each call (O(n) setup).
WalkResult walk_once(const ChainKernel& k, double alpha, double t, index_t start, RandomStream& s);

/// A validated solve: kernel, input vector and request, ready to be split
/// across workers. Worker k of W simulates a contiguous block of the paths
/// with stream (root_seed, k); in entries mode the stream of entry position p
/// is (root_seed, p * W + k), so every entry gets its own paths.
class Job {
public:
    /// Throws DimensionError, ValidationError or DomainError on bad input.
    Job(const SparseMatrix& a, std::vector<double> u, SolveRequest req);

    const SolveRequest& request() const noexcept { return req_; }
    std::size_t dimension() const noexcept { return u_.size(); }

    /// Paths [first, first + count) of worker k out of W.
    static std::pair<std::uint64_t, std::uint64_t> block(std::uint64_t n_paths, unsigned k, unsigned w);

    PartialSums run_worker(unsigned worker_id, unsigned worker_count) const;

private:
    PartialSums empty_partial(unsigned worker_id, unsigned worker_count, std::uint64_t n_paths) const;
    void run_entries(PartialSums& part, std::uint64_t n_paths) const;
    void run_full(PartialSums& part, std::uint64_t n_paths) const;

    SolveRequest req_;
    std::vector<double> u_;
    std::shared_ptr<const ChainKernel> kernel_;
    std::shared_ptr<const PathSimulator> sim_;
    std::vector<double> start_cum_; ///< full mode: cumulative |u_j| / ||u||_1
    double u_norm1_ = 0.0;
};

/// Runs `workers` threads (workers == 1 runs on the calling thread) and merges.
/// The result depends only on the job and `workers`, never on scheduling.
EstimateReport run_parallel(const Job& job, unsigned workers);

/// Combines parts in ascending worker_id order with compensated summation.
/// Throws ValidationError on duplicate worker ids or inconsistent parts.
EstimateReport merge_partials(std::vector<PartialSums> parts, double confidence = 0.95);

/// Algorithm over A for the listed entries (req.mode must be entries).
EstimateReport solve_entries(const SparseMatrix& a, std::span<const double> u, const SolveRequest& req);

/// Whole vector through the adjoint chain of A^T (req.mode must be full).
EstimateReport solve_full(const SparseMatrix& a, std::span<const double> u, const SolveRequest& req);

/// Dispatches on req.mode.
EstimateReport solve(const SparseMatrix& a, std::span<const double> u, const SolveRequest& req);

struct PathDiagnostics {
    double mean_events_per_path = 0.0;
    std::uint64_t total_events = 0;
    std::uint64_t total_paths = 0;
};

PathDiagnostics path_statistics(const EstimateReport& report);

/// Two-sided standard normal quantile for a confidence level in (0, 1).
double confidence_z(double confidence);

} // namespace mlmc
