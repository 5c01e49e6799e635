#include "mlmc/engine.hpp"

#include "mlmc/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace mlmc {

namespace {

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) noexcept {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    double value() const noexcept { return sum + comp; }
};

void check_request(const SolveRequest& req) {
    if (!(req.alpha > 0.0 && req.alpha <= 1.0)) {
        throw DomainError("alpha must lie in (0, 1], got " + std::to_string(req.alpha));
    }
    if (!(req.t >= 0.0) || !std::isfinite(req.t)) throw ValidationError("t must be finite and >= 0");
    if (req.n_paths == 0) throw ValidationError("n_paths must be >= 1");
    if (req.workers == 0) throw ValidationError("workers must be >= 1");
    if (!(req.confidence > 0.0 && req.confidence < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
}

} // namespace

std::string to_string(SolveMode mode) { return mode == SolveMode::entries ? "entries" : "full"; }

SolveMode parse_solve_mode(const std::string& s) {
    if (s == "entries") return SolveMode::entries;
    if (s == "full") return SolveMode::full;
    throw ParseError("unknown solve mode '" + s + "'", 0);
}

double confidence_z(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
    const boost::math::normal_distribution<double> normal;
    return boost::math::quantile(normal, 0.5 + 0.5 * confidence);
}

PathSimulator::PathSimulator(const ChainKernel& kernel, double alpha, double t)
    : kernel_(&kernel), sampler_(alpha), t_(t), rate_(kernel.n), scale_(kernel.n) {
    for (std::size_t i = 0; i < kernel.n; ++i) {
        rate_[i] = std::abs(kernel.d[i]);
        scale_[i] = rate_[i] > 0.0 ? sampler_.scale(rate_[i]) : 0.0;
    }
}

WalkResult PathSimulator::walk(index_t start, RandomStream& s) const {
    const ChainKernel& k = *kernel_;
    WalkResult r{start, 1.0, 0};
    if (t_ == 0.0) return r;
    double tau = 0.0;
    index_t x = start;
    for (;;) {
        if (rate_[x] == 0.0) break; // infinite sojourn
        tau += sampler_(rate_[x], scale_[x], s);
        if (tau >= t_) break;
        ++r.n_events;
        if (k.is_absorbing(x)) {
            r.weight = 0.0; // killed: no exit carries the weight on
            break;
        }
        const std::size_t pos = sample_jump(k, x, s);
        r.weight *= k.jump_factor[pos];
        x = k.jump_cols[pos];
    }
    r.end = x;
    return r;
}

WalkResult walk_once(const ChainKernel& k, double alpha, double t, index_t start, RandomStream& s) {
    if (start >= k.n) throw DimensionError("walk start " + std::to_string(start) + " out of range");
    const PathSimulator sim(k, alpha, t);
    return sim.walk(start, s);
}

Job::Job(const SparseMatrix& a, std::vector<double> u, SolveRequest req) : req_(std::move(req)), u_(std::move(u)) {
    check_request(req_);
    if (!a.is_square()) throw DimensionError("generator matrix must be square");
    if (u_.size() != a.n_rows()) {
        throw DimensionError("vector length " + std::to_string(u_.size()) + " does not match matrix dimension " +
                             std::to_string(a.n_rows()));
    }
    for (double v : u_) {
        if (!std::isfinite(v)) throw ValidationError("input vector has a non-finite entry");
    }
    if (req_.mode == SolveMode::entries) {
        if (req_.entries.empty()) throw ValidationError("entries mode needs at least one index");
        for (index_t i : req_.entries) {
            if (i >= u_.size()) throw DimensionError("entry index " + std::to_string(i) + " out of range");
        }
        kernel_ = std::make_shared<const ChainKernel>(decompose(a, req_.allow_absorbing));
    } else {
        for (double v : u_) u_norm1_ += std::abs(v);
        if (u_norm1_ == 0.0) throw ValidationError("full mode needs a nonzero input vector");
        start_cum_.resize(u_.size());
        double acc = 0.0;
        for (std::size_t j = 0; j < u_.size(); ++j) {
            acc += std::abs(u_[j]);
            start_cum_[j] = acc / u_norm1_;
        }
        // Pin the top so every draw in (0, 1) lands on a state with u_j != 0.
        for (std::size_t j = u_.size(); j-- > 0;) {
            if (u_[j] != 0.0) {
                for (std::size_t r = j; r < u_.size(); ++r) start_cum_[r] = 1.0;
                break;
            }
        }
        kernel_ = std::make_shared<const ChainKernel>(decompose(transpose(a), req_.allow_absorbing));
    }
    sim_ = std::make_shared<const PathSimulator>(*kernel_, req_.alpha, req_.t);
}

std::pair<std::uint64_t, std::uint64_t> Job::block(std::uint64_t n_paths, unsigned k, unsigned w) {
    const std::uint64_t base = n_paths / w;
    const std::uint64_t extra = n_paths % w;
    const std::uint64_t first = k * base + std::min<std::uint64_t>(k, extra);
    return {first, base + (k < extra ? 1 : 0)};
}

PartialSums Job::empty_partial(unsigned worker_id, unsigned worker_count, std::uint64_t n_paths) const {
    PartialSums p;
    p.worker_id = worker_id;
    p.worker_count = worker_count;
    p.mode = req_.mode;
    p.dimension = u_.size();
    p.alpha = req_.alpha;
    p.t = req_.t;
    p.root_seed = req_.root_seed;
    p.n_paths = n_paths;
    if (req_.mode == SolveMode::entries) {
        p.indices = req_.entries;
        for (index_t i : p.indices) p.shift.push_back(u_[i]);
    } else {
        p.indices.resize(u_.size());
        for (std::size_t i = 0; i < u_.size(); ++i) p.indices[i] = static_cast<index_t>(i);
        // At t = 0 every path returns its start, so the estimate is u itself.
        p.shift = req_.t == 0.0 ? u_ : std::vector<double>(u_.size(), 0.0);
    }
    p.sum.assign(p.indices.size(), 0.0);
    p.sum_sq.assign(p.indices.size(), 0.0);
    return p;
}

PartialSums Job::run_worker(unsigned worker_id, unsigned worker_count) const {
    if (worker_count == 0 || worker_id >= worker_count) {
        throw ValidationError("worker id " + std::to_string(worker_id) + " out of range for " +
                              std::to_string(worker_count) + " workers");
    }
    const std::uint64_t count = block(req_.n_paths, worker_id, worker_count).second;
    PartialSums part = empty_partial(worker_id, worker_count, count);
    if (req_.t == 0.0 || count == 0) return part;
    if (req_.mode == SolveMode::entries) {
        run_entries(part, count);
    } else {
        run_full(part, count);
    }
    return part;
}

void Job::run_entries(PartialSums& part, std::uint64_t n_paths) const {
    const unsigned w = part.worker_count;
    for (std::size_t p = 0; p < part.indices.size(); ++p) {
        RandomStream stream(req_.root_seed, static_cast<std::uint64_t>(p) * w + part.worker_id);
        const index_t start = part.indices[p];
        const double shift = part.shift[p];
        CompensatedSum s1;
        CompensatedSum s2;
        for (std::uint64_t n = 0; n < n_paths; ++n) {
            const WalkResult r = sim_->walk(start, stream);
            const double dev = (r.weight == 0.0 ? 0.0 : r.weight * u_[r.end]) - shift;
            s1.add(dev);
            s2.add(dev * dev);
            part.event_count += r.n_events;
        }
        part.sum[p] = s1.value();
        part.sum_sq[p] = s2.value();
    }
}

void Job::run_full(PartialSums& part, std::uint64_t n_paths) const {
    RandomStream stream(req_.root_seed, part.worker_id);
    std::vector<CompensatedSum> s1(u_.size());
    std::vector<CompensatedSum> s2(u_.size());
    for (std::uint64_t n = 0; n < n_paths; ++n) {
        const double v = uniform_open(stream);
        const auto j = static_cast<index_t>(select_cell(start_cum_, v));
        const WalkResult r = sim_->walk(j, stream);
        part.event_count += r.n_events;
        if (r.weight == 0.0) continue;
        const double deposit = std::copysign(u_norm1_, u_[j]) * r.weight;
        s1[r.end].add(deposit);
        s2[r.end].add(deposit * deposit);
    }
    for (std::size_t i = 0; i < u_.size(); ++i) {
        part.sum[i] = s1[i].value();
        part.sum_sq[i] = s2[i].value();
    }
}

EstimateReport merge_partials(std::vector<PartialSums> parts, double confidence) {
    if (parts.empty()) throw ValidationError("merge needs at least one partial result");
    std::sort(parts.begin(), parts.end(),
              [](const PartialSums& a, const PartialSums& b) { return a.worker_id < b.worker_id; });
    const PartialSums& ref = parts.front();
    const std::size_t m = ref.indices.size();
    if (ref.shift.size() != m || ref.sum.size() != m || ref.sum_sq.size() != m) {
        throw ValidationError("partial result has inconsistent vector lengths");
    }
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const PartialSums& q = parts[p];
        if (p > 0 && q.worker_id == parts[p - 1].worker_id) {
            throw ValidationError("duplicate worker id " + std::to_string(q.worker_id));
        }
        if (q.mode != ref.mode || q.dimension != ref.dimension || q.indices != ref.indices || q.shift != ref.shift ||
            q.sum.size() != m || q.sum_sq.size() != m) {
            throw ValidationError("partial results describe different problems (worker " +
                                  std::to_string(q.worker_id) + ")");
        }
        if (q.worker_count != ref.worker_count || q.worker_id >= q.worker_count) {
            throw ValidationError("partial results disagree on the worker count");
        }
        if (q.alpha != ref.alpha || q.t != ref.t || q.root_seed != ref.root_seed) {
            throw ValidationError("partial results disagree on alpha, t or seed");
        }
    }

    std::uint64_t n = 0;
    std::uint64_t events = 0;
    std::vector<CompensatedSum> s1(m);
    std::vector<CompensatedSum> s2(m);
    for (const PartialSums& q : parts) {
        n += q.n_paths;
        events += q.event_count;
        for (std::size_t i = 0; i < m; ++i) {
            s1[i].add(q.sum[i]);
            s2[i].add(q.sum_sq[i]);
        }
    }
    if (n == 0) throw ValidationError("merged partial results contain no paths");

    EstimateReport r;
    r.mode = ref.mode;
    r.indices = ref.indices;
    r.n_paths = n;
    r.total_events = events;
    const double walks = static_cast<double>(n) * (ref.mode == SolveMode::entries ? static_cast<double>(m) : 1.0);
    r.mean_events_per_path = static_cast<double>(events) / walks;
    r.alpha = ref.alpha;
    r.t = ref.t;
    r.root_seed = ref.root_seed;
    r.workers = ref.worker_count;
    r.confidence = confidence;
    const double z = confidence_z(confidence);
    const double dn = static_cast<double>(n);
    r.values.resize(m);
    r.sample_variance.resize(m);
    r.ci_halfwidth.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double s = s1[i].value();
        const double ss = s2[i].value();
        r.values[i] = ref.shift[i] + s / dn;
        r.sample_variance[i] = n > 1 ? std::max(0.0, (ss - s * s / dn) / (dn - 1.0)) : 0.0;
        r.ci_halfwidth[i] = z * std::sqrt(r.sample_variance[i] / dn);
    }
    return r;
}

EstimateReport run_parallel(const Job& job, unsigned workers) {
    if (workers == 0) throw ValidationError("workers must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<PartialSums> parts(workers);
    if (workers == 1) {
        parts[0] = job.run_worker(0, 1);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned k = 0; k < workers; ++k) {
            threads.emplace_back([&, k] {
                try {
                    parts[k] = job.run_worker(k, workers);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        }
        for (auto& th : threads) th.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    EstimateReport r = merge_partials(std::move(parts), job.request().confidence);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

EstimateReport solve_entries(const SparseMatrix& a, std::span<const double> u, const SolveRequest& req) {
    if (req.mode != SolveMode::entries) throw ValidationError("solve_entries needs an entries-mode request");
    const Job job(a, std::vector<double>(u.begin(), u.end()), req);
    return run_parallel(job, req.workers);
}

EstimateReport solve_full(const SparseMatrix& a, std::span<const double> u, const SolveRequest& req) {
    if (req.mode != SolveMode::full) throw ValidationError("solve_full needs a full-mode request");
    const Job job(a, std::vector<double>(u.begin(), u.end()), req);
    return run_parallel(job, req.workers);
}

EstimateReport solve(const SparseMatrix& a, std::span<const double> u, const SolveRequest& req) {
    return req.mode == SolveMode::entries ? solve_entries(a, u, req) : solve_full(a, u, req);
}

PathDiagnostics path_statistics(const EstimateReport& report) {
    PathDiagnostics d;
    d.mean_events_per_path = report.mean_events_per_path;
    d.total_events = report.total_events;
    d.total_paths = report.n_paths * (report.mode == SolveMode::entries ? report.indices.size() : 1);
    return d;
}

} // namespace mlmc
