#include "generators.hpp"

#include "mlmc/dense_oracle.hpp"
#include "mlmc/engine.hpp"
#include "mlmc/errors.hpp"
#include "mlmc/partial_io.hpp"
#include "mlmc/problems.hpp"
#include "mlmc/special.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace mlmc;

namespace {

const SparseMatrix kTwoState = SparseMatrix::from_dense(2, 2, std::vector<double>{-1, 1, 1, -1});
const double kStay = (1.0 + std::exp(-1.0)) / 2.0; // e^{A/2} first row

SolveRequest request(SolveMode mode, double alpha, double t, std::uint64_t paths, std::uint64_t seed = 1) {
    SolveRequest r;
    r.mode = mode;
    r.alpha = alpha;
    r.t = t;
    r.n_paths = paths;
    r.root_seed = seed;
    return r;
}

// |estimate - exact| <= 4 sigma-hat, with sigma-hat the standard error.
void check_within_4sigma(const EstimateReport& r, const std::vector<double>& exact) {
    REQUIRE(exact.size() == r.values.size());
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const double se = std::sqrt(r.sample_variance[i] / static_cast<double>(r.n_paths));
        INFO("entry " << r.indices[i] << ": estimate " << r.values[i] << " exact " << exact[i] << " se " << se);
        CHECK(std::abs(r.values[i] - exact[i]) <= 4.0 * se + 1e-15);
    }
}

std::vector<double> oracle_action(const SparseMatrix& a, const std::vector<double>& u, double alpha, double t) {
    return dense_ml_oracle(DenseMatrix::from_sparse(a), alpha, t).apply(u);
}

} // namespace

TEST_CASE("walk_once basics") {
    const auto k = decompose(kTwoState);
    RandomStream s(1, 0);
    const auto r = walk_once(k, 0.6, 0.0, 1, s);
    CHECK(r.end == 1);
    CHECK(r.weight == 1.0);
    CHECK(r.n_events == 0);
    CHECK(s.draws == 0);
    CHECK_THROWS_AS(walk_once(k, 0.6, 1.0, 2, s), DimensionError);
}

TEST_CASE("walk on the two-state generator") {
    const auto k = decompose(kTwoState);
    const PathSimulator sim(k, 1.0, 0.5);
    RandomStream s(2, 0);
    const int n = 100'000;
    int stay = 0;
    for (int i = 0; i < n; ++i) {
        const auto r = sim.walk(0, s);
        CHECK(r.weight == 1.0);
        stay += r.end == 0;
    }
    const double p = stay / static_cast<double>(n);
    CHECK(std::abs(p - kStay) <= 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("absorbing rows") {
    SUBCASE("d < 0 without exits: survivors keep weight 1") {
        const auto k = decompose(SparseMatrix::from_dense(2, 2, std::vector<double>{-1, 0, 0, -2}), true);
        const PathSimulator sim(k, 0.5, 1.0);
        RandomStream s(3, 0);
        const int n = 100'000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto r = sim.walk(1, s);
            CHECK(r.end == 1);
            CHECK((r.weight == 0.0 || r.weight == 1.0));
            sum += r.weight;
        }
        const double p = ml_survival(0.5, -2.0, 1.0);
        CHECK(std::abs(sum / n - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
    }
    SUBCASE("d == 0 without exits: the walk never leaves") {
        const auto k = decompose(SparseMatrix::from_dense(2, 2, std::vector<double>{0, 0, 1, -1}), true);
        RandomStream s(4, 0);
        const auto r = walk_once(k, 0.7, 3.0, 0, s);
        CHECK(r.end == 0);
        CHECK(r.weight == 1.0);
        CHECK(r.n_events == 0);
        // From state 1 the walk eventually lands in 0 and stays.
        int in_zero = 0;
        for (int i = 0; i < 1000; ++i) in_zero += walk_once(k, 1.0, 50.0, 1, s).end == 0;
        CHECK(in_zero == 1000);
    }
}

TEST_CASE("zero time returns u exactly") {
    const std::vector<double> u{0.3, -1.7};
    const auto e = solve_entries(kTwoState, u, [] {
        auto r = request(SolveMode::entries, 0.5, 0.0, 1000);
        r.entries = {0, 1};
        return r;
    }());
    CHECK(e.values == u);
    CHECK(e.sample_variance == std::vector<double>{0, 0});
    CHECK(e.total_events == 0);
    const auto f = solve_full(kTwoState, u, request(SolveMode::full, 0.5, 0.0, 1000));
    CHECK(f.values == u);
    CHECK(f.sample_variance == std::vector<double>{0, 0});
    CHECK(path_statistics(f).mean_events_per_path == 0.0);
}

TEST_CASE("diagonal generator matches the survival function") {
    const auto a = SparseMatrix::from_dense(2, 2, std::vector<double>{-1, 0, 0, -2});
    auto req = request(SolveMode::entries, 0.5, 1.0, 100'000, 9);
    req.entries = {0, 1};
    req.allow_absorbing = true;
    const auto r = solve_entries(a, std::vector<double>{1, 1}, req);
    check_within_4sigma(r, {ml_survival(0.5, -1.0, 1.0), ml_survival(0.5, -2.0, 1.0)});
    req.allow_absorbing = false;
    CHECK_THROWS_AS(solve_entries(a, std::vector<double>{1, 1}, req), ValidationError);
}

TEST_CASE("two-state generator, both algorithms") {
    auto req = request(SolveMode::entries, 1.0, 0.5, 100'000, 5);
    req.entries = {0};
    const auto e = solve_entries(kTwoState, std::vector<double>{1, 0}, req);
    check_within_4sigma(e, {kStay});
    const auto f = solve_full(kTwoState, std::vector<double>{1, 0}, request(SolveMode::full, 1.0, 0.5, 1'000'000, 6));
    check_within_4sigma(f, {kStay, 1.0 - kStay});
}

TEST_CASE("random 6x6 generator against the dense oracle") {
    std::mt19937_64 rng(606);
    const auto a = testing::random_generator(6, rng);
    const auto u = testing::random_vector(6, rng);
    const auto exact = oracle_action(a, u, 0.7, 1.0);

    const auto full = solve_full(a, u, request(SolveMode::full, 0.7, 1.0, 1'000'000, 77));
    check_within_4sigma(full, exact);

    auto req = request(SolveMode::entries, 0.7, 1.0, 200'000, 78);
    req.entries = {0, 1, 2, 3, 4, 5};
    const auto ent = solve_entries(a, u, req);
    check_within_4sigma(ent, exact);
    for (std::size_t i = 0; i < 6; ++i) {
        const double se = std::sqrt(full.sample_variance[i] / 1e6 + ent.sample_variance[i] / 2e5);
        CHECK(std::abs(full.values[i] - ent.values[i]) <= 4.0 * se);
    }

    for (unsigned w : {2u, 4u}) {
        auto r = request(SolveMode::full, 0.7, 1.0, 400'000, 79);
        r.workers = w;
        check_within_4sigma(solve_full(a, u, r), exact);
    }
}

TEST_CASE("alpha = 1 against an independent exponential") {
    // e^{tA} u for A = [[-3, 1], [2, -2]] in closed form: eigenvalues -1 and -4.
    const auto a = SparseMatrix::from_dense(2, 2, std::vector<double>{-3, 1, 2, -2});
    const double t = 0.4;
    const double e1 = std::exp(-t), e4 = std::exp(-4 * t);
    // P diag(e^-t, e^-4t) P^-1, P = [[1, 1], [2, -1]]
    const std::vector<double> exact{(e1 + 2 * e4) / 3 * 1.0 + (e1 - e4) / 3 * -1.0,
                                    (2 * e1 - 2 * e4) / 3 * 1.0 + (2 * e1 + e4) / 3 * -1.0};
    const auto f = solve_full(a, std::vector<double>{1, -1}, request(SolveMode::full, 1.0, t, 400'000, 3));
    check_within_4sigma(f, exact);
}

TEST_CASE("parallel runs are deterministic") {
    std::mt19937_64 rng(1);
    const auto a = testing::random_generator(5, rng);
    const auto u = testing::random_vector(5, rng);
    auto req = request(SolveMode::full, 0.6, 0.8, 20'001, 11);
    const Job job(a, u, req);

    const auto serial = merge_partials({job.run_worker(0, 1)});
    CHECK(run_parallel(job, 1).values == serial.values);

    const auto p1 = run_parallel(job, 4);
    const auto p2 = run_parallel(job, 4);
    CHECK(p1.values == p2.values);
    CHECK(p1.sample_variance == p2.sample_variance);
    CHECK(p1.total_events == p2.total_events);
    CHECK(p1.n_paths == 20'001);
    CHECK(p1.workers == 4);

    req.mode = SolveMode::entries;
    req.entries = {4, 0};
    const Job ej(a, u, req);
    CHECK(run_parallel(ej, 3).values == run_parallel(ej, 3).values);
}

TEST_CASE("blocks partition the paths") {
    for (std::uint64_t n : {1ULL, 7ULL, 100ULL, 1'000'003ULL}) {
        for (unsigned w : {1u, 2u, 3u, 8u}) {
            std::uint64_t next = 0;
            for (unsigned k = 0; k < w; ++k) {
                const auto [first, count] = Job::block(n, k, w);
                CHECK(first == next);
                next += count;
            }
            CHECK(next == n);
        }
    }
}

TEST_CASE("merge_partials") {
    std::mt19937_64 rng(2);
    const auto a = testing::random_generator(4, rng);
    const auto u = testing::random_vector(4, rng);
    auto req = request(SolveMode::full, 0.9, 0.5, 10'000, 21);
    req.workers = 4;
    const Job job(a, u, req);

    SUBCASE("single part") {
        const auto p = job.run_worker(2, 4);
        const auto r = merge_partials({p});
        CHECK(r.n_paths == p.n_paths);
        for (std::size_t i = 0; i < 4; ++i) CHECK(r.values[i] == p.shift[i] + p.sum[i] / static_cast<double>(p.n_paths));
    }
    SUBCASE("order of parts does not matter") {
        std::vector<PartialSums> parts{job.run_worker(3, 4), job.run_worker(1, 4), job.run_worker(0, 4),
                                       job.run_worker(2, 4)};
        CHECK(merge_partials(parts).values == run_parallel(job, 4).values);
    }
    SUBCASE("file round trip is bitwise") {
        std::vector<PartialSums> parts;
        for (unsigned k = 0; k < 4; ++k) {
            std::stringstream buf;
            write_partial(job.run_worker(k, 4), buf);
            parts.push_back(read_partial(buf));
            CHECK(parts.back() == job.run_worker(k, 4));
        }
        const auto merged = merge_partials(parts);
        const auto direct = run_parallel(job, 4);
        CHECK(merged.values == direct.values);
        CHECK(merged.sample_variance == direct.sample_variance);
        CHECK(merged.ci_halfwidth == direct.ci_halfwidth);
    }
    SUBCASE("invalid combinations") {
        CHECK_THROWS_AS(merge_partials({}), ValidationError);
        CHECK_THROWS_AS(merge_partials({job.run_worker(1, 4), job.run_worker(1, 4)}), ValidationError);
        auto other = job.run_worker(0, 4);
        other.sum.pop_back();
        CHECK_THROWS_AS(merge_partials({other, job.run_worker(1, 4)}), ValidationError);
        auto seed = job.run_worker(0, 4);
        seed.root_seed = 5;
        CHECK_THROWS_AS(merge_partials({seed, job.run_worker(1, 4)}), ValidationError);
        CHECK_THROWS_AS(merge_partials({job.run_worker(0, 4), Job(a, u, req).run_worker(1, 2)}), ValidationError);
    }
}

TEST_CASE("partial file parsing errors") {
    std::istringstream bad_magic("NOT-PARTIAL 1\n");
    CHECK_THROWS_AS(read_partial(bad_magic), ParseError);
    std::istringstream bad_version("MLMC-PARTIAL 9\n");
    CHECK_THROWS_AS(read_partial(bad_version), ParseError);
    std::istringstream truncated("MLMC-PARTIAL 1\nmode full\ndimension 2\n");
    CHECK_THROWS_AS(read_partial(truncated), ParseError);
}

TEST_CASE("request validation") {
    const std::vector<double> u{1, 0};
    CHECK_THROWS_AS(solve_full(kTwoState, std::vector<double>{0, 0}, request(SolveMode::full, 0.5, 1, 10)),
                    ValidationError);
    CHECK_THROWS_AS(solve_full(kTwoState, std::vector<double>{1, 0, 0}, request(SolveMode::full, 0.5, 1, 10)),
                    DimensionError);
    CHECK_THROWS_AS(solve_full(kTwoState, u, request(SolveMode::full, 1.2, 1, 10)), DomainError);
    CHECK_THROWS_AS(solve_full(kTwoState, u, request(SolveMode::full, 0.5, -1, 10)), ValidationError);
    CHECK_THROWS_AS(solve_full(kTwoState, u, request(SolveMode::full, 0.5, 1, 0)), ValidationError);
    auto r = request(SolveMode::entries, 0.5, 1, 10);
    CHECK_THROWS_AS(solve_entries(kTwoState, u, r), ValidationError);
    r.entries = {2};
    CHECK_THROWS_AS(solve_entries(kTwoState, u, r), DimensionError);
    CHECK_THROWS_AS(solve_full(kTwoState, u, r), ValidationError);
}

TEST_CASE("confidence half-width") {
    CHECK(confidence_z(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    auto req = request(SolveMode::full, 0.8, 0.5, 5000, 4);
    req.confidence = 0.99;
    const auto r = solve_full(kTwoState, std::vector<double>{1, 0}, req);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(r.ci_halfwidth[i] ==
              doctest::Approx(confidence_z(0.99) * std::sqrt(r.sample_variance[i] / 5000)).epsilon(1e-14));
        CHECK(r.ci_halfwidth[i] >= 0.0);
    }
}

TEST_CASE("mean events on a small diffusion grid") {
    DiffusionSpec spec;
    spec.m = 8;
    const auto b = build_diffusion_2d(spec);
    for (double alpha : {0.6, 1.0}) {
        const auto r = solve_full(b.a, b.u0, request(SolveMode::full, alpha, 0.2, 20'000, 8));
        CHECK(path_statistics(r).mean_events_per_path ==
              doctest::Approx(fractional_poisson_mean(64.0, alpha, 0.2)).epsilon(0.05));
    }
}
