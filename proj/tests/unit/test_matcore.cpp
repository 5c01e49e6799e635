#include "generators.hpp"

#include "mlmc/chain_kernel.hpp"
#include "mlmc/errors.hpp"
#include "mlmc/matrix_market.hpp"
#include "mlmc/problems.hpp"
#include "mlmc/sparse_matrix.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace mlmc;

namespace {

SparseMatrix dense(std::size_t n, std::vector<double> v) { return SparseMatrix::from_dense(n, n, v); }

SparseMatrix without_diagonal(const SparseMatrix& a) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] != i) t.push_back({static_cast<index_t>(i), cols[k], vals[k]});
        }
    }
    return SparseMatrix::from_triplets(a.n_rows(), a.n_cols(), t);
}

SparseMatrix random_sparse(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                v[i * n + j] = -1.0 - std::abs(unit(rng)) * 5.0;
            } else if (std::abs(unit(rng)) < 0.5 || j == (i + 1) % n) {
                v[i * n + j] = unit(rng) * 3.0;
            }
        }
    }
    return dense(n, v);
}

} // namespace

TEST_CASE("CSR constructor enforces structure") {
    CHECK_NOTHROW(SparseMatrix(2, 2, {0, 1, 2}, {0, 1}, {1.0, 2.0}));
    CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 1}, {0, 1}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 2}, {1, 0}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1, 2}, {0, 2}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1, 2}, {0, 1}, {1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), ValidationError);
}

TEST_CASE("validate_generator classifies rows") {
    SUBCASE("regular") {
        const auto r = validate_generator(dense(2, {-2, 1, 1, -2}));
        CHECK(r.ok);
        CHECK(r.bad_diagonal_rows.empty());
        CHECK(r.absorbing_rows.empty());
        CHECK(r.zero_diagonal_rows.empty());
    }
    SUBCASE("zero diagonal is reported, not fatal") {
        const auto r = validate_generator(dense(2, {0, 1, 1, -2}));
        CHECK(r.ok);
        CHECK(r.zero_diagonal_rows == std::vector<index_t>{0});
    }
    SUBCASE("positive diagonal") {
        const auto r = validate_generator(dense(2, {1, 1, 1, -2}));
        CHECK_FALSE(r.ok);
        CHECK(r.bad_diagonal_rows == std::vector<index_t>{0});
    }
    SUBCASE("absorbing rows") {
        const auto r = validate_generator(dense(2, {-1, 0, 0, -1}));
        CHECK(r.absorbing_rows == std::vector<index_t>{0, 1});
    }
    CHECK_THROWS_AS(validate_generator(SparseMatrix::from_dense(2, 3, std::vector<double>(6, -1.0))), DimensionError);
}

TEST_CASE("decompose on the uniform 3-state generator") {
    const auto k = decompose(dense(3, {-2, 1, 1, 1, -2, 1, 1, 1, -2}));
    CHECK(k.d == std::vector<double>{-2, -2, -2});
    CHECK(k.w == std::vector<double>{1, 1, 1});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(k.probs(i).size() == 2);
        CHECK(k.probs(i)[0] == 0.5);
        CHECK(k.probs(i)[1] == 0.5);
        CHECK(k.cum(i).back() == 1.0);
        for (auto g : k.signs(i)) CHECK(g == 1);
        for (auto c : k.cols(i)) CHECK(c != i);
    }
}

TEST_CASE("decompose with mixed signs") {
    const auto k = decompose(dense(3, {-4, 2, -2, 1, -3, 0, 0, 1, -2}));
    CHECK(k.probs(0)[0] == 0.5);
    CHECK(k.probs(0)[1] == 0.5);
    CHECK(k.signs(0)[0] == 1);
    CHECK(k.signs(0)[1] == -1);
    CHECK(k.w[0] == 1.0);
    CHECK(k.probs(1).size() == 1);
    CHECK(k.w[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(k.w[2] == 0.5);
    CHECK(k.jump_factor[1] == -1.0);
}

TEST_CASE("decompose rejects what the walk cannot represent") {
    CHECK_THROWS_AS(decompose(dense(2, {1, 1, 1, -2})), ValidationError);
    CHECK_THROWS_AS(decompose(dense(2, {-1, 0, 0, -1})), ValidationError);
    // A zero diagonal with coupling has no sojourn rate, flag or not.
    CHECK_THROWS_AS(decompose(dense(2, {0, 1, 1, -2}), true), ValidationError);

    const auto k = decompose(dense(2, {-1, 0, 0, -1}), true);
    CHECK(k.is_absorbing(0));
    CHECK(k.is_absorbing(1));
    CHECK(k.w == std::vector<double>{0, 0});
    CHECK(reconstruct_offdiagonal(k).nnz() == 0);
}

TEST_CASE("reconstruct_offdiagonal round-trips") {
    SUBCASE("uniform 3-state generator exactly") {
        const auto a = dense(3, {-2, 1, 1, 1, -2, 1, 1, 1, -2});
        CHECK(reconstruct_offdiagonal(decompose(a)) == without_diagonal(a));
    }
    SUBCASE("diffusion m = 8") {
        DiffusionSpec spec;
        spec.m = 8;
        const auto a = build_diffusion_2d(spec).a;
        const auto m = reconstruct_offdiagonal(decompose(a));
        const auto ref = without_diagonal(a);
        REQUIRE(m.col_indices().size() == ref.col_indices().size());
        CHECK(std::equal(m.col_indices().begin(), m.col_indices().end(), ref.col_indices().begin()));
        for (std::size_t e = 0; e < m.nnz(); ++e) {
            CHECK(std::abs(m.values()[e] - ref.values()[e]) <= 1e-14 * std::abs(ref.values()[e]));
        }
    }
    SUBCASE("random sparse") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            const auto a = random_sparse(2 + trial % 9, rng);
            const auto m = reconstruct_offdiagonal(decompose(a));
            const auto ref = without_diagonal(a);
            REQUIRE(m.nnz() == ref.nnz());
            for (std::size_t e = 0; e < m.nnz(); ++e) {
                CHECK(std::abs(m.values()[e] - ref.values()[e]) <= 1e-14 * std::abs(ref.values()[e]));
            }
        }
    }
}

TEST_CASE("cumulative rows end at exactly one") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto k = decompose(random_sparse(3 + trial % 12, rng));
        for (std::size_t i = 0; i < k.n; ++i) {
            const auto cum = k.cum(i);
            CHECK(cum.back() == 1.0);
            CHECK(std::is_sorted(cum.begin(), cum.end()));
            double s = 0.0;
            for (double q : k.probs(i)) s += q;
            CHECK(std::abs(s - 1.0) <= 4.0 * 2.220446049250313e-16 * static_cast<double>(cum.size()));
        }
    }
}

TEST_CASE("decompose is scale covariant") {
    std::mt19937_64 rng(17);
    const auto a = random_sparse(7, rng);
    SUBCASE("power-of-two scale is exact") {
        std::vector<double> f(7, 8.0);
        const auto k = decompose(a);
        const auto k8 = decompose(a.scale_rows(f));
        CHECK(k8.jump_prob == k.jump_prob);
        CHECK(k8.jump_signs == k.jump_signs);
        CHECK(k8.w == k.w);
        for (std::size_t i = 0; i < 7; ++i) CHECK(k8.d[i] == 8.0 * k.d[i]);
    }
    SUBCASE("general scale to rounding") {
        std::vector<double> f(7, 3.3);
        const auto k = decompose(a);
        const auto ks = decompose(a.scale_rows(f));
        CHECK(ks.jump_signs == k.jump_signs);
        for (std::size_t e = 0; e < k.jump_prob.size(); ++e) {
            CHECK(ks.jump_prob[e] == doctest::Approx(k.jump_prob[e]).epsilon(1e-15));
        }
        for (std::size_t i = 0; i < 7; ++i) {
            CHECK(ks.w[i] == doctest::Approx(k.w[i]).epsilon(1e-15));
            CHECK(ks.d[i] == doctest::Approx(3.3 * k.d[i]).epsilon(1e-15));
        }
    }
}

TEST_CASE("transpose") {
    CHECK(transpose(dense(2, {-1, 2, 0, -3})) == dense(2, {-1, 0, 2, -3}));
    const auto sym = dense(3, {-2, 1, 0, 1, -2, 1, 0, 1, -2});
    CHECK(transpose(sym) == sym);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_sparse(5, rng);
        CHECK(transpose(transpose(a)) == a);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) CHECK(transpose(a).at(j, i) == a.at(i, j));
    }
    const auto rect = SparseMatrix::from_dense(2, 3, std::vector<double>{1, 0, 2, 0, 3, 0});
    CHECK(transpose(rect).n_rows() == 3);
    CHECK(transpose(transpose(rect)) == rect);
}

TEST_CASE("Matrix Market reading") {
    SUBCASE("general 2x2") {
        std::istringstream in("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 4\n1 1 -1\n1 2 1\n2 1 1\n2 2 -1\n");
        CHECK(read_matrix_market(in) == dense(2, {-1, 1, 1, -1}));
    }
    SUBCASE("symmetric lower triangle is expanded") {
        std::istringstream in("%%MatrixMarket matrix coordinate real symmetric\n3 3 5\n1 1 -2\n2 1 1\n2 2 -2\n3 2 1\n3 3 -2\n");
        CHECK(read_matrix_market(in) == dense(3, {-2, 1, 0, 1, -2, 1, 0, 1, -2}));
    }
    SUBCASE("integer field") {
        std::istringstream in("%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 -3\n");
        CHECK(read_matrix_market(in).at(0, 0) == -3.0);
    }
    SUBCASE("errors name the line") {
        auto line_of = [](const std::string& text) {
            std::istringstream in(text);
            try {
                read_matrix_market(in);
            } catch (const ParseError& e) {
                return e.line();
            }
            return std::size_t{9999};
        };
        CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 -1\n1 1 2\n") == 4);
        CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 -1\n") == 3);
        CHECK(line_of("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 1\n") == 4);
        CHECK(line_of("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n") == 1);
        CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 x\n") == 3);
        CHECK(line_of("not a header\n") == 1);
    }
}

TEST_CASE("Matrix Market round trip") {
    DiffusionSpec spec;
    spec.m = 16;
    const auto a = build_diffusion_2d(spec).a;
    std::stringstream buf;
    write_matrix_market(a, buf);
    CHECK(read_matrix_market(buf) == a);

    std::mt19937_64 rng(23);
    const auto r = random_sparse(9, rng);
    std::stringstream buf2;
    write_matrix_market(r, buf2);
    CHECK(read_matrix_market(buf2) == r); // values bitwise
}

TEST_CASE("vector files") {
    SUBCASE("plain text") {
        std::istringstream in("# header\n1.5\n\n-2\n3e-3\n");
        CHECK(read_vector(in) == std::vector<double>{1.5, -2, 3e-3});
    }
    SUBCASE("Matrix Market array") {
        std::istringstream in("%%MatrixMarket matrix array real general\n3 1\n1\n0\n-0.25\n");
        CHECK(read_vector(in) == std::vector<double>{1, 0, -0.25});
    }
    SUBCASE("round trip is bitwise") {
        const std::vector<double> v{0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, -0.0};
        std::stringstream buf;
        write_vector(v, buf);
        const auto back = read_vector(buf);
        REQUIRE(back.size() == v.size());
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::signbit(back[i]) == std::signbit(v[i]));
        CHECK(back == v);
    }
    SUBCASE("array with two columns is rejected") {
        std::istringstream in("%%MatrixMarket matrix array real general\n1 2\n1\n2\n");
        CHECK_THROWS_AS(read_vector(in), ParseError);
    }
}

TEST_CASE("sparse products agree with dense") {
    std::mt19937_64 rng(29);
    const auto a = random_sparse(6, rng);
    const std::vector<double> x{1, -2, 0.5, 3, 0, -1};
    const auto y = a.multiply(x);
    const auto d = a.to_dense();
    for (std::size_t i = 0; i < 6; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 6; ++j) acc += d[i * 6 + j] * x[j];
        CHECK(y[i] == doctest::Approx(acc).epsilon(1e-14));
    }
}
