#pragma once

#include "mlmc/chain_kernel.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace mlmc {

/// PCG64 with the DXSM output permutation (128-bit LCG state, 64-bit output).
///
/// Distinct increments select distinct LCG sequences; the DXSM permutation
/// hides the low-bit structure shared by related increments.
class Pcg64Dxsm {
public:
    using result_type = std::uint64_t;

    Pcg64Dxsm() : Pcg64Dxsm(0, 0) {}
    /// pcg setseq seeding: state from `initstate`, increment 2*initseq + 1.
    Pcg64Dxsm(unsigned __int128 initstate, unsigned __int128 initseq);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const unsigned __int128 old = state_;
        state_ = old * kMultiplier + inc_;
        std::uint64_t hi = static_cast<std::uint64_t>(old >> 64);
        const std::uint64_t lo = static_cast<std::uint64_t>(old) | 1u;
        hi ^= hi >> 32;
        hi *= kMultiplier;
        hi ^= hi >> 48;
        hi *= lo;
        return hi;
    }

    friend bool operator==(const Pcg64Dxsm&, const Pcg64Dxsm&) = default;

private:
    static constexpr std::uint64_t kMultiplier = 0xda942042e4dd58b5ULL;
    unsigned __int128 state_ = 0;
    unsigned __int128 inc_ = 1;
};

/// Generator state plus the (root_seed, stream_id) pair it was derived from.
///
/// The sequence is a pure function of that pair. `draws` counts uniforms
/// consumed, which makes the fixed draw budget of each sampler observable.
struct RandomStream {
    Pcg64Dxsm state;
    std::uint64_t stream_id = 0;
    std::uint64_t root_seed = 0;
    std::uint64_t draws = 0;

    RandomStream() = default;
    RandomStream(std::uint64_t seed, std::uint64_t id);
};

/// Streams 0..count-1 of `root_seed`. Stream k does not depend on `count`.
std::vector<RandomStream> spawn_streams(std::uint64_t root_seed, std::size_t count);

/// Uniform on the open interval: ((x >> 12) + 0.5) * 2^-52, a midpoint of the
/// 2^52 equal cells of [0, 1). Extremes are 2^-53 and 1 - 2^-53, both exact.
inline double uniform_open(RandomStream& s) noexcept {
    ++s.draws;
    return (static_cast<double>(s.state() >> 12) + 0.5) * 0x1.0p-52;
}

/// Mittag-Leffler waiting times of a fixed order alpha.
///
/// Draw = scale * (-ln U) * B^(1/alpha), B = sin(alpha pi (1 - V)) / sin(alpha pi V),
/// scale = rate^(-1/alpha), with U drawn before V. B is the same quantity as
/// sin(alpha pi) cot(alpha pi V) - cos(alpha pi) but stays positive in
/// floating point as V approaches 1. alpha == 1 draws exactly -ln(U) / rate
/// from a single uniform.
class MittagLefflerSampler {
public:
    /// Throws DomainError unless 0 < alpha <= 1.
    explicit MittagLefflerSampler(double alpha);

    double alpha() const noexcept { return alpha_; }

    /// rate^(-1/alpha); precompute once per rate.
    double scale(double rate) const;

    double operator()(double rate, double scale, RandomStream& s) const noexcept {
        const double u = uniform_open(s);
        return exponential_ ? from_uniforms(u, 0.5, rate, scale) : from_uniforms(u, uniform_open(s), rate, scale);
    }

    /// The variate for given uniforms; v is ignored when alpha == 1.
    double from_uniforms(double u, double v, double rate, double scale) const noexcept;

private:
    double alpha_;
    double inv_alpha_;
    double alpha_pi_;
    bool exponential_;
};

/// One Mittag-Leffler variate with survival E_alpha(-rate t^alpha).
/// Throws DomainError unless 0 < alpha <= 1 and rate > 0.
double sample_ml(double alpha, double rate, RandomStream& s);

/// Cell b of a cumulative row with cum[b-1] <= u < cum[b] (cum[-1] = 0).
/// Requires u < cum.back().
inline std::size_t select_cell(std::span<const double> cum, double u) noexcept {
    return static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
}

/// Position (into the kernel's per-entry arrays) of the next transition out of
/// row i: the first cumulative value strictly above one uniform draw, so u
/// lands in cell b iff cum[b-1] <= u < cum[b]. Throws std::logic_error on an
/// absorbing row.
std::size_t sample_jump(const ChainKernel& k, std::size_t i, RandomStream& s);

/// Destination column of sample_jump.
index_t sample_next_state(const ChainKernel& k, std::size_t i, RandomStream& s);

} // namespace mlmc
