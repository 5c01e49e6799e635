#include "mlmc/random.hpp"

#include "mlmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mlmc {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

unsigned __int128 make_u128(std::uint64_t hi, std::uint64_t lo) {
    return (static_cast<unsigned __int128>(hi) << 64) | lo;
}

} // namespace

Pcg64Dxsm::Pcg64Dxsm(unsigned __int128 initstate, unsigned __int128 initseq)
    : state_(0), inc_((initseq << 1) | 1u) {
    (*this)();
    state_ += initstate;
    (*this)();
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t id) : stream_id(id), root_seed(seed) {
    // The increment carries stream_id verbatim in its high word, so two
    // streams of one seed never share an LCG sequence.
    std::uint64_t mix = seed;
    const std::uint64_t a = splitmix64(mix);
    const std::uint64_t b = splitmix64(mix);
    std::uint64_t mix_id = id ^ a;
    const std::uint64_t c = splitmix64(mix_id);
    const std::uint64_t e = splitmix64(mix_id);
    state = Pcg64Dxsm(make_u128(b ^ c, e), make_u128(id, a));
}

std::vector<RandomStream> spawn_streams(std::uint64_t root_seed, std::size_t count) {
    std::vector<RandomStream> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.emplace_back(root_seed, k);
    return out;
}

MittagLefflerSampler::MittagLefflerSampler(double alpha)
    : alpha_(alpha), inv_alpha_(1.0 / alpha), alpha_pi_(alpha * std::numbers::pi), exponential_(alpha == 1.0) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw DomainError("Mittag-Leffler sampling needs 0 < alpha <= 1, got " + std::to_string(alpha));
    }
}

double MittagLefflerSampler::scale(double rate) const {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("Mittag-Leffler rate must be finite and > 0");
    return exponential_ ? 1.0 / rate : std::pow(rate, -inv_alpha_);
}

double MittagLefflerSampler::from_uniforms(double u, double v, double rate, double scale) const noexcept {
    if (exponential_) return -std::log(u) / rate;
    const double b = std::sin(alpha_pi_ * (1.0 - v)) / std::sin(alpha_pi_ * v);
    return scale * -std::log(u) * std::pow(b, inv_alpha_);
}

double sample_ml(double alpha, double rate, RandomStream& s) {
    const MittagLefflerSampler sampler(alpha);
    return sampler(rate, sampler.scale(rate), s);
}

std::size_t sample_jump(const ChainKernel& k, std::size_t i, RandomStream& s) {
    if (k.is_absorbing(i)) throw std::logic_error("sample_jump called on absorbing row " + std::to_string(i));
    // cum.back() == 1.0 > u, so the cell is always valid.
    return k.row_offsets[i] + select_cell(k.cum(i), uniform_open(s));
}

index_t sample_next_state(const ChainKernel& k, std::size_t i, RandomStream& s) {
    return k.jump_cols[sample_jump(k, i, s)];
}

} // namespace mlmc
