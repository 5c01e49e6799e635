#include "mlmc/special.hpp"

#include "mlmc/errors.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>

namespace mlmc {

namespace {

using quad = __float128;

// Branch point in terms of |z|^(1/alpha). At 40 the Taylor terms peak around
// e^40 (well inside binary128) and the asymptotic remainder is near e^-40.
constexpr double kSwitchScaled = 40.0;
constexpr double kExtendedTierScaled = 16.0;
constexpr double kMaxArgument = 1e8;
constexpr int kMaxTaylorTerms = 400000;

std::string params_str(const MLParams& p) {
    return "(alpha=" + std::to_string(p.alpha) + ", beta=" + std::to_string(p.beta) + ")";
}

bool in_supported_box(const MLParams& p) {
    const double a = p.alpha;
    if (!(a > 0.0)) return false;
    if (!(a <= 1.0) && a != 2.0) return false;
    const double b = p.beta;
    return b == 1.0 || b == a || b == a + 1.0 || b == 2.0 * a;
}

double checked(double v, const MLParams& p, double z) {
    if (!std::isfinite(v)) {
        throw DomainError("Mittag-Leffler value overflows a double at z=" + std::to_string(z) + " " + params_str(p));
    }
    return v;
}

// 1/Gamma(x) split into log-magnitude and sign; returns false at a pole.
bool reciprocal_gamma(long double x, long double& log_mag, int& sign) {
    const long double nearest = std::nearbyint(x);
    if (x <= 0.0L && std::abs(x - nearest) < 1e-12L) return false;
    if (x > 0.0L) {
        log_mag = -std::lgamma(x);
        sign = 1;
        return true;
    }
    // Reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi. Reduce x mod 2 first
    // so sin sees a small, exactly representable argument.
    const long double r = x - 2.0L * std::floor(x / 2.0L);
    const long double s = std::sin(std::numbers::pi_v<long double> * r);
    log_mag = std::lgamma(1.0L - x) + std::log(std::abs(s)) - std::log(std::numbers::pi_v<long double>);
    sign = s > 0 ? 1 : -1;
    return true;
}

double ml_alpha_one(const MLParams& p, double z) {
    if (p.beta == 1.0) return std::exp(z);
    // beta == 2
    if (z == 0.0) return 1.0;
    return std::expm1(z) / z;
}

double ml_alpha_two(const MLParams& p, double z) {
    auto e21 = [](double x) { return x >= 0.0 ? std::cosh(std::sqrt(x)) : std::cos(std::sqrt(-x)); };
    auto e22 = [](double x) {
        if (x == 0.0) return 1.0;
        const double s = std::sqrt(std::abs(x));
        return x > 0.0 ? std::sinh(s) / s : std::sin(s) / s;
    };
    if (p.beta == 1.0) return e21(z);
    if (p.beta == 2.0) return e22(z);
    if (std::abs(z) <= 0.5) return detail::ml_taylor(p, z);
    if (p.beta == 3.0) return (e21(z) - 1.0) / z;
    return (e22(z) - 1.0) / z; // beta == 4
}

// Real-type shims so one summation loop serves long double and binary128.
inline long double log_of(long double x) { return std::log(x); }
inline long double exp_of(long double x) { return std::exp(x); }
inline long double lgamma_of(long double x) { return std::lgamma(x); }
inline long double abs_of(long double x) { return std::abs(x); }
inline quad log_of(quad x) { return logq(x); }
inline quad exp_of(quad x) { return expq(x); }
inline quad lgamma_of(quad x) { return lgammaq(x); }
inline quad abs_of(quad x) { return fabsq(x); }

struct TaylorResult {
    double value = std::numeric_limits<double>::quiet_NaN(); ///< NaN when the term cap is hit
    double max_term = 0.0;
};

// Neumaier-compensated Taylor sum.
template <typename Real>
TaylorResult taylor_sum(const MLParams& p, double z) {
    const Real alpha = p.alpha;
    const Real beta = p.beta;
    const Real log_abs_z = log_of(abs_of(static_cast<Real>(z)));
    const Real rel_tol = std::is_same_v<Real, quad> ? Real(1e-36) : Real(1e-22);
    const bool alternating = z < 0.0;

    Real sum = 0;
    Real comp = 0;
    Real prev_log = -std::numeric_limits<double>::infinity();
    Real max_log = prev_log;
    for (int k = 0; k < kMaxTaylorTerms; ++k) {
        const Real log_term = k * log_abs_z - lgamma_of(alpha * k + beta);
        Real term = exp_of(log_term);
        if (alternating && (k & 1)) term = -term;

        const Real t = sum + term;
        if (abs_of(sum) >= abs_of(term)) {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;

        const bool decreasing = log_term < prev_log;
        prev_log = log_term;
        if (log_term > max_log) max_log = log_term;
        if (decreasing && abs_of(term) <= rel_tol * abs_of(sum + comp)) {
            return {static_cast<double>(sum + comp), static_cast<double>(exp_of(max_log))};
        }
    }
    return {};
}

} // namespace

double gamma_fn(double x) {
    if (std::isnan(x)) throw DomainError("gamma_fn: NaN argument");
    if (x <= 0.0 && x == std::floor(x)) throw DomainError("gamma_fn: pole at " + std::to_string(x));
    const double g = std::tgamma(x);
    if (!std::isfinite(g)) throw DomainError("gamma_fn: overflow at " + std::to_string(x));
    return g;
}

double ml_switch_point(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("ml_switch_point: alpha must lie in (0, 1]");
    return std::pow(kSwitchScaled, alpha);
}

namespace detail {

double ml_taylor(const MLParams& p, double z) {
    if (z == 0.0) return 1.0 / gamma_fn(p.beta);
    // Long double first; redo in binary128 when cancellation against the
    // largest term could cost more than ~1e-14 relative.
    double v = std::numeric_limits<double>::quiet_NaN();
    if (std::pow(std::abs(z), 1.0 / p.alpha) <= kExtendedTierScaled) {
        const TaylorResult r = taylor_sum<long double>(p, z);
        const double err = 8.0 * r.max_term * static_cast<double>(std::numeric_limits<long double>::epsilon());
        if (!std::isnan(r.value) && err <= 1e-14 * std::abs(r.value)) v = r.value;
    }
    if (std::isnan(v)) v = taylor_sum<quad>(p, z).value;
    if (std::isnan(v)) {
        throw DomainError("Mittag-Leffler Taylor series did not converge at z=" + std::to_string(z) + " " +
                          params_str(p));
    }
    return v;
}

double ml_asymptotic(const MLParams& p, double z) {
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw DomainError("asymptotic branch requires 0 < alpha < 1");
    if (z == 0.0) throw DomainError("asymptotic branch undefined at z = 0");
    const long double alpha = p.alpha;
    const long double beta = p.beta;
    const long double log_abs_z = std::log(std::abs(static_cast<long double>(z)));

    long double sum = 0.0L;
    long double prev_envelope = std::numeric_limits<long double>::infinity();
    // The envelope reaches its minimum (or the tolerance) well before this.
    const int k_cap = static_cast<int>(std::min(10.0 * std::pow(std::abs(z), 1.0 / p.alpha) / p.alpha + 64.0, 4096.0));
    for (int k = 1; k < k_cap; ++k) {
        const long double x = beta - alpha * k;
        // Truncation decisions use the envelope Gamma(1-x)/(pi |z|^k), which
        // drops the oscillating sin(pi x) factor of the reflection formula.
        if (x <= 0.0L) {
            const long double envelope =
                std::exp(std::lgamma(1.0L - x) - std::log(std::numbers::pi_v<long double>) - k * log_abs_z);
            if (envelope > prev_envelope) break; // smallest term passed
            prev_envelope = envelope;
            if (envelope <= 1e-21L * std::abs(sum)) break;
        }
        long double log_rg = 0.0L;
        int sign = 1;
        if (!reciprocal_gamma(x, log_rg, sign)) continue;
        if (z < 0.0 && (k & 1)) sign = -sign;
        sum -= sign * std::exp(log_rg - k * log_abs_z);
    }
    if (z > 0.0) {
        const long double zs = std::pow(static_cast<long double>(z), 1.0L / alpha);
        sum += std::pow(static_cast<long double>(z), (1.0L - beta) / alpha) * std::exp(zs) / alpha;
    }
    return static_cast<double>(sum);
}

} // namespace detail

double ml_scalar(const MLParams& p, double z) {
    if (!in_supported_box(p)) {
        throw DomainError("Mittag-Leffler parameters outside the supported box " + params_str(p));
    }
    if (!(std::abs(z) <= kMaxArgument)) {
        throw DomainError("Mittag-Leffler argument |z| must be at most 1e8, got " + std::to_string(z));
    }
    if (p.alpha == 1.0) return checked(ml_alpha_one(p, z), p, z);
    if (p.alpha == 2.0) return checked(ml_alpha_two(p, z), p, z);
    if (std::abs(z) <= ml_switch_point(p.alpha)) return checked(detail::ml_taylor(p, z), p, z);
    return checked(detail::ml_asymptotic(p, z), p, z);
}

double ml_survival(double alpha, double d, double t) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("ml_survival: alpha must lie in (0, 1]");
    if (!(d <= 0.0)) throw DomainError("ml_survival: rate coefficient d must be <= 0");
    if (!(t >= 0.0)) throw DomainError("ml_survival: t must be >= 0");
    if (t == 0.0 || d == 0.0) return 1.0;
    const double v = ml_scalar({alpha, 1.0}, d * std::pow(t, alpha));
    return std::clamp(v, 0.0, 1.0);
}

double ml_density(double alpha, double d, double s) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("ml_density: alpha must lie in (0, 1]");
    if (!(d <= 0.0)) throw DomainError("ml_density: rate coefficient d must be <= 0");
    if (!(s > 0.0)) throw DomainError("ml_density: s must be > 0");
    return -d * std::pow(s, alpha - 1.0) * ml_scalar({alpha, alpha}, d * std::pow(s, alpha));
}

double fractional_poisson_mean(double rate, double alpha, double t) {
    if (!(rate > 0.0)) throw DomainError("fractional_poisson_mean: rate must be > 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("fractional_poisson_mean: alpha must lie in (0, 1]");
    if (!(t >= 0.0)) throw DomainError("fractional_poisson_mean: t must be >= 0");
    return rate * std::pow(t, alpha) / gamma_fn(alpha + 1.0);
}

} // namespace mlmc
