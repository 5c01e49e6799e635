#pragma once

namespace mlmc {

/// Parameters of the two-parameter Mittag-Leffler function E_{alpha,beta}.
struct MLParams {
    double alpha = 1.0;
    double beta = 1.0;
};

/// Euler Gamma function. Throws DomainError at the poles (non-positive
/// integers) and where the result overflows a double.
double gamma_fn(double x);

/// E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta) for real z, |z| <= 1e8.
///
/// Supported box: alpha in (0, 1] or alpha == 2, and beta in
/// {1, alpha, 1 + alpha, 2 alpha}. Anything else throws DomainError rather
/// than returning an inaccurate value. Relative accuracy is about 1e-10 or
/// better across the box.
///
/// For 0 < alpha < 1 the Taylor series is summed in binary128 with Neumaier
/// compensation while |z| <= ml_switch_point(alpha); beyond that the
/// asymptotic expansion is used, truncated at its smallest term. alpha == 1
/// and alpha == 2 use closed forms (exp, cos/cosh and relatives).
double ml_scalar(const MLParams& p, double z);

/// |z| at which ml_scalar changes branch for 0 < alpha < 1.
double ml_switch_point(double alpha);

/// P(T > t) for a Mittag-Leffler waiting time with rate |d|:
/// E_alpha(d t^alpha), clamped into [0, 1]. Exactly 1 at t == 0 or d == 0.
double ml_survival(double alpha, double d, double t);

/// Mittag-Leffler waiting-time density -d s^(alpha-1) E_{alpha,alpha}(d s^alpha), s > 0.
double ml_density(double alpha, double d, double s);

/// Mean number of events of a fractional Poisson process: rate t^alpha / Gamma(alpha + 1).
double fractional_poisson_mean(double rate, double alpha, double t);

namespace detail {

/// Compensated binary128 Taylor sum; valid for any alpha > 0, beta > 0 while
/// the largest term stays below ~1e20 times the result.
double ml_taylor(const MLParams& p, double z);

/// Algebraic asymptotic expansion -sum_{k>=1} z^(-k) / Gamma(beta - alpha k)
/// truncated at its smallest term, plus the exponential part for z > 0.
/// Requires 0 < alpha < 1 and |z| large.
double ml_asymptotic(const MLParams& p, double z);

} // namespace detail

} // namespace mlmc
