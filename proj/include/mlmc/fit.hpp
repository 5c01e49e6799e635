#pragma once

#include <span>

namespace mlmc {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept. Needs >= 2 distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// linear_fit on (ln x, ln y); every value must be > 0.
LinearFit loglog_fit(std::span<const double> x, std::span<const double> y);

} // namespace mlmc
