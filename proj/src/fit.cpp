#include "mlmc/fit.hpp"

#include "mlmc/errors.hpp"

#include <cmath>
#include <vector>

namespace mlmc {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("fit: x and y differ in length");
    if (x.size() < 2) throw ValidationError("fit needs at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ValidationError("fit needs at least two distinct x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
    return f;
}

LinearFit loglog_fit(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size());
    std::vector<double> ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw DomainError("log-log fit needs positive x");
        lx[i] = std::log(x[i]);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) throw DomainError("log-log fit needs positive y");
        ly[i] = std::log(y[i]);
    }
    return linear_fit(lx, ly);
}

} // namespace mlmc
