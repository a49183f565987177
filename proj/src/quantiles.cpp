#include "spce/quantiles.hpp"

#include <algorithm>
#include <cmath>

#include "spce/errors.hpp"

namespace spce {

namespace {

double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto i = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

void check_levels(std::span<const double> u) {
    if (u.empty()) throw ValidationError("quantile levels must not be empty");
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] > 0.0 && u[i] < 1.0)) throw ValidationError("quantile levels must lie in (0, 1)");
        if (i > 0 && !(u[i] > u[i - 1])) throw ValidationError("quantile levels must be strictly increasing");
    }
}

}  // namespace

void QuantileGrid::validate() const {
    check_levels(u);
    if (values.size() != u.size()) throw ValidationError("quantile grid arrays differ in length");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) throw ValidationError("quantile value is NaN");
        if (i > 0 && values[i] < values[i - 1]) throw ValidationError("quantile values must be nondecreasing");
    }
}

std::vector<double> clipped_u_grid(std::size_t n) {
    if (n < 2) throw ValidationError("u-grid needs at least 2 levels");
    std::vector<double> u(n);
    const double lo = kQuantileClip;
    const double hi = 1.0 - kQuantileClip;
    for (std::size_t i = 0; i < n; ++i)
        u[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return u;
}

QuantileGrid empirical_quantiles(std::vector<double> samples, std::span<const double> u) {
    if (samples.empty()) throw ValidationError("empirical quantiles need at least one sample");
    check_levels(u);
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    std::vector<double> levels(n);
    for (std::size_t k = 0; k < n; ++k) levels[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    QuantileGrid g;
    g.u.assign(u.begin(), u.end());
    g.values.reserve(u.size());
    for (double v : u) g.values.push_back(interpolate(levels, samples, v));
    return g;
}

QuantileGrid resample(const QuantileGrid& grid, std::span<const double> u) {
    grid.validate();
    check_levels(u);
    QuantileGrid g;
    g.u.assign(u.begin(), u.end());
    g.values.reserve(u.size());
    for (double v : u) g.values.push_back(interpolate(grid.u, grid.values, v));
    return g;
}

}  // namespace spce
