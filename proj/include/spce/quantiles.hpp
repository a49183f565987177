#pragma once

#include <span>
#include <vector>

namespace spce {

// Quantile function sampled on a strictly increasing u-grid in (0, 1).
struct QuantileGrid {
    std::vector<double> u;
    std::vector<double> values;

    // Throws ValidationError unless u is strictly increasing inside (0, 1),
    // values is nondecreasing and both have the same nonzero length.
    void validate() const;
};

inline constexpr double kQuantileClip = 1e-4;

// n equally spaced levels covering [kQuantileClip, 1 - kQuantileClip].
std::vector<double> clipped_u_grid(std::size_t n);

// Order statistics placed at (k - 0.5)/n, linearly interpolated; levels
// outside [0.5/n, 1 - 0.5/n] take the extreme order statistic.
QuantileGrid empirical_quantiles(std::vector<double> samples, std::span<const double> u);

// Piecewise-linear interpolation of a quantile grid onto new levels,
// constant beyond the end points.
QuantileGrid resample(const QuantileGrid& grid, std::span<const double> u);

}  // namespace spce
