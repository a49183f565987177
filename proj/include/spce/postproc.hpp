#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spce/model.hpp"
#include "spce/quantiles.hpp"

namespace spce {

// Draws of the surrogate response at x: sum_a c_a psi_a(x, z) + eps with
// z from the latent distribution and eps ~ N(0, sigma^2).
std::vector<double> sample_conditional(const SpceModel& model, std::span<const double> x, std::size_t n,
                                       std::uint64_t seed);
// As above with x drawn from the input marginals for every draw.
std::vector<double> sample_unconditional(const SpceModel& model, std::size_t n, std::uint64_t seed);

double mean_function(const SpceModel& model, std::span<const double> x);
// Exact conditional variance sum_{k>=1} b_k(x)^2 + sigma^2, where b_k(x)
// collects all coefficients of latent degree k.
double variance_function(const SpceModel& model, std::span<const double> x);

double unconditional_mean(const SpceModel& model);
double unconditional_variance(const SpceModel& model);

using InputSubset = std::vector<int>;  // 0-based input numbers, ascending

struct SobolFamily {
    std::vector<double> first_order;
    std::vector<double> total;
    std::map<InputSubset, double> higher_order;
    double variance = 0.0;     // denominator
    bool degenerate = false;   // zero denominator; all indices reported as 0
};

struct SobolReport {
    SobolFamily classical;      // variance of the full surrogate, noise included
    double latent_share = 0.0;  // terms with nonzero latent degree
    double noise_share = 0.0;   // sigma^2 / variance
    SobolFamily mean_function;  // restricted to the zero-latent-degree terms
};

// Closed-form indices from the coefficients. `subsets` chooses the entries
// of higher_order; when empty every input subset of size >= 2 that carries
// a mean-part coefficient is listed.
SobolReport sobol_indices(const SpceModel& model, const std::vector<InputSubset>& subsets = {});
nlohmann::json sobol_to_json(const SobolReport& report);
// Long format: family,kind,subset,value with 1-based subsets joined by ';'.
std::string sobol_to_csv(const SobolReport& report);

struct ConditionalDensity {
    std::vector<double> values;
    double mass = 0.0;     // trapezoid integral over the grid
    bool covered = false;  // mass >= 0.99
};

// Density of the surrogate response at x on y_grid (ascending). The latent
// integral uses composite Gauss-Legendre panels fine enough to resolve
// Gaussians of width sigma.
ConditionalDensity conditional_pdf(const SpceModel& model, std::span<const double> x,
                                   std::span<const double> y_grid);

// Squared Wasserstein-2 distance: trapezoid rule of (Qa - Qb)^2 over the
// u-grid of a; b is resampled onto it when the grids differ.
double wasserstein2(const QuantileGrid& a, const QuantileGrid& b);

using QuantileProvider = std::function<QuantileGrid(std::span<const double> x, std::span<const double> u)>;

struct ErrorOptions {
    std::size_t n_samples = 10000;  // surrogate draws per test point
    std::size_t n_u = 1000;         // levels of the clipped u-grid
    std::uint64_t seed = 0;
};

struct ErrorResult {
    double epsilon = 0.0;
    std::vector<double> d2;      // per test point, NaN where the reference failed
    std::size_t failed = 0;
    double coverage = 1.0;       // fraction of test points evaluated
};

// Mean over test points of d2_WS(surrogate, reference) divided by var_y.
ErrorResult error_metric(const SpceModel& model, const QuantileProvider& reference, const Eigen::MatrixXd& test_x,
                         double var_y, const ErrorOptions& options = {});

// Same metric for an arbitrary emulator given by its own quantile provider.
ErrorResult error_metric(const QuantileProvider& emulator, const QuantileProvider& reference,
                         const Eigen::MatrixXd& test_x, double var_y, std::size_t n_u = 1000);

// Gaussian emulator with the true conditional mean and variance.
ErrorResult oracle_normal_error(const std::function<double(std::span<const double>)>& mean,
                                const std::function<double(std::span<const double>)>& variance,
                                const QuantileProvider& reference, const Eigen::MatrixXd& test_x, double var_y,
                                std::size_t n_u = 1000);

}  // namespace spce
