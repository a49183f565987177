#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spce/dataset.hpp"
#include "spce/marginal.hpp"
#include "spce/quantiles.hpp"
#include "spce/rng.hpp"

namespace spce {

// Latin hypercube: one point per equal-probability stratum in every column,
// strata randomly permuted per column, mapped through the inverse CDFs.
Eigen::MatrixXd lhs_design(std::size_t n, const std::vector<Marginal>& marginals, std::uint64_t seed);

// Terminal value of geometric Brownian motion at T = 1: LN(x1 - x2^2/2, x2).
double gbm_draw(double x1, double x2, Rng& rng);
double gbm_draw(double x1, double x2, std::uint64_t seed);

struct SirState {
    long S = 0;
    long I = 0;
    long R = 0;
    double t = 0.0;
    long P = 0;
};

// Gillespie simulation of the SIR epidemic until no infected remain.
// Returns the number of new infections S0 - S_T. `final_state`, when
// given, receives the terminal state; `events`, when given, the number of
// transitions. Each step checks S + I + R = P.
long sir_run(long S0, long I0, double beta, double gamma, long P, Rng& rng, SirState* final_state = nullptr,
             long* events = nullptr);
long sir_run(long S0, long I0, double beta, double gamma, long P, std::uint64_t seed);

inline constexpr long kSirPopulation = 2000;

// Two-component Gaussian mixture with x-dependent component means.
double bimodal_draw(double x, Rng& rng);
double bimodal_draw(double x, std::uint64_t seed);
double bimodal_pdf(double x, double y);
double bimodal_cdf(double x, double y);

enum class SimulatorId { gbm, sir, bimodal };
SimulatorId simulator_from_string(const std::string& name);
std::string to_string(SimulatorId id);

class Simulator {
public:
    virtual ~Simulator() = default;
    virtual SimulatorId id() const noexcept = 0;
    virtual std::vector<Marginal> marginals() const = 0;
    virtual double draw(std::span<const double> x, Rng& rng) const = 0;
    // Whether conditional mean/variance and quantiles are known exactly.
    virtual bool analytic() const noexcept = 0;
    // Conditional moments; for non-analytic simulators these are estimated
    // from `replications` seeded runs.
    virtual double mean(std::span<const double> x, std::size_t replications, std::uint64_t seed) const = 0;
    virtual double variance(std::span<const double> x, std::size_t replications, std::uint64_t seed) const = 0;
    // Analytic quantiles where available, else empirical quantiles of
    // `replications` seeded runs.
    virtual QuantileGrid reference_quantiles(std::span<const double> x, std::span<const double> u,
                                             std::size_t replications, std::uint64_t seed) const = 0;
    // Var(Y) over the default input distribution. Exact (by quadrature)
    // for analytic simulators, else Monte Carlo with `draws` samples.
    virtual double output_variance(std::size_t draws, std::uint64_t seed) const = 0;

    // Fresh LHS design of size n with one simulator run per point.
    Dataset generate(std::size_t n, std::uint64_t seed) const;
};

std::unique_ptr<Simulator> make_simulator(SimulatorId id);

QuantileGrid reference_quantiles(SimulatorId id, std::span<const double> x, std::span<const double> u,
                                 std::size_t replications = 10000, std::uint64_t seed = 0);

}  // namespace spce
