#include "spce/simulators.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "spce/errors.hpp"

namespace spce {

Eigen::MatrixXd lhs_design(std::size_t n, const std::vector<Marginal>& marginals, std::uint64_t seed) {
    if (n < 1) throw ValidationError("design size must be at least 1");
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto m = marginals.size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < m; ++j) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
            // Keep u strictly inside (0, 1) so unbounded marginals stay finite.
            double u = (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(n);
            u = std::clamp(u, 1e-12, 1.0 - 1e-12);
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = marginals[j].inverse_cdf(u);
        }
    }
    return x;
}

double gbm_draw(double x1, double x2, Rng& rng) {
    if (!(x2 > 0.0)) throw DomainError("volatility must be positive");
    std::normal_distribution<double> n01;
    return std::exp(x1 - 0.5 * x2 * x2 + x2 * n01(rng));
}

double gbm_draw(double x1, double x2, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return gbm_draw(x1, x2, rng);
}

long sir_run(long S0, long I0, double beta, double gamma, long P, Rng& rng, SirState* final_state, long* events) {
    if (S0 < 0 || I0 < 0 || P < 0 || S0 + I0 > P) throw DomainError("SIR requires 0 <= S0, I0 and S0 + I0 <= P");
    if (!(beta >= 0.0) || !(gamma >= 0.0)) throw DomainError("SIR rates must be nonnegative");
    SirState s{S0, I0, P - S0 - I0, 0.0, P};
    long count = 0;
    const double inf = std::numeric_limits<double>::infinity();
    auto exp_time = [&](double rate) {
        if (rate <= 0.0) return inf;
        return std::exponential_distribution<double>(rate)(rng);
    };
    while (s.I > 0) {
        const double lambda_i = P > 0 ? beta * static_cast<double>(s.S) * static_cast<double>(s.I) / static_cast<double>(P) : 0.0;
        const double lambda_r = gamma * static_cast<double>(s.I);
        const double t_i = exp_time(lambda_i);
        const double t_r = exp_time(lambda_r);
        if (t_i == inf && t_r == inf) break;  // gamma = 0 and no susceptibles left
        if (t_i < t_r) {
            --s.S;
            ++s.I;
            s.t += t_i;
        } else {
            --s.I;
            ++s.R;
            s.t += t_r;
        }
        ++count;
        if (s.S + s.I + s.R != P) throw NumericalError("SIR population not conserved");
    }
    if (final_state) *final_state = s;
    if (events) *events = count;
    return S0 - s.S;
}

long sir_run(long S0, long I0, double beta, double gamma, long P, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return sir_run(S0, I0, beta, gamma, P, rng);
}

namespace {

constexpr double kBimodalScale = 1.25;
constexpr double kBimodalWeight1 = 0.4;

double bimodal_m1(double x) {
    const double s = std::sin(std::numbers::pi * x);
    return 5.0 * s * s + 5.0 * x - 2.5;
}

double bimodal_m2(double x) {
    const double s = std::sin(std::numbers::pi * x);
    return 5.0 * s * s - 5.0 * x + 2.5;
}

void check_unit(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("bimodal input must lie in [0, 1]");
}

}  // namespace

double bimodal_draw(double x, Rng& rng) {
    check_unit(x);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> n01;
    const double m = unif(rng) < kBimodalWeight1 ? bimodal_m1(x) : bimodal_m2(x);
    return (m + n01(rng)) / kBimodalScale;
}

double bimodal_draw(double x, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return bimodal_draw(x, rng);
}

double bimodal_pdf(double x, double y) {
    check_unit(x);
    return 0.5 * std_normal_pdf(kBimodalScale * y - bimodal_m1(x)) +
           0.75 * std_normal_pdf(kBimodalScale * y - bimodal_m2(x));
}

double bimodal_cdf(double x, double y) {
    check_unit(x);
    return kBimodalWeight1 * std_normal_cdf(kBimodalScale * y - bimodal_m1(x)) +
           (1.0 - kBimodalWeight1) * std_normal_cdf(kBimodalScale * y - bimodal_m2(x));
}

SimulatorId simulator_from_string(const std::string& name) {
    if (name == "gbm") return SimulatorId::gbm;
    if (name == "sir") return SimulatorId::sir;
    if (name == "bimodal") return SimulatorId::bimodal;
    throw ConfigError("unknown simulator '" + name + "' (expected gbm, sir or bimodal)");
}

std::string to_string(SimulatorId id) {
    switch (id) {
        case SimulatorId::gbm: return "gbm";
        case SimulatorId::sir: return "sir";
        case SimulatorId::bimodal: return "bimodal";
    }
    return "unknown";
}

Dataset Simulator::generate(std::size_t n, std::uint64_t seed) const {
    Dataset d;
    d.marginals = marginals();
    d.inputs = lhs_design(n, d.marginals, derive_seed(seed, {0}));
    d.outputs.resize(static_cast<Eigen::Index>(n));
    std::vector<double> row(d.marginals.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < row.size(); ++j)
            row[j] = d.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        Rng rng = make_rng(derive_seed(seed, {1, i}));
        d.outputs[static_cast<Eigen::Index>(i)] = draw(row, rng);
    }
    d.seed = seed;
    d.source = to_string(id());
    return d;
}

namespace {

void check_dim(std::span<const double> x, std::size_t m) {
    if (x.size() != m) throw ShapeError("input point has " + std::to_string(x.size()) + " entries, expected " + std::to_string(m));
}

std::vector<double> replicate(const Simulator& sim, std::span<const double> x, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw ValidationError("at least 2 replications are needed");
    std::vector<double> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        Rng rng = make_rng(derive_seed(seed, {r}));
        out[r] = sim.draw(x, rng);
    }
    return out;
}

double sample_mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sample_variance(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double a : v) s += (a - m) * (a - m);
    return s / static_cast<double>(v.size() - 1);
}

class Gbm final : public Simulator {
public:
    SimulatorId id() const noexcept override { return SimulatorId::gbm; }
    std::vector<Marginal> marginals() const override { return {Marginal::uniform(0.0, 0.1), Marginal::uniform(0.1, 0.4)}; }
    double draw(std::span<const double> x, Rng& rng) const override {
        check_dim(x, 2);
        return gbm_draw(x[0], x[1], rng);
    }
    bool analytic() const noexcept override { return true; }
    double mean(std::span<const double> x, std::size_t, std::uint64_t) const override {
        check_dim(x, 2);
        return std::exp(x[0]);
    }
    double variance(std::span<const double> x, std::size_t, std::uint64_t) const override {
        check_dim(x, 2);
        return std::exp(2.0 * x[0]) * std::expm1(x[1] * x[1]);
    }
    QuantileGrid reference_quantiles(std::span<const double> x, std::span<const double> u, std::size_t,
                                     std::uint64_t) const override {
        check_dim(x, 2);
        if (!(x[1] > 0.0)) throw DomainError("volatility must be positive");
        QuantileGrid g;
        g.u.assign(u.begin(), u.end());
        for (double v : u) g.values.push_back(std::exp(x[0] - 0.5 * x[1] * x[1] + x[1] * std_normal_quantile(v)));
        g.validate();
        return g;
    }
    double output_variance(std::size_t, std::uint64_t) const override {
        // Independent uniform inputs: E[Y^2] = E[e^{2 X1}] E[e^{X2^2}].
        const double e1 = std::expm1(0.1) / 0.1;
        const double e2 = std::expm1(0.2) / 0.2;
        const double ex2 =
            boost::math::quadrature::gauss<double, 20>::integrate([](double t) { return std::exp(t * t); }, 0.1, 0.4) / 0.3;
        return e2 * ex2 - e1 * e1;
    }
};

class Sir final : public Simulator {
public:
    SimulatorId id() const noexcept override { return SimulatorId::sir; }
    std::vector<Marginal> marginals() const override {
        return {Marginal::uniform(1200.0, 1800.0), Marginal::uniform(20.0, 200.0), Marginal::uniform(0.5, 0.75),
                Marginal::uniform(0.5, 0.75)};
    }
    double draw(std::span<const double> x, Rng& rng) const override {
        check_dim(x, 4);
        const long s0 = std::lround(x[0]);
        const long i0 = std::lround(x[1]);
        return static_cast<double>(sir_run(s0, i0, x[2], x[3], kSirPopulation, rng));
    }
    bool analytic() const noexcept override { return false; }
    double mean(std::span<const double> x, std::size_t reps, std::uint64_t seed) const override {
        return sample_mean(replicate(*this, x, reps, seed));
    }
    double variance(std::span<const double> x, std::size_t reps, std::uint64_t seed) const override {
        return sample_variance(replicate(*this, x, reps, seed));
    }
    QuantileGrid reference_quantiles(std::span<const double> x, std::span<const double> u, std::size_t reps,
                                     std::uint64_t seed) const override {
        return empirical_quantiles(replicate(*this, x, reps, seed), u);
    }
    double output_variance(std::size_t draws, std::uint64_t seed) const override {
        const Dataset d = generate(draws, seed);
        std::vector<double> y(d.outputs.data(), d.outputs.data() + d.outputs.size());
        return sample_variance(y);
    }
};

class Bimodal final : public Simulator {
public:
    SimulatorId id() const noexcept override { return SimulatorId::bimodal; }
    std::vector<Marginal> marginals() const override { return {Marginal::uniform(0.0, 1.0)}; }
    double draw(std::span<const double> x, Rng& rng) const override {
        check_dim(x, 1);
        return bimodal_draw(x[0], rng);
    }
    bool analytic() const noexcept override { return true; }
    double mean(std::span<const double> x, std::size_t, std::uint64_t) const override {
        check_dim(x, 1);
        check_unit(x[0]);
        return mean_at(x[0]);
    }
    double variance(std::span<const double> x, std::size_t, std::uint64_t) const override {
        check_dim(x, 1);
        check_unit(x[0]);
        const double m = mean_at(x[0]);
        return second_moment_at(x[0]) - m * m;
    }
    QuantileGrid reference_quantiles(std::span<const double> x, std::span<const double> u, std::size_t,
                                     std::uint64_t) const override {
        check_dim(x, 1);
        const double xv = x[0];
        check_unit(xv);
        const double lo0 = std::min(bimodal_m1(xv), bimodal_m2(xv)) / kBimodalScale;
        const double hi0 = std::max(bimodal_m1(xv), bimodal_m2(xv)) / kBimodalScale;
        QuantileGrid g;
        g.u.assign(u.begin(), u.end());
        for (double v : u) {
            if (!(v > 0.0 && v < 1.0)) throw ValidationError("quantile levels must lie in (0, 1)");
            double lo = lo0 - 1.0;
            double hi = hi0 + 1.0;
            while (bimodal_cdf(xv, lo) > v) lo -= 2.0;
            while (bimodal_cdf(xv, hi) < v) hi += 2.0;
            std::uintmax_t iters = 200;
            const auto r = boost::math::tools::toms748_solve([&](double y) { return bimodal_cdf(xv, y) - v; }, lo, hi,
                                                             boost::math::tools::eps_tolerance<double>(52), iters);
            g.values.push_back(0.5 * (r.first + r.second));
        }
        g.validate();
        return g;
    }
    double output_variance(std::size_t, std::uint64_t) const override {
        using boost::math::quadrature::gauss_kronrod;
        const double m1 = gauss_kronrod<double, 61>::integrate([](double x) { return mean_at(x); }, 0.0, 1.0, 15, 1e-12);
        const double m2 = gauss_kronrod<double, 61>::integrate([](double x) { return second_moment_at(x); }, 0.0, 1.0, 15, 1e-12);
        return m2 - m1 * m1;
    }

private:
    static double mean_at(double x) {
        return (kBimodalWeight1 * bimodal_m1(x) + (1.0 - kBimodalWeight1) * bimodal_m2(x)) / kBimodalScale;
    }
    static double second_moment_at(double x) {
        const double a = bimodal_m1(x);
        const double b = bimodal_m2(x);
        return (kBimodalWeight1 * (a * a + 1.0) + (1.0 - kBimodalWeight1) * (b * b + 1.0)) / (kBimodalScale * kBimodalScale);
    }
};

}  // namespace

std::unique_ptr<Simulator> make_simulator(SimulatorId id) {
    switch (id) {
        case SimulatorId::gbm: return std::make_unique<Gbm>();
        case SimulatorId::sir: return std::make_unique<Sir>();
        case SimulatorId::bimodal: return std::make_unique<Bimodal>();
    }
    throw ConfigError("unknown simulator id");
}

QuantileGrid reference_quantiles(SimulatorId id, std::span<const double> x, std::span<const double> u,
                                 std::size_t replications, std::uint64_t seed) {
    return make_simulator(id)->reference_quantiles(x, u, replications, seed);
}

}  // namespace spce
