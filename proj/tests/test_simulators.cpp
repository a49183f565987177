#include "doctest.h"

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "spce/errors.hpp"
#include "spce/simulators.hpp"

using namespace spce;
using namespace spce::testing;

namespace {

double normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2 * M_PI); }
double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

// Mixture density written directly from its defining formula.
double mixture_pdf(double x, double y) {
    const double s = std::sin(M_PI * x);
    const double m1 = 5 * s * s + 5 * x - 2.5, m2 = 5 * s * s - 5 * x + 2.5;
    return 0.5 * normal_pdf(1.25 * y - m1) + 0.75 * normal_pdf(1.25 * y - m2);
}

double mixture_cdf(double x, double y) {
    const double s = std::sin(M_PI * x);
    const double m1 = 5 * s * s + 5 * x - 2.5, m2 = 5 * s * s - 5 * x + 2.5;
    return 0.4 * normal_cdf(1.25 * y - m1) + 0.6 * normal_cdf(1.25 * y - m2);
}

template <class Cdf>
double ks_distance(std::vector<double> draws, Cdf cdf) {
    std::sort(draws.begin(), draws.end());
    const double n = static_cast<double>(draws.size());
    double sup = 0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double f = cdf(draws[i]);
        sup = std::max({sup, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return sup;
}

}  // namespace

TEST_CASE("LHS: one point per stratum in every column") {
    const std::vector<Marginal> ms = {Marginal::uniform(0, 1), Marginal::normal(2, 3), Marginal::uniform(-5, 5)};
    for (std::size_t n : {1u, 7u, 250u}) {
        const Eigen::MatrixXd x = lhs_design(n, ms, 13);
        REQUIRE(x.rows() == static_cast<Eigen::Index>(n));
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            std::vector<int> hits(n, 0);
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                const double u = ms[static_cast<std::size_t>(k)].cdf(x(i, k));
                REQUIRE(u > 0.0);
                REQUIRE(u < 1.0);
                ++hits[static_cast<std::size_t>(u * static_cast<double>(n))];
            }
            CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
        }
    }
    CHECK(lhs_design(20, ms, 5) == lhs_design(20, ms, 5));
    CHECK(lhs_design(20, ms, 5) != lhs_design(20, ms, 6));

    const Eigen::MatrixXd u = lhs_design(1000, {Marginal::uniform(0, 1), Marginal::uniform(0, 1)}, 3);
    CHECK(std::abs(u.col(0).mean() - 0.5) < 0.01);
    CHECK(std::abs(u.col(1).mean() - 0.5) < 0.01);
}

TEST_CASE("GBM draws") {
    CHECK(gbm_draw(0.07, 1e-9, 3) == doctest::Approx(std::exp(0.07)).epsilon(1e-7));
    CHECK_THROWS_AS(gbm_draw(0.05, 0.0, 1), DomainError);
    CHECK_THROWS_AS(gbm_draw(0.05, -0.1, 1), DomainError);
    CHECK(gbm_draw(0.05, 0.2, 9) == gbm_draw(0.05, 0.2, 9));

    Rng rng = make_rng(1);
    std::vector<double> ys(1000000), logs(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        ys[i] = gbm_draw(0.1, 0.2, rng);
        logs[i] = std::log(ys[i]);
    }
    CHECK(std::abs(mean_of(ys) - std::exp(0.1)) < 0.001);
    const double lm = mean_of(logs), lv = var_of(logs);
    double m3 = 0;
    for (double v : logs) m3 += std::pow(v - lm, 3);
    CHECK(std::abs(m3 / static_cast<double>(logs.size()) / std::pow(lv, 1.5)) < 0.01);
    boost::math::lognormal_distribution<double> ln(0.1 - 0.02, 0.2);
    CHECK(ks_distance(ys, [&](double y) { return boost::math::cdf(ln, y); }) < 0.002);
}

TEST_CASE("GBM simulator moments, quantiles and output variance") {
    const auto sim = make_simulator(SimulatorId::gbm);
    CHECK(sim->analytic());
    const double x[2] = {0.04, 0.3};
    CHECK(sim->mean(x, 0, 0) == doctest::Approx(std::exp(0.04)));
    CHECK(sim->variance(x, 0, 0) == doctest::Approx(std::exp(0.08) * std::expm1(0.09)));
    const std::vector<double> u = {0.1, 0.5, 0.9};
    const auto q = sim->reference_quantiles(x, u, 0, 0);
    CHECK(q.values[1] == doctest::Approx(std::exp(0.04 - 0.045)).epsilon(1e-14));
    CHECK(q.values[0] < q.values[1]);

    // Var(Y) against Monte Carlo over the input box.
    Rng rng = make_rng(4);
    const auto ms = sim->marginals();
    std::vector<double> ys(1000000);
    for (auto& y : ys) {
        const double x1 = ms[0].sample(rng), x2 = ms[1].sample(rng);
        y = gbm_draw(x1, x2, rng);
    }
    const double v = var_of(ys), mu = mean_of(ys);
    double m4 = 0;
    for (double y : ys) m4 += std::pow(y - mu, 4);
    m4 /= static_cast<double>(ys.size());
    CHECK(std::abs(sim->output_variance(0, 0) - v) < 3 * std::sqrt((m4 - v * v) / static_cast<double>(ys.size())));
}

TEST_CASE("SIR trivial cases and argument checks") {
    Rng rng = make_rng(1);
    SirState st;
    long events = -1;
    CHECK(sir_run(1500, 0, 0.6, 0.7, 2000, rng, &st, &events) == 0);
    CHECK(events == 0);
    CHECK(st.S + st.I + st.R == 2000);
    CHECK(sir_run(1500, 60, 0.0, 0.7, 2000, rng, &st, &events) == 0);
    CHECK(events == 60);
    CHECK(st.R == 440 + 60);
    CHECK_THROWS_AS(sir_run(1950, 60, 0.6, 0.7, 2000, 1), DomainError);
    CHECK_THROWS_AS(sir_run(1500, 60, -0.1, 0.7, 2000, 1), DomainError);
    CHECK_THROWS_AS(sir_run(-1, 60, 0.6, 0.7, 2000, 1), DomainError);
    // gamma = 0 with no susceptibles left: both channels are disabled.
    CHECK(sir_run(0, 10, 0.6, 0.0, 2000, rng, &st, &events) == 0);
    CHECK(st.I == 10);
    CHECK(events == 0);
}

TEST_CASE("SIR terminal state, event bound and reproducibility") {
    const auto sim = make_simulator(SimulatorId::sir);
    const auto d = sim->generate(200, 8);
    for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
        Rng rng = make_rng(static_cast<std::uint64_t>(i));
        SirState st;
        long events = 0;
        const long s0 = std::lround(d.inputs(i, 0)), i0 = std::lround(d.inputs(i, 1));
        const long y = sir_run(s0, i0, d.inputs(i, 2), d.inputs(i, 3), kSirPopulation, rng, &st, &events);
        CHECK(st.I == 0);
        CHECK(st.S + st.R == kSirPopulation);
        CHECK(y == s0 - st.S);
        CHECK(events == 2 * y + i0);
        CHECK(events <= 2 * kSirPopulation);
        CHECK(st.t > 0.0);
    }
    CHECK(sir_run(1500, 60, 0.6, 0.7, 2000, 5) == sir_run(1500, 60, 0.6, 0.7, 2000, 5));
}

TEST_CASE("SIR replication mean at a fixed point") {
    const auto sim = make_simulator(SimulatorId::sir);
    const double x[4] = {1500, 60, 0.6, 0.7};
    const double mean = sim->mean(x, 10000, 2024);
    // Frozen after the first run with this seed.
    CHECK(mean == doctest::Approx(97.4915).epsilon(1e-12));
    // Subcritical branching estimate I0 R0 / (1 - R0) ignores depletion and
    // so sits a little above.
    const double r0 = 0.6 * 1500 / (0.7 * 2000);
    CHECK(mean < 60 * r0 / (1 - r0));
    CHECK(mean > 0.8 * 60 * r0 / (1 - r0));

    const auto u = clipped_u_grid(50);
    const auto q = sim->reference_quantiles(x, u, 1000, 3);
    CHECK_NOTHROW(q.validate());
    for (std::size_t k = 1; k < q.values.size(); ++k) CHECK(q.values[k] >= q.values[k - 1]);
}

TEST_CASE("bimodal density, draws and quantiles") {
    for (double x : {0.0, 0.2, 0.5, 0.73, 0.9, 1.0}) {
        CHECK(bimodal_pdf(x, 1.3) == doctest::Approx(mixture_pdf(x, 1.3)).epsilon(1e-14));
        const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [x](double y) { return bimodal_pdf(x, y); }, -10.0, 15.0, 15, 1e-13);
        CHECK(std::abs(mass - 1.0) < 1e-6);
        CHECK(bimodal_cdf(x, 0.7) == doctest::Approx(mixture_cdf(x, 0.7)).epsilon(1e-13));
    }
    for (double x : {0.2, 0.5, 0.9}) {
        Rng rng = make_rng(static_cast<std::uint64_t>(100 * x));
        std::vector<double> ys(1000000);
        for (auto& y : ys) y = bimodal_draw(x, rng);
        CHECK(ks_distance(ys, [x](double y) { return mixture_cdf(x, y); }) < 0.002);
    }

    const auto sim = make_simulator(SimulatorId::bimodal);
    const double half[1] = {0.5};
    const std::vector<double> mid = {0.5};
    CHECK(std::abs(sim->reference_quantiles(half, mid, 0, 0).values[0] - 4.0) < 1e-6);
    // Unimodal at x = 0.5 with the peak at y = 4.
    for (double dy : {0.05, 0.5, 1.5}) {
        CHECK(bimodal_pdf(0.5, 4.0) > bimodal_pdf(0.5, 4.0 + dy));
        CHECK(bimodal_pdf(0.5, 4.0) > bimodal_pdf(0.5, 4.0 - dy));
    }

    const double x[1] = {0.3};
    const double s = std::sin(M_PI * 0.3);
    const double m1 = 5 * s * s + 1.5 - 2.5, m2 = 5 * s * s - 1.5 + 2.5;
    CHECK(sim->mean(x, 0, 0) == doctest::Approx((0.4 * m1 + 0.6 * m2) / 1.25));
    CHECK(sim->variance(x, 0, 0) == doctest::Approx((1 + 0.24 * (m1 - m2) * (m1 - m2)) / 1.5625));
    const auto u = clipped_u_grid(200);
    const auto q = sim->reference_quantiles(x, u, 0, 0);
    for (std::size_t k = 0; k < u.size(); k += 17) CHECK(mixture_cdf(0.3, q.values[k]) == doctest::Approx(u[k]).epsilon(1e-10));

    Rng rng = make_rng(6);
    std::vector<double> ys(1000000);
    for (auto& y : ys) y = bimodal_draw(std::uniform_real_distribution<double>(0, 1)(rng), rng);
    const double v = var_of(ys), mu = mean_of(ys);
    double m4 = 0;
    for (double y : ys) m4 += std::pow(y - mu, 4);
    m4 /= static_cast<double>(ys.size());
    CHECK(std::abs(sim->output_variance(0, 0) - v) < 3 * std::sqrt((m4 - v * v) / static_cast<double>(ys.size())));
}

TEST_CASE("simulator registry and generated datasets") {
    for (SimulatorId id : {SimulatorId::gbm, SimulatorId::sir, SimulatorId::bimodal}) {
        CHECK(simulator_from_string(to_string(id)) == id);
        const auto sim = make_simulator(id);
        const Dataset a = sim->generate(30, 12), b = sim->generate(30, 12);
        CHECK(a.inputs == b.inputs);
        CHECK(a.outputs == b.outputs);
        CHECK(a.outputs != sim->generate(30, 13).outputs);
        CHECK(a.seed == 12);
        CHECK_NOTHROW(a.validate());
        REQUIRE(a.marginals.size() == sim->marginals().size());
        for (Eigen::Index i = 0; i < a.inputs.rows(); ++i)
            for (Eigen::Index k = 0; k < a.inputs.cols(); ++k) {
                const double u = a.marginals[static_cast<std::size_t>(k)].cdf(a.inputs(i, k));
                CHECK((u > 0.0 && u < 1.0));
            }
    }
    CHECK_THROWS_AS(simulator_from_string("ishigami"), ConfigError);
    const double x[2] = {0.05, 0.2};
    const std::vector<double> u = {0.5};
    CHECK(reference_quantiles(SimulatorId::gbm, x, u).values[0] == doctest::Approx(std::exp(0.05 - 0.02)));
}
