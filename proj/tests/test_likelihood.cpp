#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "spce/errors.hpp"
#include "spce/likelihood.hpp"
#include "spce/optimize.hpp"

using namespace spce;
using namespace spce::testing;

TEST_CASE("constant model at its own value gives the Gaussian peak") {
    const SpceBasis basis(mixed_marginals(2), Latent::normal, hyperbolic_set(2, 1.0, 3));
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    c[0] = 1.7;
    const auto rule = latent_rule(Latent::normal, 8);
    const double x[2] = {0.3, 0.1};
    for (double sigma : {0.01, 0.5, 3.0})
        CHECK(point_likelihood(c, sigma, x, 1.7, rule, basis) ==
              doctest::Approx(1.0 / (sigma * std::sqrt(2 * std::numbers::pi))).epsilon(1e-13));
}

TEST_CASE("linear-in-z model matches the exact convolution and dense integration") {
    // g(z) = c0 + c1 z with Z ~ N(0,1): Y ~ N(c0, c1^2 + sigma^2).
    const SpceBasis basis({}, Latent::normal, hyperbolic_set(1, 1.0, 1));
    Eigen::VectorXd c(2);
    c << 0.4, 0.5;
    const double sigma = 0.3;
    const auto rule = latent_rule(Latent::normal, default_quadrature_points(1));
    for (double y : {-1.0, 0.0, 0.4, 1.3}) {
        const double s2 = c[1] * c[1] + sigma * sigma;
        const double exact = std::exp(-0.5 * (y - c[0]) * (y - c[0]) / s2) / std::sqrt(2 * std::numbers::pi * s2);
        double dense = 0;
        const int n = 1000000;
        const double lo = -10, h = 20.0 / n;
        for (int i = 0; i <= n; ++i) {
            const double z = lo + i * h;
            const double r = (y - c[0] - c[1] * z) / sigma;
            const double f = std_normal_pdf(z) * std::exp(-0.5 * r * r) / (sigma * std::sqrt(2 * std::numbers::pi));
            dense += (i == 0 || i == n ? 0.5 : 1.0) * f * h;
        }
        const double v = point_likelihood(c, sigma, {}, y, rule, basis);
        CHECK(v == doctest::Approx(exact).epsilon(1e-6));
        CHECK(v == doctest::Approx(dense).epsilon(1e-6));
    }
}

TEST_CASE("point likelihood respects the 1/(sigma sqrt(2 pi)) bound") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 500; ++t) {
        const std::size_t m = t % 3;
        const auto basis = random_basis(m, 1 + t % 4, 1.0, t % 2 ? Latent::uniform : Latent::normal);
        const auto rule = latent_rule(basis.latent(), 16);
        const Eigen::VectorXd c = random_coefficients(basis.size(), 2.0, rng);
        const double sigma = std::pow(10.0, -3 + 3 * u(rng));
        const auto x = sample_inputs(basis.inputs(), 1, rng);
        std::vector<double> xv(x.data(), x.data() + x.size());
        const double y = c[0] + 3 * (u(rng) - 0.5);
        const double v = point_likelihood(c, sigma, xv, y, rule, basis);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 / (sigma * std::sqrt(2 * std::numbers::pi)) + 1e-12);
    }
}

TEST_CASE("point likelihood argument checks") {
    const SpceBasis basis({}, Latent::normal, hyperbolic_set(1, 1.0, 1));
    const Eigen::VectorXd c = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(point_likelihood(c, 0.0, {}, 0.0, latent_rule(Latent::normal, 4), basis), DomainError);
    CHECK_THROWS_AS(point_likelihood(c, 1.0, {}, 0.0, latent_rule(Latent::uniform, 4), basis), ConfigError);
}

TEST_CASE("evaluator agrees with the plain per-point sum") {
    std::mt19937_64 rng(19);
    const auto basis = random_basis(2, 3, 0.75, Latent::uniform);
    const auto rule = latent_rule(basis.latent(), 20);
    const Eigen::VectorXd c = random_coefficients(basis.size(), 0.5, rng);
    const SpceModel model(basis, c, 0.4);
    const Dataset d = sample_from_model(model, 25, rng);
    const LikelihoodEvaluator eval(basis, d.inputs, d.outputs, rule);
    Eigen::VectorXd pointwise;
    const auto r = eval.log_likelihood(c, 0.4, nullptr, &pointwise);
    double sum = 0;
    for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
        std::vector<double> x{d.inputs(i, 0), d.inputs(i, 1)};
        const double l = std::log(point_likelihood(c, 0.4, x, d.outputs[i], rule, basis));
        CHECK(pointwise[i] == doctest::Approx(l).epsilon(1e-12));
        sum += l;
    }
    CHECK(r.value == doctest::Approx(sum).epsilon(1e-12));
    CHECK(r.floored == 0);
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 50; ++t) {
        const std::size_t m = t % 4;
        const int p = 1 + t % 4;
        const double q = t % 3 == 0 ? 0.5 : (t % 3 == 1 ? 0.75 : 1.0);
        const auto basis = random_basis(m, p, q, t % 2 ? Latent::normal : Latent::uniform);
        const auto rule = latent_rule(basis.latent(), default_quadrature_points(basis.max_latent_degree()));
        const Eigen::VectorXd c0 = random_coefficients(basis.size(), 0.5, rng);
        const SpceModel truth(basis, c0, 0.3);
        const Dataset d = sample_from_model(truth, 30, rng);
        const Eigen::VectorXd c = c0 + random_coefficients(basis.size(), 0.1, rng);
        const double sigma = 0.25;
        const auto nll = neg_log_likelihood(c, sigma, d, rule, basis);
        REQUIRE(nll.floored == 0);
        const Eigen::VectorXd fd = fd_gradient(c, sigma, d, rule, basis);
        INFO("trial ", t, " M=", m, " p=", p, " q=", q);
        CHECK(rel_err(nll.gradient, fd) < 1e-5);
    }
}

TEST_CASE("negative log-likelihood is additive over data points") {
    std::mt19937_64 rng(29);
    const auto basis = random_basis(1, 2, 1.0, Latent::normal);
    const Eigen::VectorXd c = random_coefficients(basis.size(), 0.5, rng);
    const Dataset d = sample_from_model(SpceModel(basis, c, 0.2), 15, rng);
    Dataset twice = d;
    twice.inputs.resize(30, 1);
    twice.inputs << d.inputs, d.inputs;
    twice.outputs.resize(30);
    twice.outputs << d.outputs, d.outputs;
    const auto rule = latent_rule(Latent::normal, 32);
    const auto a = neg_log_likelihood(c, 0.2, d, rule, basis);
    const auto b = neg_log_likelihood(c, 0.2, twice, rule, basis);
    CHECK(b.value == doctest::Approx(2 * a.value).epsilon(1e-13));
    CHECK(rel_err(b.gradient, 2 * a.gradient) < 1e-12);
}

TEST_CASE("single constant point gives -log of the Gaussian peak") {
    const SpceBasis basis({}, Latent::uniform, hyperbolic_set(2, 1.0, 1));
    Dataset d;
    d.inputs.resize(1, 0);
    d.outputs = Eigen::VectorXd::Constant(1, 2.5);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
    c[0] = 2.5;
    const auto r = neg_log_likelihood(c, 0.7, d, latent_rule(Latent::uniform, 8), basis);
    CHECK(r.value == doctest::Approx(-std::log(1.0 / (0.7 * std::sqrt(2 * std::numbers::pi)))));
}

TEST_CASE("flipping odd latent coefficients leaves the likelihood unchanged") {
    std::mt19937_64 rng(31);
    for (Latent latent : {Latent::normal, Latent::uniform}) {
        const auto basis = random_basis(2, 4, 1.0, latent);
        const Eigen::VectorXd c = random_coefficients(basis.size(), 0.5, rng);
        const Dataset d = sample_from_model(SpceModel(basis, c, 0.3), 20, rng);
        Eigen::VectorXd flipped = c;
        for (std::size_t j = 0; j < basis.size(); ++j)
            if (basis.latent_degrees()[j] % 2 == 1) flipped[static_cast<Eigen::Index>(j)] = -c[static_cast<Eigen::Index>(j)];
        const auto rule = latent_rule(latent, 32);
        CHECK(neg_log_likelihood(flipped, 0.3, d, rule, basis).value ==
              doctest::Approx(neg_log_likelihood(c, 0.3, d, rule, basis).value).epsilon(1e-12));
    }
}

TEST_CASE("hopeless points hit the floor and are counted") {
    const SpceBasis basis({}, Latent::normal, hyperbolic_set(1, 1.0, 1));
    Dataset d;
    d.inputs.resize(2, 0);
    d.outputs.resize(2);
    d.outputs << 0.0, 1e6;
    Eigen::VectorXd c(2);
    c << 0.0, 0.1;
    const auto r = neg_log_likelihood(c, 0.01, d, latent_rule(Latent::normal, 16), basis);
    CHECK(r.floored == 1);
    CHECK(std::isfinite(r.value));
    CHECK(r.value >= -kLogLikelihoodFloor);
}

TEST_CASE("BFGS minimizes the Rosenbrock function") {
    auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double a = 1 - x[0], b = x[1] - x[0] * x[0];
        g.resize(2);
        g[0] = -2 * a - 400 * x[0] * b;
        g[1] = 200 * b;
        return a * a + 100 * b * b;
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    BfgsOptions opt;
    opt.relative_change_tol = 0;  // rely on the gradient test
    const auto r = minimize_bfgs(f, x0, opt);
    CHECK(r.converged);
    CHECK_FALSE(r.cap_hit);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("BFGS reports the iteration cap") {
    auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double a = 1 - x[0], b = x[1] - x[0] * x[0];
        g.resize(2);
        g[0] = -2 * a - 400 * x[0] * b;
        g[1] = 200 * b;
        return a * a + 100 * b * b;
    };
    BfgsOptions opt;
    opt.max_iterations = 3;
    opt.relative_change_tol = 0;
    const auto r = minimize_bfgs(f, Eigen::Vector2d(-1.2, 1.0), opt);
    CHECK(r.cap_hit);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
}

TEST_CASE("BFGS throws with the last iterate on a non-finite start") {
    auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = Eigen::VectorXd::Zero(x.size());
        return std::nan("");
    };
    try {
        minimize_bfgs(f, Eigen::Vector2d(1.0, 2.0));
        FAIL("expected OptimizationError");
    } catch (const OptimizationError& e) {
        CHECK(e.last_iterate() == std::vector<double>{1.0, 2.0});
    }
}

TEST_CASE("BFGS shrinks steps into the finite region") {
    // -log(1 - x^2) style barrier: infinite outside (-1, 1).
    auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.resize(1);
        const double t = x[0] - 0.9;
        if (std::abs(x[0]) >= 1) {
            g[0] = 0;
            return std::numeric_limits<double>::infinity();
        }
        g[0] = 2 * t + 2 * x[0] / (1 - x[0] * x[0]) * 1e-3;
        return t * t - 1e-3 * std::log(1 - x[0] * x[0]);
    };
    const auto r = minimize_bfgs(f, Eigen::VectorXd::Constant(1, -0.5));
    CHECK(r.converged);
    CHECK(std::abs(r.x[0]) < 1.0);
    CHECK(r.x[0] > 0.8);
}

TEST_CASE("model JSON round trip and validation") {
    std::mt19937_64 rng(37);
    const auto basis = random_basis(2, 3, 0.75, Latent::uniform);
    const SpceModel model(basis, random_coefficients(basis.size(), 1.0, rng), 0.12, {{"note", "x"}});
    const auto j = model_to_json(model);
    const auto back = model_from_json(j);
    CHECK(back.coefficients() == model.coefficients());
    CHECK(back.sigma() == model.sigma());
    CHECK(back.basis().indices() == model.basis().indices());
    CHECK(back.basis().latent() == Latent::uniform);
    CHECK(model_to_json(back) == j);

    auto bad = j;
    bad["sigma"] = 0.0;
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
    bad = j;
    bad["version"] = 99;
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
    bad = j;
    bad["coefficients"].erase(0);
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
    bad = j;
    bad["transform"][0]["scale"] = 17.0;
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
    bad = j;
    bad["basis"]["indices"].erase(0);
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
}

TEST_CASE("model invariants are enforced at construction") {
    const auto basis = random_basis(1, 2, 1.0, Latent::normal);
    const Eigen::VectorXd c = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(basis.size()));
    CHECK_THROWS_AS(SpceModel(basis, c, 0.0), ValidationError);
    CHECK_THROWS_AS(SpceModel(basis, c, -1.0), ValidationError);
    CHECK_THROWS_AS(SpceModel(basis, Eigen::VectorXd::Ones(2), 1.0), ShapeError);
    Eigen::VectorXd nan = c;
    nan[1] = std::nan("");
    CHECK_THROWS_AS(SpceModel(basis, nan, 1.0), ValidationError);
    CHECK_THROWS_AS(SpceBasis(mixed_marginals(1), Latent::normal, MultiIndexSet(2, 1, 1.0, {{1, 0}})), ValidationError);
}
