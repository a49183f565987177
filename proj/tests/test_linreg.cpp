#include "doctest.h"

#include <algorithm>
#include <random>

#include "spce/basis.hpp"
#include "spce/errors.hpp"
#include "spce/linreg.hpp"

using namespace spce;

namespace {

Eigen::MatrixXd legendre_design(const MultiIndexSet& set, const Eigen::MatrixXd& x) {
    std::vector<PolyFamily> fams;
    for (Eigen::Index k = 0; k < x.cols(); ++k) fams.push_back(family_for_marginal(Marginal::uniform(-1, 1), set.p()));
    return eval_design_matrix(set, fams, x);
}

Eigen::MatrixXd uniform_points(int n, int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::MatrixXd x(n, dim);
    for (auto& v : x.reshaped()) v = u(rng);
    return x;
}

}  // namespace

TEST_CASE("OLS recovers exact coefficients and zero LOO error") {
    std::mt19937_64 rng(3);
    const auto set = hyperbolic_set(3, 1.0, 2);
    const Eigen::MatrixXd d = legendre_design(set, uniform_points(50, 2, rng));
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(set.size()), -1, 2);
    const auto fit = ols_fit(d, d * c);
    CHECK((fit.coefficients - c).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.eps_loo < 1e-20);
    CHECK(fit.selected.size() == set.size());
}

TEST_CASE("hat-matrix LOO equals brute-force refitting") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0, 0.3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto set = hyperbolic_set(2 + trial % 2, 1.0, 2);
        const Eigen::MatrixXd d = legendre_design(set, uniform_points(30 + 5 * trial, 2, rng));
        Eigen::VectorXd y(d.rows());
        for (auto& v : y) v = noise(rng);
        y += d.col(1) * 2.0;
        const auto fit = ols_fit(d, y);
        CHECK(fit.eps_loo == doctest::Approx(loo_by_refitting(d, y)).epsilon(1e-10));
    }
}

TEST_CASE("rank-deficient designs raise a conditioning error naming columns") {
    Eigen::MatrixXd d(6, 3);
    d.col(0).setOnes();
    d.col(1) << 1, 2, 3, 4, 5, 6;
    d.col(2) = 2.0 * d.col(1);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, 0, 1);
    try {
        ols_fit(d, y);
        FAIL("expected ConditioningError");
    } catch (const ConditioningError& e) {
        REQUIRE(e.columns().size() == 1);
        CHECK((e.columns()[0] == 1 || e.columns()[0] == 2));
    }
    CHECK_THROWS_AS(ols_fit(Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Ones(2)), ConditioningError);
    CHECK_THROWS_AS(ols_fit(d, Eigen::VectorXd::Ones(5)), ShapeError);
}

TEST_CASE("OLS on a column subset keeps original numbering") {
    std::mt19937_64 rng(8);
    const auto set = hyperbolic_set(2, 1.0, 2);
    const Eigen::MatrixXd d = legendre_design(set, uniform_points(40, 2, rng));
    const Eigen::VectorXd y = 1.5 * d.col(0) - 0.5 * d.col(3);
    const std::vector<std::size_t> cols{0, 3};
    const auto fit = ols_fit(d, y, cols);
    CHECK(fit.selected == cols);
    CHECK(fit.coefficients[0] == doctest::Approx(1.5));
    CHECK(fit.coefficients[1] == doctest::Approx(-0.5));
}

TEST_CASE("LAR on orthogonal columns activates by decreasing correlation") {
    // Columns of a Sylvester-Hadamard matrix: orthogonal with zero mean.
    Eigen::MatrixXd h(8, 8);
    h(0, 0) = 1;
    for (int s = 1; s < 8; s *= 2) {
        h.block(0, s, s, s) = h.block(0, 0, s, s);
        h.block(s, 0, s, s) = h.block(0, 0, s, s);
        h.block(s, s, s, s) = -h.block(0, 0, s, s);
    }
    const Eigen::MatrixXd d = h.leftCols(5);
    const Eigen::VectorXd y = 4.0 * d.col(0) + 3.0 * d.col(2) - 2.0 * d.col(1) + 0.5 * d.col(4);
    const auto path = lar_path(d, y, 0, 10);
    REQUIRE(path.size() == 3);
    CHECK(path == std::vector<std::size_t>{2, 1, 4});
}

TEST_CASE("hybrid LAR finds the sparse truth on noise-free data") {
    std::mt19937_64 rng(11);
    const auto set = hyperbolic_set(4, 1.0, 3);
    const Eigen::MatrixXd d = legendre_design(set, uniform_points(120, 3, rng));
    const std::size_t a = set.find({1, 0, 0});
    const std::size_t b = set.find({0, 2, 1});
    const Eigen::VectorXd y = 1.0 * d.col(0) + 2.0 * d.col(static_cast<Eigen::Index>(a)) -
                              0.7 * d.col(static_cast<Eigen::Index>(b));
    const auto fit = hybrid_lar(d, y, set);
    std::vector<std::size_t> expect{0, a, b};
    std::sort(expect.begin(), expect.end());
    CHECK(fit.selected == expect);
    CHECK(fit.eps_loo < 1e-20);
}

TEST_CASE("hybrid LAR keeps the true terms under noise and beats the full model on LOO") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> noise(0, 0.1);
    const auto set = hyperbolic_set(5, 1.0, 2);
    const Eigen::MatrixXd d = legendre_design(set, uniform_points(60, 2, rng));
    const std::size_t a = set.find({2, 0});
    const std::size_t b = set.find({1, 1});
    Eigen::VectorXd y = 0.5 * d.col(0) + 1.0 * d.col(static_cast<Eigen::Index>(a)) + 0.8 * d.col(static_cast<Eigen::Index>(b));
    for (auto& v : y) v += noise(rng);
    const auto fit = hybrid_lar(d, y, set);
    CHECK(std::find(fit.selected.begin(), fit.selected.end(), a) != fit.selected.end());
    CHECK(std::find(fit.selected.begin(), fit.selected.end(), b) != fit.selected.end());
    CHECK(fit.selected.front() == 0);
    CHECK(fit.eps_loo <= ols_fit(d, y).eps_loo);
    CHECK(fit.eps_loo == doctest::Approx(loo_by_refitting(d(Eigen::all, fit.selected), y)).epsilon(1e-8));
}

TEST_CASE("hybrid LAR on a constant response keeps only the constant") {
    std::mt19937_64 rng(13);
    const auto set = hyperbolic_set(3, 1.0, 2);
    const Eigen::MatrixXd d = legendre_design(set, uniform_points(20, 2, rng));
    const auto fit = hybrid_lar(d, Eigen::VectorXd::Constant(20, 3.0), set);
    CHECK(fit.selected == std::vector<std::size_t>{0});
    CHECK(fit.coefficients[0] == doctest::Approx(3.0));
}

TEST_CASE("hybrid LAR requires the constant term") {
    const MultiIndexSet set(1, 2, 1.0, {{1}, {2}});
    CHECK_THROWS_AS(hybrid_lar(Eigen::MatrixXd::Random(10, 2), Eigen::VectorXd::Random(10), set), ValidationError);
}
