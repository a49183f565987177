#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "spce/errors.hpp"
#include "oracles.hpp"
#include "spce/orthopoly.hpp"

using namespace spce;
using spce::testing::gram_entry;
using boost::math::quadrature::gauss_kronrod;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double double_factorial(int k) {
    double r = 1;
    for (int i = k; i > 1; i -= 2) r *= i;
    return r;
}

}  // namespace

TEST_CASE("closed-form low-degree Legendre and Hermite values") {
    const auto leg = family_for_marginal(Marginal::uniform(-1, 1), 4);
    const auto her = family_for_marginal(Marginal::normal(0, 1), 4);
    for (double u : {-0.9, -0.3, 0.0, 0.45, 1.0}) {
        CHECK(leg(0, u) == doctest::Approx(1.0));
        CHECK(leg(1, u) == doctest::Approx(std::sqrt(3.0) * u));
        CHECK(leg(2, u) == doctest::Approx(std::sqrt(5.0) * (3 * u * u - 1) / 2));
        CHECK(leg(3, u) == doctest::Approx(std::sqrt(7.0) * (5 * u * u * u - 3 * u) / 2));
        CHECK(her(1, u) == doctest::Approx(u));
        CHECK(her(2, u) == doctest::Approx((u * u - 1) / std::sqrt(2.0)));
        CHECK(her(3, u) == doctest::Approx((u * u * u - 3 * u) / std::sqrt(6.0)));
    }
}

TEST_CASE("affine standardization of input marginals") {
    const auto fam = family_for_marginal(Marginal::uniform(2, 5), 3);
    // x = 5 maps to u = 1
    CHECK(fam(1, 5.0) == doctest::Approx(std::sqrt(3.0)));
    CHECK(fam(1, 3.5) == doctest::Approx(0.0).epsilon(1e-14));
    const auto nf = family_for_marginal(Marginal::normal(1.0, 2.0), 3);
    CHECK(nf(2, 3.0) == doctest::Approx(0.0).epsilon(1e-14));  // u = 1, He_2(1) = 0
}

TEST_CASE("Gram matrices of bundled families are the identity up to degree 8") {
    for (const auto& m : {Marginal::uniform(-1, 1), Marginal::uniform(0.1, 0.4), Marginal::normal(0, 1),
                          Marginal::normal(-3, 0.5)}) {
        const auto fam = family_for_marginal(m, 8);
        for (int i = 0; i <= 8; ++i)
            for (int j = 0; j <= i; ++j) {
                INFO(m.name(), " i=", i, " j=", j);
                CHECK(std::abs(gram_entry(fam, i, j) - (i == j ? 1.0 : 0.0)) < 1e-8);
            }
    }
}

TEST_CASE("eval_all agrees with single-degree evaluation") {
    const auto fam = family_for_marginal(Marginal::normal(0, 1), 6);
    std::vector<double> out(7);
    fam.eval_all(0.7, out);
    for (int k = 0; k <= 6; ++k) CHECK(out[static_cast<std::size_t>(k)] == doctest::Approx(eval_poly(fam, k, 0.7)));
}

TEST_CASE("degree beyond the family raises a bounds error") {
    const auto fam = family_for_marginal(Marginal::uniform(-1, 1), 3);
    CHECK_THROWS_AS(fam(4, 0.0), BoundsError);
    CHECK_THROWS_AS(eval_poly(fam, -1, 0.0), BoundsError);
}

TEST_CASE("custom marginals need Stieltjes") {
    CHECK_THROWS_AS(family_for_marginal(Marginal::custom(0, 1), 3), ConfigError);
}

TEST_CASE("Stieltjes reproduces analytic recurrences") {
    const auto uni = stieltjes(Density{[](double) { return 0.5; }, -1.0, 1.0}, 8);
    const auto nor = stieltjes(Density{[](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); }, -kInf, kInf}, 8);
    for (int k = 0; k <= 8; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        CHECK(std::abs(uni.alpha()[ku]) < 1e-8);
        CHECK(std::abs(nor.alpha()[ku]) < 1e-8);
        if (k == 0) continue;
        CHECK(std::abs(uni.beta()[ku] - k * k / (4.0 * k * k - 1.0)) < 1e-8);
        CHECK(std::abs(nor.beta()[ku] - k) < 1e-8);
    }
}

TEST_CASE("Stieltjes family on a non-standard density is orthonormal") {
    // Beta(2,2)-shaped density on [0,1].
    auto pdf = [](double x) { return 6 * x * (1 - x); };
    const auto fam = stieltjes(Density{pdf, 0.0, 1.0}, 6);
    for (int i = 0; i <= 6; ++i)
        for (int j = 0; j <= i; ++j) {
            const double g = gauss_kronrod<double, 61>::integrate([&](double x) { return fam(i, x) * fam(j, x) * pdf(x); },
                                                                  0.0, 1.0, 15, 1e-13);
            CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-8);
        }
}

TEST_CASE("Stieltjes rejects unnormalized densities") {
    CHECK_THROWS_AS(stieltjes(Density{[](double) { return 1.0; }, -1.0, 1.0}, 3), ValidationError);
}

TEST_CASE("Gauss rules integrate polynomials of degree 2n-1 exactly") {
    for (int n : {1, 2, 5, 10}) {
        const auto leg = gauss_rule(family_for_marginal(Marginal::uniform(-1, 1), n), n);
        const auto her = gauss_rule(family_for_marginal(Marginal::normal(0, 1), n), n);
        double wsum = 0;
        for (double w : leg.weights) {
            CHECK(w > 0);
            wsum += w;
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double sl = 0, sh = 0, scale = 0;
            for (std::size_t j = 0; j < leg.nodes.size(); ++j) sl += leg.weights[j] * std::pow(leg.nodes[j], k);
            for (std::size_t j = 0; j < her.nodes.size(); ++j) {
                sh += her.weights[j] * std::pow(her.nodes[j], k);
                scale += her.weights[j] * std::pow(std::abs(her.nodes[j]), k);
            }
            const double ml = k % 2 ? 0.0 : 1.0 / (k + 1);
            const double mh = k % 2 ? 0.0 : double_factorial(k - 1);
            CHECK(std::abs(sl - ml) < 1e-12);
            CHECK(std::abs(sh - mh) < 1e-12 * std::max(1.0, scale));
        }
        for (std::size_t j = 1; j < leg.nodes.size(); ++j) CHECK(leg.nodes[j] > leg.nodes[j - 1]);
    }
}

TEST_CASE("Gauss rule nodes follow the marginal's units") {
    const auto rule = gauss_rule(family_for_marginal(Marginal::uniform(2, 4), 3), 3);
    double mean = 0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        CHECK(rule.nodes[j] > 2.0);
        CHECK(rule.nodes[j] < 4.0);
        mean += rule.weights[j] * rule.nodes[j];
    }
    CHECK(mean == doctest::Approx(3.0));
}

TEST_CASE("Gauss rule needs enough recurrence terms") {
    const auto fam = family_for_marginal(Marginal::normal(0, 1), 3);
    CHECK_NOTHROW(gauss_rule(fam, 4));
    CHECK_THROWS(gauss_rule(fam, 5));
    CHECK_THROWS(gauss_rule(fam, 0));
}

TEST_CASE("PolyFamily JSON round trip") {
    const auto fam = family_for_marginal(Marginal::uniform(0, 0.1), 5);
    nlohmann::json j = fam;
    const auto back = poly_family_from_json(j);
    CHECK(back.alpha() == fam.alpha());
    CHECK(back.beta() == fam.beta());
    CHECK(back.marginal() == fam.marginal());
    j["recurrence"][2][1] = -1.0;
    CHECK_THROWS(poly_family_from_json(j));
}
