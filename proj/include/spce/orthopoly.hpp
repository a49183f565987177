#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <span>
#include <vector>

#include "spce/marginal.hpp"

namespace spce {

// Univariate orthonormal polynomial family defined by its three-term
// recurrence in the standardized variable u = marginal.to_standard(x):
//
//   phi_0 = 1,  sqrt(b_{k+1}) phi_{k+1} = (u - a_k) phi_k - sqrt(b_k) phi_{k-1}
//
// alpha() holds a_0..a_D and beta() holds b_0..b_D with b_0 the total mass
// (always 1 here). The extra trailing coefficients let gauss_rule() build
// rules with up to D+1 nodes.
class PolyFamily {
public:
    PolyFamily(Marginal marginal, std::vector<double> alpha, std::vector<double> beta);

    const Marginal& marginal() const noexcept { return marginal_; }
    int max_degree() const noexcept { return static_cast<int>(alpha_.size()) - 1; }
    const std::vector<double>& alpha() const noexcept { return alpha_; }
    const std::vector<double>& beta() const noexcept { return beta_; }

    // phi_degree(x), x in the marginal's own units.
    double operator()(int degree, double x) const;

    // phi_0..phi_degree at x, written into out (size degree+1).
    void eval_all(double x, std::span<double> out) const;

    // Same as eval_all but x is already standardized.
    void eval_all_standard(double u, std::span<double> out) const noexcept;

private:
    Marginal marginal_;
    std::vector<double> alpha_;
    std::vector<double> beta_;
    std::vector<double> sqrt_beta_;
};

struct Density {
    std::function<double(double)> pdf;
    double lower;  // may be -inf
    double upper;  // may be +inf
};

// Closed-form Legendre (uniform) or probabilists' Hermite (normal) family,
// orthonormal on the marginal. Custom marginals need stieltjes().
PolyFamily family_for_marginal(const Marginal& marginal, int max_degree);

// Discretized Stieltjes procedure on an adaptive Gauss-Kronrod quadrature.
PolyFamily stieltjes(const Density& density, int max_degree);

double eval_poly(const PolyFamily& family, int degree, double x);

struct QuadratureRule {
    std::vector<double> nodes;    // ascending, in the marginal's units
    std::vector<double> weights;  // positive, sum to 1
    Marginal marginal;
};

// Golub-Welsch: eigen-decomposition of the Jacobi matrix.
QuadratureRule gauss_rule(const PolyFamily& family, int n_points);

void to_json(nlohmann::json& j, const PolyFamily& family);
PolyFamily poly_family_from_json(const nlohmann::json& j);

}  // namespace spce
