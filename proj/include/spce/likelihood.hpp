#pragma once

#include <Eigen/Dense>

#include <span>

#include "spce/dataset.hpp"
#include "spce/model.hpp"
#include "spce/orthopoly.hpp"

namespace spce {

// Per-point log-likelihoods are floored here so a single badly fitted point
// cannot turn a sum into -inf.
inline constexpr double kLogLikelihoodFloor = -700.0;

// Quadrature likelihood of one observation:
//   sum_j w_j (2 pi sigma^2)^{-1/2} exp(-(y - sum_a c_a psi_a(x, z_j))^2 / (2 sigma^2)).
double point_likelihood(const Eigen::VectorXd& c, double sigma, std::span<const double> x, double y,
                        const QuadratureRule& rule, const SpceBasis& basis);

// Precomputes the input-part design and latent polynomial values at the
// quadrature nodes so repeated evaluations at different (c, sigma) only cost
// two small matrix products and one exponential per (point, node).
class LikelihoodEvaluator {
public:
    LikelihoodEvaluator(const SpceBasis& basis, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                        const QuadratureRule& rule);

    struct Result {
        double value = 0.0;       // sum of (floored) per-point log-likelihoods
        std::size_t floored = 0;  // points that hit the floor
    };

    // grad, when given, receives d(value)/dc. pointwise receives the
    // per-point log-likelihoods.
    Result log_likelihood(const Eigen::VectorXd& c, double sigma, Eigen::VectorXd* grad = nullptr,
                          Eigen::VectorXd* pointwise = nullptr) const;

    std::size_t size() const noexcept { return static_cast<std::size_t>(y_.size()); }
    std::size_t n_coefficients() const noexcept { return latent_degree_.size(); }
    const Eigen::VectorXd& outputs() const noexcept { return y_; }
    const Eigen::MatrixXd& input_design() const noexcept { return psi_x_; }

private:
    Eigen::MatrixXd psi_x_;    // N x P
    std::vector<int> latent_degree_;
    Eigen::MatrixXd phi_z_;    // K x NQ, latent polynomials at the nodes
    Eigen::RowVectorXd log_w_; // NQ
    Eigen::VectorXd y_;
};

struct NegLogLikelihood {
    double value;
    Eigen::VectorXd gradient;
    std::size_t floored;
};

NegLogLikelihood neg_log_likelihood(const Eigen::VectorXd& c, double sigma, const Dataset& data,
                                    const QuadratureRule& rule, const SpceBasis& basis);

}  // namespace spce
