#include "spce/likelihood.hpp"

#include <cmath>
#include <numbers>

#include "spce/errors.hpp"

namespace spce {

namespace {

void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive and finite");
}

Eigen::MatrixXd latent_values(const SpceBasis& basis, const QuadratureRule& rule) {
    const int k = basis.max_latent_degree();
    const auto& fam = basis.families().back();
    Eigen::MatrixXd out(k + 1, static_cast<Eigen::Index>(rule.nodes.size()));
    std::vector<double> vals(static_cast<std::size_t>(k) + 1);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        fam.eval_all(rule.nodes[j], vals);
        for (int d = 0; d <= k; ++d) out(d, static_cast<Eigen::Index>(j)) = vals[static_cast<std::size_t>(d)];
    }
    return out;
}

void check_rule(const SpceBasis& basis, const QuadratureRule& rule) {
    if (!(rule.marginal == latent_marginal(basis.latent())))
        throw ConfigError("quadrature rule is not built on the latent distribution");
}

}  // namespace

double point_likelihood(const Eigen::VectorXd& c, double sigma, std::span<const double> x, double y,
                        const QuadratureRule& rule, const SpceBasis& basis) {
    check_sigma(sigma);
    check_rule(basis, rule);
    if (static_cast<std::size_t>(c.size()) != basis.size()) throw ShapeError("coefficient count mismatch");
    std::vector<double> row(basis.size());
    basis.input_design_row(x, row);
    const Eigen::MatrixXd phi = latent_values(basis, rule);
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
    double total = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        double mu = 0.0;
        for (std::size_t a = 0; a < basis.size(); ++a)
            mu += c[static_cast<Eigen::Index>(a)] * row[a] * phi(basis.latent_degrees()[a], static_cast<Eigen::Index>(j));
        const double r = (y - mu) / sigma;
        total += rule.weights[j] * norm * std::exp(-0.5 * r * r);
    }
    return total;
}

LikelihoodEvaluator::LikelihoodEvaluator(const SpceBasis& basis, const Eigen::MatrixXd& inputs,
                                         const Eigen::VectorXd& outputs, const QuadratureRule& rule)
    : psi_x_(basis.input_design(inputs)),
      latent_degree_(basis.latent_degrees()),
      phi_z_(latent_values(basis, rule)),
      log_w_(static_cast<Eigen::Index>(rule.weights.size())),
      y_(outputs) {
    check_rule(basis, rule);
    if (inputs.rows() != outputs.size()) throw ShapeError("inputs and outputs have different lengths");
    for (std::size_t j = 0; j < rule.weights.size(); ++j) log_w_[static_cast<Eigen::Index>(j)] = std::log(rule.weights[j]);
}

LikelihoodEvaluator::Result LikelihoodEvaluator::log_likelihood(const Eigen::VectorXd& c, double sigma,
                                                                Eigen::VectorXd* grad,
                                                                Eigen::VectorXd* pointwise) const {
    check_sigma(sigma);
    const Eigen::Index n = y_.size(), p = psi_x_.cols(), k = phi_z_.rows();
    if (c.size() != p) throw ShapeError("coefficient count mismatch");

    // b(i, d): input part of the coefficients multiplying phi_d(z).
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index a = 0; a < p; ++a)
        if (c[a] != 0.0) b.col(latent_degree_[static_cast<std::size_t>(a)]) += c[a] * psi_x_.col(a);

    const double inv_var = 1.0 / (sigma * sigma);
    Eigen::ArrayXXd resid = (-(b * phi_z_)).colwise() + y_;          // N x NQ
    Eigen::ArrayXXd expo = (-0.5 * inv_var) * resid.square();
    expo.rowwise() += log_w_.array();
    const Eigen::ArrayXd row_max = expo.rowwise().maxCoeff();
    expo.colwise() -= row_max;
    expo = expo.exp();
    const Eigen::ArrayXd sums = expo.rowwise().sum();

    const double log_norm = -std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
    Result out;
    Eigen::ArrayXd ll = row_max + sums.log() + log_norm;
    Eigen::ArrayXd active = Eigen::ArrayXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(ll[i] >= kLogLikelihoodFloor)) {
            ll[i] = kLogLikelihoodFloor;
            active[i] = 0.0;
            ++out.floored;
        }
    }
    out.value = ll.sum();
    if (pointwise) *pointwise = ll.matrix();

    if (grad) {
        // Posterior node weights times scaled residuals.
        Eigen::ArrayXXd g = expo * resid;
        g.colwise() *= active * inv_var / sums;
        const Eigen::MatrixXd h = g.matrix() * phi_z_.transpose();  // N x K
        grad->resize(p);
        for (Eigen::Index a = 0; a < p; ++a)
            (*grad)[a] = psi_x_.col(a).dot(h.col(latent_degree_[static_cast<std::size_t>(a)]));
    }
    return out;
}

NegLogLikelihood neg_log_likelihood(const Eigen::VectorXd& c, double sigma, const Dataset& data,
                                    const QuadratureRule& rule, const SpceBasis& basis) {
    LikelihoodEvaluator eval(basis, data.inputs, data.outputs, rule);
    Eigen::VectorXd g;
    const auto r = eval.log_likelihood(c, sigma, &g);
    return {-r.value, -g, r.floored};
}

}  // namespace spce
