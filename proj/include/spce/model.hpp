#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

#include "spce/basis.hpp"
#include "spce/marginal.hpp"
#include "spce/orthopoly.hpp"

namespace spce {

enum class Latent { normal, uniform };

Marginal latent_marginal(Latent latent);
std::string to_string(Latent latent);
Latent latent_from_string(const std::string& name);

// Basis of a stochastic PCE over (x_1..x_M, z): input marginals, latent
// distribution, multi-index set of dimension M+1 and the M+1 univariate
// families needed to evaluate it.
class SpceBasis {
public:
    SpceBasis(std::vector<Marginal> inputs, Latent latent, MultiIndexSet indices);

    const std::vector<Marginal>& inputs() const noexcept { return inputs_; }
    Latent latent() const noexcept { return latent_; }
    const MultiIndexSet& indices() const noexcept { return indices_; }
    const std::vector<PolyFamily>& families() const noexcept { return families_; }
    std::size_t n_inputs() const noexcept { return inputs_.size(); }
    std::size_t size() const noexcept { return indices_.size(); }

    // Latent degree of each basis element.
    const std::vector<int>& latent_degrees() const noexcept { return latent_degree_; }
    int max_latent_degree() const noexcept { return max_latent_degree_; }

    // Positions of elements with zero latent degree (the mean-function part).
    const std::vector<std::size_t>& mean_positions() const noexcept { return mean_positions_; }

    // N x P matrix of the input part prod_{k<M} phi(x_k) of each element.
    Eigen::MatrixXd input_design(const Eigen::MatrixXd& x) const;
    void input_design_row(std::span<const double> x, std::span<double> out) const;

    void check_point(std::span<const double> x) const;

private:
    std::vector<Marginal> inputs_;
    Latent latent_;
    MultiIndexSet indices_;
    std::vector<PolyFamily> families_;
    std::vector<int> latent_degree_;
    std::vector<std::size_t> mean_positions_;
    int max_latent_degree_ = 0;
};

// Default number of latent quadrature nodes: max(32, 2 (p_z + 1)).
int default_quadrature_points(int max_latent_degree) noexcept;
QuadratureRule latent_rule(Latent latent, int n_points);

class SpceModel {
public:
    SpceModel(SpceBasis basis, Eigen::VectorXd coefficients, double sigma, nlohmann::json fit_info = {});

    const SpceBasis& basis() const noexcept { return basis_; }
    const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
    double sigma() const noexcept { return sigma_; }
    const nlohmann::json& fit_info() const noexcept { return fit_info_; }

    // Coefficients grouped by latent degree at a point: b_k(x) = sum over
    // elements with latent degree k of c_alpha psi_alpha(x). The surrogate
    // at (x, z) is sum_k b_k(x) phi_k(z).
    Eigen::VectorXd latent_polynomial(std::span<const double> x) const;

private:
    SpceBasis basis_;
    Eigen::VectorXd coefficients_;
    double sigma_;
    nlohmann::json fit_info_;
};

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const SpceModel& model);
// Validates every model invariant; throws ValidationError on violation.
SpceModel model_from_json(const nlohmann::json& j);

}  // namespace spce
