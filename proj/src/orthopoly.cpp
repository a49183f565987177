#include "spce/orthopoly.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "spce/errors.hpp"

namespace spce {

namespace {

constexpr double kIntegrationTol = 1e-10;
constexpr double kMassTol = 1e-6;

double integrate(const std::function<double(double)>& f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    // Split infinite ranges at the origin; the tails are mapped internally.
    if (std::isinf(a) && std::isinf(b)) {
        return gauss_kronrod<double, 61>::integrate(f, a, 0.0, 15, kIntegrationTol) +
               gauss_kronrod<double, 61>::integrate(f, 0.0, b, 15, kIntegrationTol);
    }
    return gauss_kronrod<double, 61>::integrate(f, a, b, 15, kIntegrationTol);
}

}  // namespace

PolyFamily::PolyFamily(Marginal marginal, std::vector<double> alpha, std::vector<double> beta)
    : marginal_(std::move(marginal)), alpha_(std::move(alpha)), beta_(std::move(beta)) {
    if (alpha_.empty() || alpha_.size() != beta_.size())
        throw ValidationError("recurrence needs matching, nonempty alpha/beta");
    for (std::size_t k = 0; k < beta_.size(); ++k) {
        if (!(beta_[k] > 0.0) || !std::isfinite(beta_[k]) || !std::isfinite(alpha_[k]))
            throw ValidationError("recurrence coefficient beta_" + std::to_string(k) + " is not positive");
    }
    sqrt_beta_.resize(beta_.size());
    for (std::size_t k = 0; k < beta_.size(); ++k) sqrt_beta_[k] = std::sqrt(beta_[k]);
}

void PolyFamily::eval_all_standard(double u, std::span<double> out) const noexcept {
    const std::size_t n = out.size();
    if (n == 0) return;
    out[0] = 1.0;
    if (n == 1) return;
    out[1] = (u - alpha_[0]) / sqrt_beta_[1];
    for (std::size_t k = 1; k + 1 < n; ++k)
        out[k + 1] = ((u - alpha_[k]) * out[k] - sqrt_beta_[k] * out[k - 1]) / sqrt_beta_[k + 1];
}

void PolyFamily::eval_all(double x, std::span<double> out) const {
    if (static_cast<int>(out.size()) - 1 > max_degree())
        throw BoundsError("degree " + std::to_string(out.size() - 1) + " exceeds family max degree " +
                          std::to_string(max_degree()));
    eval_all_standard(marginal_.to_standard(x), out);
}

double PolyFamily::operator()(int degree, double x) const {
    if (degree < 0 || degree > max_degree())
        throw BoundsError("degree " + std::to_string(degree) + " outside [0, " +
                          std::to_string(max_degree()) + "]");
    std::vector<double> buf(static_cast<std::size_t>(degree) + 1);
    eval_all_standard(marginal_.to_standard(x), buf);
    return buf.back();
}

double eval_poly(const PolyFamily& family, int degree, double x) { return family(degree, x); }

PolyFamily family_for_marginal(const Marginal& marginal, int max_degree) {
    if (max_degree < 0) throw ConfigError("max_degree must be nonnegative");
    const auto n = static_cast<std::size_t>(max_degree) + 1;
    std::vector<double> alpha(n, 0.0), beta(n, 1.0);
    switch (marginal.kind()) {
        case MarginalKind::uniform:
            for (std::size_t k = 1; k < n; ++k) {
                const double kk = static_cast<double>(k * k);
                beta[k] = kk / (4.0 * kk - 1.0);
            }
            break;
        case MarginalKind::normal:
            for (std::size_t k = 1; k < n; ++k) beta[k] = static_cast<double>(k);
            break;
        case MarginalKind::custom:
            throw ConfigError("custom marginal requires a density evaluator (use stieltjes)");
    }
    return PolyFamily(marginal, std::move(alpha), std::move(beta));
}

PolyFamily stieltjes(const Density& density, int max_degree) {
    if (max_degree < 0) throw ConfigError("max_degree must be nonnegative");
    if (!density.pdf) throw ConfigError("density evaluator missing");
    if (!(density.lower < density.upper)) throw ConfigError("density support must be a nonempty interval");

    const double mass = integrate(density.pdf, density.lower, density.upper);
    if (!std::isfinite(mass) || std::abs(mass - 1.0) > kMassTol) {
        std::ostringstream os;
        os << "density integrates to " << mass << ", expected 1";
        throw ValidationError(os.str());
    }

    const auto n = static_cast<std::size_t>(max_degree) + 1;
    std::vector<double> alpha(n, 0.0), beta(n, 1.0);
    // Monic polynomials pi_k evaluated on the fly from the coefficients found so far.
    auto monic = [&](double x, std::size_t k, double& pk, double& pkm1) {
        pkm1 = 0.0;
        pk = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double next = (x - alpha[j]) * pk - (j == 0 ? 0.0 : beta[j]) * pkm1;
            pkm1 = pk;
            pk = next;
        }
    };

    double norm_prev = mass;
    for (std::size_t k = 0; k < n; ++k) {
        const double norm = integrate(
            [&](double x) {
                double pk, pkm1;
                monic(x, k, pk, pkm1);
                return pk * pk * density.pdf(x);
            },
            density.lower, density.upper);
        const double xnorm = integrate(
            [&](double x) {
                double pk, pkm1;
                monic(x, k, pk, pkm1);
                return x * pk * pk * density.pdf(x);
            },
            density.lower, density.upper);
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw NumericalError("Stieltjes procedure lost positivity at degree " + std::to_string(k));
        alpha[k] = xnorm / norm;
        beta[k] = k == 0 ? 1.0 : norm / norm_prev;
        norm_prev = norm;
    }
    return PolyFamily(Marginal::custom(density.lower, density.upper), std::move(alpha), std::move(beta));
}

QuadratureRule gauss_rule(const PolyFamily& family, int n_points) {
    if (n_points < 1) throw ConfigError("quadrature needs at least one point");
    if (n_points > family.max_degree() + 1)
        throw BoundsError("family recurrence too short for a " + std::to_string(n_points) + "-point rule");
    const auto n = static_cast<Eigen::Index>(n_points);
    Eigen::VectorXd diag(n), sub(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index k = 0; k < n; ++k) diag[k] = family.alpha()[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 1; k < n; ++k) sub[k - 1] = std::sqrt(family.beta()[static_cast<std::size_t>(k)]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "Jacobi eigen-solve failed for n=" << n_points << " (diag range " << diag.minCoeff() << ".."
           << diag.maxCoeff() << ")";
        throw NumericalError(os.str());
    }

    QuadratureRule rule{{}, {}, family.marginal()};
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double v0 = solver.eigenvectors()(0, j);
        rule.weights[static_cast<std::size_t>(j)] = family.beta()[0] * v0 * v0;
        total += rule.weights[static_cast<std::size_t>(j)];
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        rule.nodes[static_cast<std::size_t>(j)] = family.marginal().from_standard(solver.eigenvalues()[j]);
        rule.weights[static_cast<std::size_t>(j)] /= total;
    }
    return rule;
}

void to_json(nlohmann::json& j, const PolyFamily& family) {
    nlohmann::json rec = nlohmann::json::array();
    for (std::size_t k = 0; k < family.alpha().size(); ++k)
        rec.push_back({family.alpha()[k], family.beta()[k]});
    j = {{"marginal", family.marginal()}, {"recurrence", rec}, {"max_degree", family.max_degree()}};
}

PolyFamily poly_family_from_json(const nlohmann::json& j) {
    auto marginal = marginal_from_json(j.at("marginal"));
    std::vector<double> alpha, beta;
    for (const auto& pair : j.at("recurrence")) {
        alpha.push_back(pair.at(0).get<double>());
        beta.push_back(pair.at(1).get<double>());
    }
    if (static_cast<int>(alpha.size()) - 1 != j.at("max_degree").get<int>())
        throw ValidationError("recurrence length does not match max_degree");
    return PolyFamily(std::move(marginal), std::move(alpha), std::move(beta));
}

}  // namespace spce
