#include "spce/model.hpp"

#include <algorithm>
#include <cmath>

#include "spce/errors.hpp"

namespace spce {

Marginal latent_marginal(Latent latent) {
    return latent == Latent::normal ? Marginal::normal(0.0, 1.0) : Marginal::uniform(-1.0, 1.0);
}

std::string to_string(Latent latent) { return latent == Latent::normal ? "normal" : "uniform"; }

Latent latent_from_string(const std::string& name) {
    if (name == "normal") return Latent::normal;
    if (name == "uniform") return Latent::uniform;
    throw ConfigError("unknown latent distribution '" + name + "' (expected normal or uniform)");
}

SpceBasis::SpceBasis(std::vector<Marginal> inputs, Latent latent, MultiIndexSet indices)
    : inputs_(std::move(inputs)), latent_(latent), indices_(std::move(indices)) {
    const auto m = inputs_.size();
    if (static_cast<std::size_t>(indices_.dim()) != m + 1)
        throw ShapeError("basis dimension must be the number of inputs plus one");
    if (!indices_.contains(MultiIndex(m + 1, 0))) throw ValidationError("basis lacks the constant term");

    families_.reserve(m + 1);
    for (std::size_t k = 0; k < m; ++k)
        families_.push_back(family_for_marginal(inputs_[k], std::max(1, indices_.max_degree(static_cast<int>(k)))));
    families_.push_back(family_for_marginal(latent_marginal(latent_), std::max(1, indices_.max_degree(static_cast<int>(m)))));

    latent_degree_.reserve(indices_.size());
    for (std::size_t j = 0; j < indices_.size(); ++j) {
        const int d = indices_[j].back();
        latent_degree_.push_back(d);
        max_latent_degree_ = std::max(max_latent_degree_, d);
        if (d == 0) mean_positions_.push_back(j);
    }
}

void SpceBasis::check_point(std::span<const double> x) const {
    if (x.size() != inputs_.size())
        throw ShapeError("point has " + std::to_string(x.size()) + " coordinates, model has " +
                         std::to_string(inputs_.size()) + " inputs");
    for (std::size_t k = 0; k < x.size(); ++k)
        if (!inputs_[k].in_support(x[k]))
            throw DomainError("coordinate " + std::to_string(k + 1) + " = " + std::to_string(x[k]) +
                              " lies outside the input support");
}

void SpceBasis::input_design_row(std::span<const double> x, std::span<double> out) const {
    const auto m = inputs_.size();
    thread_local std::vector<std::vector<double>> values;
    values.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        values[k].resize(static_cast<std::size_t>(families_[k].max_degree()) + 1);
        families_[k].eval_all(x[k], values[k]);
    }
    for (std::size_t j = 0; j < indices_.size(); ++j) {
        double v = 1.0;
        const auto& a = indices_[j];
        for (std::size_t k = 0; k < m; ++k)
            if (a[k] != 0) v *= values[k][static_cast<std::size_t>(a[k])];
        out[j] = v;
    }
}

Eigen::MatrixXd SpceBasis::input_design(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.cols()) != inputs_.size()) throw ShapeError("input matrix has wrong column count");
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(indices_.size()));
    std::vector<double> row(static_cast<std::size_t>(x.cols())), vals(indices_.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) row[static_cast<std::size_t>(k)] = x(i, k);
        input_design_row(row, vals);
        for (std::size_t j = 0; j < vals.size(); ++j) out(i, static_cast<Eigen::Index>(j)) = vals[j];
    }
    return out;
}

int default_quadrature_points(int max_latent_degree) noexcept {
    return std::max(32, 2 * (max_latent_degree + 1));
}

QuadratureRule latent_rule(Latent latent, int n_points) {
    return gauss_rule(family_for_marginal(latent_marginal(latent), n_points), n_points);
}

SpceModel::SpceModel(SpceBasis basis, Eigen::VectorXd coefficients, double sigma, nlohmann::json fit_info)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)), sigma_(sigma), fit_info_(std::move(fit_info)) {
    if (static_cast<std::size_t>(coefficients_.size()) != basis_.size())
        throw ShapeError("coefficient count does not match basis size");
    if (!coefficients_.allFinite()) throw ValidationError("coefficients must be finite");
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw ValidationError("sigma must be positive and finite");
}

Eigen::VectorXd SpceModel::latent_polynomial(std::span<const double> x) const {
    basis_.check_point(x);
    std::vector<double> vals(basis_.size());
    basis_.input_design_row(x, vals);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(basis_.max_latent_degree() + 1);
    for (std::size_t j = 0; j < vals.size(); ++j)
        b[basis_.latent_degrees()[j]] += coefficients_[static_cast<Eigen::Index>(j)] * vals[j];
    return b;
}

nlohmann::json model_to_json(const SpceModel& model) {
    const auto& basis = model.basis();
    nlohmann::json transform = nlohmann::json::array();
    for (const auto& m : basis.inputs()) transform.push_back({{"shift", m.shift()}, {"scale", m.scale()}});
    std::vector<double> coefs(model.coefficients().data(), model.coefficients().data() + model.coefficients().size());
    return {{"version", kModelFormatVersion},
            {"input_marginals", basis.inputs()},
            {"transform", transform},
            {"latent", to_string(basis.latent())},
            {"basis", basis.indices()},
            {"coefficients", coefs},
            {"sigma", model.sigma()},
            {"fit", model.fit_info()}};
}

SpceModel model_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw ValidationError("model document must be a JSON object");
        if (j.at("version").get<int>() != kModelFormatVersion)
            throw ValidationError("unsupported model version " + j.at("version").dump());
        std::vector<Marginal> inputs;
        for (const auto& m : j.at("input_marginals")) inputs.push_back(marginal_from_json(m));
        for (const auto& m : inputs)
            if (m.kind() == MarginalKind::custom) throw ValidationError("models only support uniform/normal inputs");
        const auto& transform = j.at("transform");
        if (transform.size() != inputs.size()) throw ValidationError("transform length mismatch");
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            const double shift = transform[k].at("shift").get<double>();
            const double scale = transform[k].at("scale").get<double>();
            if (std::abs(shift - inputs[k].shift()) > 1e-12 * (1.0 + std::abs(shift)) ||
                std::abs(scale - inputs[k].scale()) > 1e-12 * std::abs(scale))
                throw ValidationError("transform inconsistent with marginal " + std::to_string(k + 1));
        }
        auto set = multi_index_set_from_json(j.at("basis"));
        for (const auto& a : set)
            if (quasi_norm(a, set.q()) > set.p() + 1e-12)
                throw ValidationError("basis element exceeds its (p, q) truncation");
        const auto coefs = j.at("coefficients").get<std::vector<double>>();
        Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
        SpceBasis basis(std::move(inputs), latent_from_string(j.at("latent").get<std::string>()), std::move(set));
        return SpceModel(std::move(basis), std::move(c), j.at("sigma").get<double>(), j.value("fit", nlohmann::json::object()));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed model document: ") + e.what());
    } catch (const Error& e) {
        throw ValidationError(std::string("invalid model: ") + e.what());
    }
}

}  // namespace spce
