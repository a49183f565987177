#include "spce/marginal.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "spce/errors.hpp"

namespace spce {

Marginal Marginal::uniform(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw ConfigError("uniform marginal needs finite a < b");
    return Marginal(MarginalKind::uniform, a, b, 0.5 * (a + b), 0.5 * (b - a));
}

Marginal Marginal::normal(double mean, double stddev) {
    if (!(stddev > 0.0) || !std::isfinite(mean) || !std::isfinite(stddev))
        throw ConfigError("normal marginal needs a finite mean and stddev > 0");
    return Marginal(MarginalKind::normal, mean, stddev, mean, stddev);
}

Marginal Marginal::custom(double lower, double upper) {
    if (!(lower < upper)) throw ConfigError("custom marginal needs lower < upper");
    return Marginal(MarginalKind::custom, lower, upper, 0.0, 1.0);
}

bool Marginal::in_support(double x) const noexcept {
    switch (kind_) {
        case MarginalKind::uniform:
        case MarginalKind::custom:
            return x >= p1_ && x <= p2_;
        case MarginalKind::normal:
            return std::isfinite(x);
    }
    return false;
}

double Marginal::pdf(double x) const {
    switch (kind_) {
        case MarginalKind::uniform:
            return in_support(x) ? 1.0 / (p2_ - p1_) : 0.0;
        case MarginalKind::normal:
            return std_normal_pdf((x - p1_) / p2_) / p2_;
        case MarginalKind::custom:
            break;
    }
    throw ConfigError("custom marginal has no density evaluator");
}

double Marginal::cdf(double x) const {
    switch (kind_) {
        case MarginalKind::uniform:
            if (x <= p1_) return 0.0;
            if (x >= p2_) return 1.0;
            return (x - p1_) / (p2_ - p1_);
        case MarginalKind::normal:
            return std_normal_cdf((x - p1_) / p2_);
        case MarginalKind::custom:
            break;
    }
    throw ConfigError("custom marginal has no distribution function");
}

double Marginal::inverse_cdf(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("probability outside [0, 1]");
    switch (kind_) {
        case MarginalKind::uniform:
            return p1_ + u * (p2_ - p1_);
        case MarginalKind::normal:
            return p1_ + p2_ * std_normal_quantile(u);
        case MarginalKind::custom:
            break;
    }
    throw ConfigError("custom marginal has no quantile function");
}

double Marginal::mean() const {
    switch (kind_) {
        case MarginalKind::uniform: return 0.5 * (p1_ + p2_);
        case MarginalKind::normal: return p1_;
        case MarginalKind::custom: break;
    }
    throw ConfigError("custom marginal has no closed-form mean");
}

double Marginal::variance() const {
    switch (kind_) {
        case MarginalKind::uniform: return (p2_ - p1_) * (p2_ - p1_) / 12.0;
        case MarginalKind::normal: return p2_ * p2_;
        case MarginalKind::custom: break;
    }
    throw ConfigError("custom marginal has no closed-form variance");
}

double Marginal::sample(Rng& rng) const {
    switch (kind_) {
        case MarginalKind::uniform:
            return std::uniform_real_distribution<double>(p1_, p2_)(rng);
        case MarginalKind::normal:
            return std::normal_distribution<double>(p1_, p2_)(rng);
        case MarginalKind::custom:
            break;
    }
    throw ConfigError("custom marginal cannot be sampled");
}

std::string Marginal::name() const {
    switch (kind_) {
        case MarginalKind::uniform: return "uniform";
        case MarginalKind::normal: return "normal";
        case MarginalKind::custom: return "custom";
    }
    return "unknown";
}

bool Marginal::operator==(const Marginal& o) const noexcept {
    return kind_ == o.kind_ && p1_ == o.p1_ && p2_ == o.p2_;
}

double std_normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_quantile(double u) {
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    if (u >= 1.0) return std::numeric_limits<double>::infinity();
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), u);
}

void to_json(nlohmann::json& j, const Marginal& m) {
    switch (m.kind()) {
        case MarginalKind::uniform:
            j = {{"type", "uniform"}, {"a", m.first()}, {"b", m.second()}};
            break;
        case MarginalKind::normal:
            j = {{"type", "normal"}, {"mean", m.first()}, {"stddev", m.second()}};
            break;
        case MarginalKind::custom:
            j = {{"type", "custom"}, {"lower", m.first()}, {"upper", m.second()}};
            break;
    }
}

Marginal marginal_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type")) throw ConfigError("marginal must be an object with a type");
    const auto type = j.at("type").get<std::string>();
    if (type == "uniform") return Marginal::uniform(j.at("a").get<double>(), j.at("b").get<double>());
    if (type == "normal") return Marginal::normal(j.at("mean").get<double>(), j.at("stddev").get<double>());
    if (type == "custom") return Marginal::custom(j.at("lower").get<double>(), j.at("upper").get<double>());
    throw ConfigError("unsupported marginal type '" + type + "'");
}

}  // namespace spce
