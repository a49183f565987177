#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "spce/rng.hpp"

namespace spce {

enum class MarginalKind { uniform, normal, custom };

// A univariate input distribution. Uniform and normal marginals carry an
// affine map onto their standardized form (U(-1,1) and N(0,1)); custom
// marginals are only described by their support and are not standardized.
class Marginal {
public:
    static Marginal uniform(double a, double b);
    static Marginal normal(double mean, double stddev);
    static Marginal custom(double lower, double upper);

    MarginalKind kind() const noexcept { return kind_; }
    // uniform: (a, b); normal: (mean, stddev); custom: (lower, upper)
    double first() const noexcept { return p1_; }
    double second() const noexcept { return p2_; }

    double to_standard(double x) const noexcept { return (x - shift_) / scale_; }
    double from_standard(double u) const noexcept { return shift_ + scale_ * u; }
    double shift() const noexcept { return shift_; }
    double scale() const noexcept { return scale_; }

    bool in_support(double x) const noexcept;
    double pdf(double x) const;
    double cdf(double x) const;
    double inverse_cdf(double u) const;
    double mean() const;
    double variance() const;

    double sample(Rng& rng) const;

    std::string name() const;
    bool operator==(const Marginal& other) const noexcept;

private:
    Marginal(MarginalKind kind, double p1, double p2, double shift, double scale)
        : kind_(kind), p1_(p1), p2_(p2), shift_(shift), scale_(scale) {}

    MarginalKind kind_;
    double p1_;
    double p2_;
    double shift_;
    double scale_;
};

// Standard normal helpers shared across modules.
double std_normal_pdf(double x) noexcept;
double std_normal_cdf(double x) noexcept;
double std_normal_quantile(double u);

void to_json(nlohmann::json& j, const Marginal& m);
Marginal marginal_from_json(const nlohmann::json& j);

}  // namespace spce
