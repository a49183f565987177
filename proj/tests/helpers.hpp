#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "spce/dataset.hpp"
#include "spce/model.hpp"
#include "spce/postproc.hpp"

namespace spce::testing {

inline std::vector<Marginal> mixed_marginals(std::size_t m) {
    std::vector<Marginal> out;
    for (std::size_t k = 0; k < m; ++k)
        out.push_back(k % 2 == 0 ? Marginal::uniform(0.0, 1.0 + static_cast<double>(k)) : Marginal::normal(0.5, 2.0));
    return out;
}

inline Eigen::MatrixXd sample_inputs(const std::vector<Marginal>& ms, std::size_t n, std::mt19937_64& rng) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ms.size()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = ms[static_cast<std::size_t>(k)].sample(rng);
    return x;
}

inline Eigen::VectorXd random_coefficients(std::size_t n, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, scale);
    Eigen::VectorXd c(static_cast<Eigen::Index>(n));
    for (auto& v : c) v = d(rng);
    return c;
}

// Data drawn from a known SPCE.
inline Dataset sample_from_model(const SpceModel& model, std::size_t n, std::mt19937_64& rng) {
    Dataset d;
    d.marginals = model.basis().inputs();
    d.inputs = sample_inputs(d.marginals, n, rng);
    d.outputs.resize(static_cast<Eigen::Index>(n));
    std::vector<double> x(d.marginals.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = d.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        d.outputs[static_cast<Eigen::Index>(i)] = sample_conditional(model, x, 1, rng())[0];
    }
    return d;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double a : v) s += a;
    return s / static_cast<double>(v.size());
}

inline double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0;
    for (double a : v) s += (a - m) * (a - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace spce::testing
