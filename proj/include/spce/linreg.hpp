#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "spce/basis.hpp"

namespace spce {

struct OlsFit {
    Eigen::VectorXd coefficients;      // aligned with `selected`
    double eps_loo = 0.0;              // leave-one-out mean squared error
    std::vector<std::size_t> selected; // design columns kept, ascending
    std::vector<std::size_t> dropped;  // zero-variance columns ignored by hybrid_lar
};

// Least squares via column-pivoted QR. Columns whose pivot falls below a
// reciprocal-condition threshold of 1e-12 raise ConditioningError.
OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);

// OLS on a subset of design columns; `selected` of the result refers to
// the original column numbering.
OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, std::span<const std::size_t> columns);

// Leave-one-out error by literal refitting; O(N) least-squares solves. Kept
// as a cross-check of the hat-matrix shortcut.
double loo_by_refitting(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);

// Least-angle regression activation order over the non-constant columns.
std::vector<std::size_t> lar_path(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                  std::size_t constant_column, std::size_t max_steps,
                                  std::vector<std::size_t>* dropped = nullptr);

// Hybrid LAR: OLS refit of every prefix of the LAR path (constant always
// in), keeping the prefix with the smallest leave-one-out error.
OlsFit hybrid_lar(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const MultiIndexSet& candidates);

}  // namespace spce
