#pragma once

#include <Eigen/Dense>

#include <functional>

namespace spce {

struct BfgsOptions {
    int max_iterations = 500;
    double gradient_tol = 1e-6;       // sup-norm
    double relative_change_tol = 1e-10;
    int max_backtracks = 60;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    bool cap_hit = false;
};

// Objective returns f(x) and writes grad f(x) into its second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Quasi-Newton minimization with an inverse-Hessian BFGS update and an
// Armijo backtracking line search. Non-finite trial values shrink the step;
// if no finite value is found the search throws OptimizationError.
BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& options = {});

}  // namespace spce
