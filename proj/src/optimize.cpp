#include "spce/optimize.hpp"

#include <cmath>
#include <vector>

#include "spce/errors.hpp"

namespace spce {

namespace {

std::vector<double> as_vector(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

}  // namespace

BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& options) {
    const Eigen::Index n = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    Eigen::VectorXd g(n);
    res.value = f(res.x, g);
    if (!std::isfinite(res.value) || !g.allFinite())
        throw OptimizationError("objective is not finite at the starting point", as_vector(res.x));
    if (n == 0 || g.lpNorm<Eigen::Infinity>() < options.gradient_tol) {
        res.converged = true;
        return res;
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;
    Eigen::VectorXd x_new(n), g_new(n);

    for (int it = 0; it < options.max_iterations; ++it) {
        Eigen::VectorXd dir = -(h * g);
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            h.setIdentity();
            dir = -g;
            slope = -g.squaredNorm();
        }
        double step = 1.0;
        if (!scaled) step = std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>());

        double f_new = 0.0;
        bool accepted = false;
        bool finite_seen = false;
        for (int bt = 0; bt < options.max_backtracks; ++bt) {
            x_new = res.x + step * dir;
            f_new = f(x_new, g_new);
            const bool finite = std::isfinite(f_new) && g_new.allFinite();
            finite_seen = finite_seen || finite;
            if (finite && f_new <= res.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        res.iterations = it + 1;
        if (!accepted) {
            if (!finite_seen)
                throw OptimizationError("objective stayed non-finite along the search direction", as_vector(res.x));
            // No further decrease representable along this direction.
            res.converged = true;
            return res;
        }

        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = g_new - g;
        const double change = std::abs(res.value - f_new);
        const double f_old = res.value;
        res.x = x_new;
        res.value = f_new;
        g = g_new;

        if (g.lpNorm<Eigen::Infinity>() < options.gradient_tol ||
            change <= options.relative_change_tol * std::max(1.0, std::abs(f_old))) {
            res.converged = true;
            return res;
        }

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                h *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = h * y;
            // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
        }
    }
    res.cap_hit = true;
    return res;
}

}  // namespace spce
