#include "spce/linreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spce/errors.hpp"

namespace spce {

namespace {

constexpr double kRcondThreshold = 1e-12;

}  // namespace

OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    const Eigen::Index n = design.rows(), p = design.cols();
    if (y.size() != n) throw ShapeError("design and response have different row counts");
    if (p == 0) throw ShapeError("design has no columns");
    if (n < p) throw ConditioningError("fewer observations than columns", {});

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(kRcondThreshold);
    if (qr.rank() < p) {
        std::vector<std::size_t> bad;
        for (Eigen::Index k = qr.rank(); k < p; ++k)
            bad.push_back(static_cast<std::size_t>(qr.colsPermutation().indices()[k]));
        std::sort(bad.begin(), bad.end());
        std::string msg = "rank-deficient design; offending columns:";
        for (auto c : bad) msg += " " + std::to_string(c);
        throw ConditioningError(msg, std::move(bad));
    }

    OlsFit fit;
    fit.coefficients = qr.solve(y);
    fit.selected.resize(static_cast<std::size_t>(p));
    std::iota(fit.selected.begin(), fit.selected.end(), std::size_t{0});

    // h_ii = ||row_i(A P R^{-1})||^2 with A P = Q R.
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    Eigen::MatrixXd q1 = design * qr.colsPermutation();
    r.triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(q1);
    const Eigen::VectorXd resid = y - design * fit.coefficients;

    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = q1.row(i).squaredNorm();
        const double denom = 1.0 - h;
        if (denom <= 1e-12) {
            acc = std::numeric_limits<double>::infinity();
            break;
        }
        const double e = resid[i] / denom;
        acc += e * e;
    }
    fit.eps_loo = acc / static_cast<double>(n);
    return fit;
}

OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, std::span<const std::size_t> columns) {
    Eigen::MatrixXd sub(design.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k)
        sub.col(static_cast<Eigen::Index>(k)) = design.col(static_cast<Eigen::Index>(columns[k]));
    OlsFit fit = ols_fit(sub, y);
    fit.selected.assign(columns.begin(), columns.end());
    return fit;
}

double loo_by_refitting(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    const Eigen::Index n = design.rows();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::MatrixXd a(n - 1, design.cols());
        Eigen::VectorXd b(n - 1);
        for (Eigen::Index r = 0, k = 0; r < n; ++r) {
            if (r == i) continue;
            a.row(k) = design.row(r);
            b[k++] = y[r];
        }
        const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
        const double e = y[i] - design.row(i).dot(c);
        acc += e * e;
    }
    return acc / static_cast<double>(n);
}

std::vector<std::size_t> lar_path(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                  std::size_t constant_column, std::size_t max_steps,
                                  std::vector<std::size_t>* dropped) {
    const Eigen::Index n = design.rows();
    std::vector<std::size_t> columns;
    for (Eigen::Index j = 0; j < design.cols(); ++j)
        if (static_cast<std::size_t>(j) != constant_column) columns.push_back(static_cast<std::size_t>(j));

    // Centered, unit-norm predictors; zero-variance ones are set aside.
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(columns.size()));
    std::vector<std::size_t> kept;
    for (auto c : columns) {
        Eigen::VectorXd col = design.col(static_cast<Eigen::Index>(c));
        col.array() -= col.mean();
        const double norm = col.norm();
        if (norm <= 1e-12 * std::sqrt(static_cast<double>(n)) * (1.0 + design.col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff())) {
            if (dropped) dropped->push_back(c);
            continue;
        }
        x.col(static_cast<Eigen::Index>(kept.size())) = col / norm;
        kept.push_back(c);
    }
    x.conservativeResize(n, static_cast<Eigen::Index>(kept.size()));
    const Eigen::Index p = x.cols();

    Eigen::VectorXd resid = y.array() - y.mean();
    const double scale = resid.norm();
    std::vector<std::size_t> order;
    if (p == 0 || scale == 0.0) return order;

    std::vector<bool> active(static_cast<std::size_t>(p), false);
    std::vector<Eigen::Index> act;
    Eigen::VectorXd corr = x.transpose() * resid;
    {
        Eigen::Index j;
        corr.cwiseAbs().maxCoeff(&j);
        act.push_back(j);
        active[static_cast<std::size_t>(j)] = true;
    }

    const std::size_t steps = std::min<std::size_t>(max_steps, static_cast<std::size_t>(p));
    while (true) {
        corr = x.transpose() * resid;
        const double c_max = corr(act.front()) == 0.0 ? 0.0 : std::abs(corr(act.front()));
        if (c_max <= 1e-12 * scale) break;
        order.push_back(kept[static_cast<std::size_t>(act.back())]);
        if (order.size() >= steps) break;

        const auto k = static_cast<Eigen::Index>(act.size());
        Eigen::MatrixXd xa(n, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const double s = corr(act[static_cast<std::size_t>(a)]) >= 0.0 ? 1.0 : -1.0;
            xa.col(a) = s * x.col(act[static_cast<std::size_t>(a)]);
        }
        const Eigen::MatrixXd gram = xa.transpose() * xa;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success || ldlt.rcond() < kRcondThreshold) break;
        const Eigen::VectorXd ginv1 = ldlt.solve(Eigen::VectorXd::Ones(k));
        const double denom = ginv1.sum();
        if (!(denom > 0.0)) break;
        const double a_norm = 1.0 / std::sqrt(denom);
        const Eigen::VectorXd u = xa * (a_norm * ginv1);
        const Eigen::VectorXd a = x.transpose() * u;

        double gamma = c_max / a_norm;
        Eigen::Index next = -1;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (active[static_cast<std::size_t>(j)]) continue;
            for (double g : {(c_max - corr(j)) / (a_norm - a(j)), (c_max + corr(j)) / (a_norm + a(j))}) {
                if (g > 1e-14 && g < gamma) {
                    gamma = g;
                    next = j;
                }
            }
        }
        resid -= gamma * u;
        if (next < 0) break;  // full least-squares solution reached
        act.push_back(next);
        active[static_cast<std::size_t>(next)] = true;
    }
    return order;
}

OlsFit hybrid_lar(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const MultiIndexSet& candidates) {
    const Eigen::Index n = design.rows();
    if (static_cast<std::size_t>(design.cols()) != candidates.size())
        throw ShapeError("design columns do not match candidate set");
    if (y.size() != n) throw ShapeError("design and response have different row counts");
    if (n < 2) throw ValidationError("hybrid LAR needs at least two observations");

    const std::size_t constant = candidates.find(MultiIndex(static_cast<std::size_t>(candidates.dim()), 0));
    if (constant == candidates.size()) throw ValidationError("candidate set lacks the constant term");

    const std::size_t cap = std::min<std::size_t>(static_cast<std::size_t>(n) - 1, candidates.size());
    std::vector<std::size_t> dropped;
    const auto order = lar_path(design, y, constant, cap > 0 ? cap - 1 : 0, &dropped);

    // Errors at round-off level count as ties so exact fits stay sparse.
    const double floor = 1e-24 * y.squaredNorm() / static_cast<double>(n);
    auto score = [floor](const OlsFit& f) { return std::max(f.eps_loo, floor); };

    std::vector<std::size_t> cols{constant};
    OlsFit best = ols_fit(design, y, cols);
    for (auto c : order) {
        cols.push_back(c);
        std::vector<std::size_t> sorted = cols;
        std::sort(sorted.begin(), sorted.end());
        try {
            OlsFit fit = ols_fit(design, y, sorted);
            if (score(fit) < score(best)) best = std::move(fit);
        } catch (const ConditioningError&) {
            break;
        }
    }
    best.dropped = std::move(dropped);
    return best;
}

}  // namespace spce
