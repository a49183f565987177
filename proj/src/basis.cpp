#include "spce/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spce/errors.hpp"

namespace spce {

namespace {

constexpr double kShellTol = 1e-12;

int total_degree(const MultiIndex& a) noexcept { return std::accumulate(a.begin(), a.end(), 0); }

void enumerate(int slot, int dim, int p, double q, MultiIndex& current, std::vector<MultiIndex>& out) {
    if (slot == dim) {
        if (quasi_norm(current, q) <= p + kShellTol) out.push_back(current);
        return;
    }
    for (int d = 0; d <= p; ++d) {
        current[static_cast<std::size_t>(slot)] = d;
        // Partial norms only grow with more nonzero slots.
        if (quasi_norm(current, q) > p + kShellTol) break;
        enumerate(slot + 1, dim, p, q, current, out);
    }
    current[static_cast<std::size_t>(slot)] = 0;
}

}  // namespace

bool canonical_less(const MultiIndex& a, const MultiIndex& b) noexcept {
    const int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

double quasi_norm(const MultiIndex& alpha, double q) noexcept {
    double s = 0.0;
    for (int a : alpha)
        if (a > 0) s += std::pow(static_cast<double>(a), q);
    return s == 0.0 ? 0.0 : std::pow(s, 1.0 / q);
}

MultiIndexSet::MultiIndexSet(int dim, int p, double q, std::vector<MultiIndex> indices)
    : dim_(dim), p_(p), q_(q), indices_(std::move(indices)) {
    if (dim_ < 1) throw ConfigError("multi-index dimension must be >= 1");
    for (const auto& a : indices_) {
        if (static_cast<int>(a.size()) != dim_) throw ShapeError("multi-index has wrong dimension");
        if (std::any_of(a.begin(), a.end(), [](int v) { return v < 0; }))
            throw ValidationError("multi-index entries must be nonnegative");
    }
    std::sort(indices_.begin(), indices_.end(), canonical_less);
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
        throw ValidationError("duplicate multi-index");
}

std::size_t MultiIndexSet::find(const MultiIndex& alpha) const {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), alpha, canonical_less);
    if (it != indices_.end() && *it == alpha) return static_cast<std::size_t>(it - indices_.begin());
    return indices_.size();
}

bool MultiIndexSet::contains(const MultiIndex& alpha) const { return find(alpha) < indices_.size(); }

int MultiIndexSet::max_degree(int slot) const noexcept {
    int m = 0;
    for (const auto& a : indices_) m = std::max(m, a[static_cast<std::size_t>(slot)]);
    return m;
}

MultiIndexSet MultiIndexSet::subset(std::span<const std::size_t> positions) const {
    std::vector<MultiIndex> out;
    out.reserve(positions.size());
    for (auto pos : positions) {
        if (pos >= indices_.size()) throw BoundsError("subset position out of range");
        out.push_back(indices_[pos]);
    }
    return MultiIndexSet(dim_, p_, q_, std::move(out));
}

MultiIndexSet MultiIndexSet::merged(const MultiIndexSet& other) const {
    if (other.dim_ != dim_) throw ShapeError("cannot merge multi-index sets of different dimension");
    std::vector<MultiIndex> out;
    std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                   std::back_inserter(out), canonical_less);
    return MultiIndexSet(dim_, std::max(p_, other.p_), std::max(q_, other.q_), std::move(out));
}

MultiIndexSet hyperbolic_set(int p, double q, int dim) {
    if (p < 0) throw ConfigError("degree p must be nonnegative");
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("q-norm must lie in (0, 1]");
    if (dim < 1) throw ConfigError("dimension must be >= 1");
    std::vector<MultiIndex> out;
    MultiIndex current(static_cast<std::size_t>(dim), 0);
    enumerate(0, dim, p, q, current, out);
    return MultiIndexSet(dim, p, q, std::move(out));
}

MultiIndexSet mean_subset(const MultiIndexSet& set) {
    std::vector<MultiIndex> out;
    for (const auto& a : set)
        if (a.back() == 0) out.push_back(a);
    return MultiIndexSet(set.dim(), set.p(), set.q(), std::move(out));
}

MultiIndexSet latent_subset(const MultiIndexSet& set) {
    std::vector<MultiIndex> out;
    for (const auto& a : set)
        if (a.back() != 0) out.push_back(a);
    return MultiIndexSet(set.dim(), set.p(), set.q(), std::move(out));
}

Eigen::MatrixXd eval_design_matrix(const MultiIndexSet& set, std::span<const PolyFamily> families,
                                   const Eigen::MatrixXd& points) {
    const auto dim = static_cast<std::size_t>(set.dim());
    if (families.size() != dim) throw ShapeError("need one polynomial family per basis dimension");
    if (static_cast<std::size_t>(points.cols()) != dim)
        throw ShapeError("points have " + std::to_string(points.cols()) + " columns, basis needs " +
                         std::to_string(dim));

    std::vector<int> degree(dim);
    for (std::size_t k = 0; k < dim; ++k) degree[k] = set.max_degree(static_cast<int>(k));

    Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(set.size()));
    std::vector<std::vector<double>> values(dim);
    for (std::size_t k = 0; k < dim; ++k) values[k].resize(static_cast<std::size_t>(degree[k]) + 1);

    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (std::size_t k = 0; k < dim; ++k)
            families[k].eval_all(points(i, static_cast<Eigen::Index>(k)), values[k]);
        for (std::size_t j = 0; j < set.size(); ++j) {
            double v = 1.0;
            const auto& a = set[j];
            for (std::size_t k = 0; k < dim; ++k)
                if (a[k] != 0) v *= values[k][static_cast<std::size_t>(a[k])];
            out(i, static_cast<Eigen::Index>(j)) = v;
        }
    }
    return out;
}

void to_json(nlohmann::json& j, const MultiIndexSet& set) {
    j = {{"dim", set.dim()}, {"p", set.p()}, {"q", set.q()}, {"indices", set.indices()}};
}

MultiIndexSet multi_index_set_from_json(const nlohmann::json& j) {
    return MultiIndexSet(j.at("dim").get<int>(), j.at("p").get<int>(), j.at("q").get<double>(),
                         j.at("indices").get<std::vector<MultiIndex>>());
}

}  // namespace spce
