#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <span>
#include <vector>

#include "spce/orthopoly.hpp"

namespace spce {

using MultiIndex = std::vector<int>;

// Graded order: total degree first, then lexicographic with larger leading
// entries first, so (1,0) precedes (0,1).
bool canonical_less(const MultiIndex& a, const MultiIndex& b) noexcept;

double quasi_norm(const MultiIndex& alpha, double q) noexcept;

// Ordered, duplicate-free set of multi-indices. The last slot of each index
// is the latent-variable degree when the set describes an SPCE basis.
class MultiIndexSet {
public:
    MultiIndexSet(int dim, int p, double q, std::vector<MultiIndex> indices);

    int dim() const noexcept { return dim_; }
    int p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    std::size_t size() const noexcept { return indices_.size(); }
    const MultiIndex& operator[](std::size_t i) const noexcept { return indices_[i]; }
    const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
    auto begin() const noexcept { return indices_.begin(); }
    auto end() const noexcept { return indices_.end(); }

    bool contains(const MultiIndex& alpha) const;
    // Position of alpha, or size() if absent.
    std::size_t find(const MultiIndex& alpha) const;
    int max_degree(int slot) const noexcept;

    MultiIndexSet subset(std::span<const std::size_t> positions) const;
    MultiIndexSet merged(const MultiIndexSet& other) const;

    bool operator==(const MultiIndexSet& other) const noexcept { return indices_ == other.indices_; }

private:
    int dim_;
    int p_;
    double q_;
    std::vector<MultiIndex> indices_;
};

// All alpha with ||alpha||_q <= p (1e-12 slack on the shell).
MultiIndexSet hyperbolic_set(int p, double q, int dim);

// Members whose latent (last) degree is zero.
MultiIndexSet mean_subset(const MultiIndexSet& set);

// Members with nonzero latent degree.
MultiIndexSet latent_subset(const MultiIndexSet& set);

// Psi(i, j) = prod_k phi^(k)_{alpha_jk}(points(i, k)).
Eigen::MatrixXd eval_design_matrix(const MultiIndexSet& set, std::span<const PolyFamily> families,
                                   const Eigen::MatrixXd& points);

void to_json(nlohmann::json& j, const MultiIndexSet& set);
MultiIndexSet multi_index_set_from_json(const nlohmann::json& j);

}  // namespace spce
