#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spce/marginal.hpp"

namespace spce {

// Experimental design plus one simulator output per design point.
struct Dataset {
    Eigen::MatrixXd inputs;  // N x M
    Eigen::VectorXd outputs; // N
    std::vector<Marginal> marginals;
    std::uint64_t seed = 0;
    std::string source;

    std::size_t size() const noexcept { return static_cast<std::size_t>(outputs.size()); }
    std::size_t n_inputs() const noexcept { return static_cast<std::size_t>(inputs.cols()); }

    Dataset rows(std::span<const std::size_t> which) const;
    void validate() const;
};

// CSV with a header row; the last column is the output.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const Dataset& data);
Dataset dataset_from_json(const nlohmann::json& j);

}  // namespace spce
