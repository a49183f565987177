#include "spce/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "spce/errors.hpp"

namespace spce {

Dataset Dataset::rows(std::span<const std::size_t> which) const {
    Dataset out;
    out.inputs.resize(static_cast<Eigen::Index>(which.size()), inputs.cols());
    out.outputs.resize(static_cast<Eigen::Index>(which.size()));
    for (std::size_t k = 0; k < which.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(which[k]);
        out.inputs.row(static_cast<Eigen::Index>(k)) = inputs.row(r);
        out.outputs[static_cast<Eigen::Index>(k)] = outputs[r];
    }
    out.marginals = marginals;
    out.seed = seed;
    out.source = source;
    return out;
}

void Dataset::validate() const {
    if (inputs.rows() != outputs.size()) throw ShapeError("dataset needs exactly one output per input row");
    if (marginals.size() != static_cast<std::size_t>(inputs.cols()))
        throw ShapeError("dataset needs one marginal per input column");
    if (!outputs.allFinite() || !inputs.allFinite()) throw ValidationError("dataset contains non-finite values");
    for (Eigen::Index i = 0; i < inputs.rows(); ++i)
        for (Eigen::Index k = 0; k < inputs.cols(); ++k)
            if (!marginals[static_cast<std::size_t>(k)].in_support(inputs(i, k)))
                throw ValidationError("input row " + std::to_string(i + 1) + " lies outside marginal support");
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << std::setprecision(17);
    for (std::size_t k = 0; k < data.n_inputs(); ++k) out << 'x' << (k + 1) << ',';
    out << "y\n";
    for (Eigen::Index i = 0; i < data.outputs.size(); ++i) {
        for (Eigen::Index k = 0; k < data.inputs.cols(); ++k) out << data.inputs(i, k) << ',';
        out << data.outputs[i] << '\n';
    }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("dataset " + path.string() + " is empty");
    const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (columns < 1) throw ValidationError("dataset header has no columns");

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw ValidationError("non-numeric cell on line " + std::to_string(line_no));
            }
        }
        if (row.size() != columns) throw ValidationError("wrong column count on line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }

    Dataset data;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(columns - 1);
    data.inputs.resize(n, m);
    data.outputs.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < m; ++k) data.inputs(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        data.outputs[i] = rows[static_cast<std::size_t>(i)].back();
    }
    data.source = path.string();
    return data;
}

void to_json(nlohmann::json& j, const Dataset& data) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(data.inputs.cols()));
        for (Eigen::Index k = 0; k < data.inputs.cols(); ++k) r[static_cast<std::size_t>(k)] = data.inputs(i, k);
        rows.push_back(r);
    }
    std::vector<double> y(data.outputs.data(), data.outputs.data() + data.outputs.size());
    j = {{"marginals", data.marginals}, {"inputs", rows}, {"outputs", y}, {"seed", data.seed}, {"source", data.source}};
}

Dataset dataset_from_json(const nlohmann::json& j) {
    Dataset data;
    for (const auto& m : j.at("marginals")) data.marginals.push_back(marginal_from_json(m));
    const auto rows = j.at("inputs").get<std::vector<std::vector<double>>>();
    const auto y = j.at("outputs").get<std::vector<double>>();
    const auto m = static_cast<Eigen::Index>(data.marginals.size());
    data.inputs.resize(static_cast<Eigen::Index>(rows.size()), m);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != m) throw ShapeError("dataset row has wrong length");
        for (Eigen::Index k = 0; k < m; ++k) data.inputs(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    }
    data.outputs = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    data.seed = j.value("seed", std::uint64_t{0});
    data.source = j.value("source", std::string{});
    data.validate();
    return data;
}

}  // namespace spce
