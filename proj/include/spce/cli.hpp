#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spce/fit.hpp"
#include "spce/marginal.hpp"
#include "spce/simulators.hpp"

namespace spce::cli {

// One experiment: data source, candidate grid, benchmark ladder and output
// location. Either `simulator` or `dataset` must be set.
struct ExperimentConfig {
    std::optional<SimulatorId> simulator;
    std::filesystem::path dataset;     // CSV or JSON; CSV needs `marginals`
    std::vector<Marginal> marginals;

    std::size_t n = 100;               // design size for cmd_fit
    std::vector<std::size_t> ladder;   // design sizes for cmd_benchmark
    std::size_t replicates = 1;

    std::vector<int> degrees{1, 2, 3, 4, 5};
    std::vector<double> qnorms{0.5, 0.75, 1.0};
    std::vector<Latent> latents{Latent::normal, Latent::uniform};
    int quadrature_points = 0;         // 0: default rule size

    std::size_t test_size = 1000;
    std::size_t reference_replications = 10000;  // non-analytic simulators
    std::size_t surrogate_samples = 10000;
    std::size_t u_levels = 1000;
    std::size_t variance_draws = 100000;         // Monte Carlo Var(Y)

    std::uint64_t seed = 0;
    std::filesystem::path out = "out";
    unsigned jobs = 1;

    // Throws ConfigError on out-of-range values or missing files.
    void validate() const;
    AdaptiveConfig adaptive(std::uint64_t seed) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

// Reads a JSON config; relative dataset paths resolve against the config's
// directory.
nlohmann::json read_config_json(const std::filesystem::path& path);
// `key=value` with the value parsed as JSON, or taken as a string if that fails.
void apply_override(nlohmann::json& j, const std::string& assignment);

// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

Dataset load_or_generate(const ExperimentConfig& config);

struct FitArtifacts {
    nlohmann::json model;
    nlohmann::json report;
};
FitArtifacts run_fit(const ExperimentConfig& config);
// Writes model.json and report.json into config.out.
void cmd_fit(const ExperimentConfig& config);

SpceModel load_model(const std::filesystem::path& path);

// CSV with a single column "y".
std::string cmd_sample(const SpceModel& model, const std::optional<std::vector<double>>& x, std::size_t n,
                       std::uint64_t seed);

struct BenchmarkRow {
    std::string simulator;
    std::size_t n = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    double oracle_epsilon = 0.0;
    double baseline_epsilon = 0.0;  // empirical training outputs at every x
    double sigma = 0.0;
    double eps_loo = 0.0;
    std::string latent;
    int p = 0;
    double q = 0.0;
    std::string status = "ok";
    // Over the selected trace and every scored candidate: smallest
    // sigma / sqrt(eps_loo) and largest sigma^2 / eps_loo.
    double min_sigma_ratio = 0.0;
    double max_sigma2_ratio = 0.0;
    double fit_seconds = 0.0;
    double total_seconds = 0.0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;  // canonical (N, replicate) order
    double var_y = 0.0;
    nlohmann::json summary;
};

// Seed of replicate r at design size n.
std::uint64_t replicate_seed(std::uint64_t master, std::size_t n, std::size_t r);

BenchmarkRow run_replicate(const ExperimentConfig& config, const Simulator& sim, std::size_t n, std::size_t r,
                           double var_y);
BenchmarkResult run_benchmark(const ExperimentConfig& config,
                              const std::function<void(const BenchmarkRow&)>& progress = {});
std::string errors_csv(const BenchmarkResult& result);
std::string runtime_csv(const BenchmarkResult& result);
// Writes errors.csv, summary.json and runtime.csv into config.out.
void cmd_benchmark(const ExperimentConfig& config, std::ostream* log = nullptr);

// Command-line entry point. Returns 0 on success, 1 on runtime failure and
// 2 on usage or configuration errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spce::cli
