#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spce/dataset.hpp"
#include "spce/likelihood.hpp"
#include "spce/linreg.hpp"
#include "spce/model.hpp"
#include "spce/optimize.hpp"

namespace spce {

struct FitOptions {
    int warm_levels = 5;          // sigma levels in the warm-start bridge
    int quadrature_points = 0;    // 0 selects default_quadrature_points()
    double sigma_lower = 0.05;    // search bracket, in units of sqrt(eps_loo)
    double sigma_upper = 1.0;
    int coarse_points = 4;
    int golden_evaluations = 12;
    double init_spread = 0.1;     // random init ~ U(-spread*sd(y), spread*sd(y))
    std::size_t n_folds = 0;      // 0 selects cv_fold_count()
    BfgsOptions bfgs;
};

QuadratureRule fit_rule(const SpceBasis& basis, const FitOptions& options);

struct MleResult {
    Eigen::VectorXd coefficients;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    bool cap_hit = false;
    std::size_t floored = 0;
};

// Maximizes the summed quadrature log-likelihood over c at fixed sigma. The
// optimizer works on c / sd(y) and the per-point mean, so the stopping
// tolerances do not depend on the output scale or on N.
MleResult mle_fit(const LikelihoodEvaluator& eval, double sigma, const Eigen::VectorXd& init,
                  const BfgsOptions& options = {});
MleResult mle_fit(const Dataset& data, double sigma, const SpceBasis& basis, const Eigen::VectorXd& init,
                  const FitOptions& options = {});

// Log-spaced levels from sqrt(eps_loo) to sigma_target, both ends exact.
// Collapses to a single level when the two coincide.
std::vector<double> warm_start_schedule(double eps_loo, double sigma_target, int levels);

// Mean-function coefficients on the zero-latent-degree positions, seeded
// uniform noise elsewhere. mean_fit.coefficients must align with
// basis.mean_positions().
Eigen::VectorXd initial_coefficients(const SpceBasis& basis, const OlsFit& mean_fit, double output_sd,
                                     std::uint64_t seed, double spread);

struct WarmStartResult {
    Eigen::VectorXd coefficients;
    std::vector<double> schedule;
    int mle_calls = 0;
    bool cap_hit = false;
};

WarmStartResult warm_start_fit(const LikelihoodEvaluator& eval, double sigma_target, Eigen::VectorXd init,
                               double eps_loo, const FitOptions& options = {});
WarmStartResult warm_start_fit(const Dataset& data, double sigma_target, const SpceBasis& basis,
                               const OlsFit& mean_fit, std::uint64_t seed, const FitOptions& options = {});

// 10 folds below 200 points, 5 below 1000, 3 otherwise.
std::size_t cv_fold_count(std::size_t n);

// Seeded permutation cut into contiguous blocks whose sizes differ by <= 1.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t n_folds, std::uint64_t seed);

// K-fold out-of-sample log-likelihood of a basis as a function of sigma.
// Fold training sets, mean fits and random initial coefficients are built
// once, so every sigma is scored from the same starting points.
class CrossValidator {
public:
    CrossValidator(const SpceBasis& basis, const Dataset& data, std::vector<std::vector<std::size_t>> folds,
                   std::uint64_t seed, FitOptions options = {});

    struct Score {
        double total = -std::numeric_limits<double>::infinity();
        std::vector<double> per_fold;
        std::size_t failed_folds = 0;
        std::size_t floored = 0;
    };

    Score score(double sigma) const;
    std::size_t n_folds() const noexcept { return folds_.size(); }

private:
    struct Fold {
        std::vector<std::size_t> test_rows;
        std::unique_ptr<LikelihoodEvaluator> train;
        std::unique_ptr<LikelihoodEvaluator> test;
        Eigen::VectorXd init;
        double eps_loo = 0.0;
    };

    FitOptions options_;
    std::vector<Fold> folds_;
};

double cv_sigma_score(double sigma, const Dataset& data, const SpceBasis& basis,
                      const std::vector<std::vector<std::size_t>>& folds, std::uint64_t seed,
                      const FitOptions& options = {});

struct SigmaSelection {
    double sigma = 0.0;
    double cv_score = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> trace;  // (sigma, cv score) in evaluation order
    Eigen::VectorXd coefficients;                  // refit on all data at sigma
    double eps_loo = 0.0;
    std::size_t n_folds = 0;
};

// Coarse log-grid then golden-section search for the CV-optimal sigma in
// [sigma_lower, sigma_upper] * sqrt(eps_loo), followed by a warm-start refit
// on the full data.
SigmaSelection select_sigma(const Dataset& data, const SpceBasis& basis, double eps_loo,
                            const std::vector<std::vector<std::size_t>>& folds, std::uint64_t seed,
                            const FitOptions& options = {});
SigmaSelection select_sigma(const Dataset& data, const SpceBasis& basis, double eps_loo, std::uint64_t seed,
                            const FitOptions& options = {});

struct AdaptiveConfig {
    std::vector<Latent> latents{Latent::normal, Latent::uniform};
    std::vector<int> degrees{1, 2, 3, 4, 5};
    std::vector<double> qnorms{0.5, 0.75, 1.0};
    std::uint64_t seed = 0;
    FitOptions options;
};

struct CandidateRecord {
    Latent latent = Latent::normal;
    int p = 0;
    double q = 0.0;
    std::size_t basis_size = 0;
    std::size_t mean_terms = 0;
    double eps_loo = 0.0;
    double sigma = 0.0;
    double cv_score = -std::numeric_limits<double>::infinity();
    bool reused = false;   // identical basis already scored for this latent
    std::string status = "ok";
};

struct FitReport {
    double cv_score = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> sigma_trace;
    Latent latent = Latent::normal;
    int p = 0;
    double q = 0.0;
    double sigma = 0.0;
    double eps_loo = 0.0;
    std::size_t n_folds = 0;
    std::uint64_t seed = 0;
    std::uint64_t fold_seed = 0;
    std::vector<CandidateRecord> candidates;
};

nlohmann::json report_to_json(const FitReport& report);

struct BuildResult {
    SpceModel model;
    FitReport report;
};

// Adaptive search over latent distribution, degree and q-norm with early
// stopping; returns the candidate with the highest CV score.
BuildResult adaptive_build(const Dataset& data, const AdaptiveConfig& config);

}  // namespace spce
