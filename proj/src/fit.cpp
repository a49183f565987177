#include "spce/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>

#include "spce/errors.hpp"
#include "spce/rng.hpp"

namespace spce {

namespace {

double output_scale(const Eigen::VectorXd& y) {
    if (y.size() < 2) return 1.0;
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().sum() / static_cast<double>(y.size() - 1));
    return sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
}

Eigen::MatrixXd mean_columns(const SpceBasis& basis, const Eigen::MatrixXd& psi) {
    const auto& pos = basis.mean_positions();
    Eigen::MatrixXd out(psi.rows(), static_cast<Eigen::Index>(pos.size()));
    for (std::size_t k = 0; k < pos.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = psi.col(pos[k]);
    return out;
}

// OLS mean fit; a rank-deficient fold falls back to the minimum-norm
// solution with the in-sample residual as error estimate.
OlsFit mean_fit_or_fallback(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    try {
        return ols_fit(design, y);
    } catch (const ConditioningError&) {
        OlsFit fit;
        fit.coefficients = design.completeOrthogonalDecomposition().solve(y);
        fit.selected.resize(static_cast<std::size_t>(design.cols()));
        std::iota(fit.selected.begin(), fit.selected.end(), std::size_t{0});
        fit.eps_loo = (y - design * fit.coefficients).squaredNorm() / static_cast<double>(y.size());
        return fit;
    }
}

double log_space(double lo, double hi, int i, int n) {
    if (n <= 1) return hi;
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    return std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
}

}  // namespace

QuadratureRule fit_rule(const SpceBasis& basis, const FitOptions& options) {
    const int n = options.quadrature_points > 0 ? options.quadrature_points
                                                : default_quadrature_points(basis.max_latent_degree());
    return latent_rule(basis.latent(), n);
}

MleResult mle_fit(const LikelihoodEvaluator& eval, double sigma, const Eigen::VectorXd& init,
                  const BfgsOptions& options) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive and finite");
    if (static_cast<std::size_t>(init.size()) != eval.n_coefficients())
        throw ShapeError("initial coefficient vector has the wrong length");
    const double s = output_scale(eval.outputs());
    const double n = static_cast<double>(std::max<std::size_t>(eval.size(), 1));

    Eigen::VectorXd grad;
    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const auto r = eval.log_likelihood(s * x, sigma, &grad);
        g = -(s / n) * grad;
        return -r.value / n;
    };
    const BfgsResult opt = minimize_bfgs(objective, init / s, options);

    MleResult res;
    res.coefficients = s * opt.x;
    const auto final = eval.log_likelihood(res.coefficients, sigma);
    res.log_likelihood = final.value;
    res.floored = final.floored;
    res.iterations = opt.iterations;
    res.converged = opt.converged;
    res.cap_hit = opt.cap_hit;
    return res;
}

MleResult mle_fit(const Dataset& data, double sigma, const SpceBasis& basis, const Eigen::VectorXd& init,
                  const FitOptions& options) {
    const LikelihoodEvaluator eval(basis, data.inputs, data.outputs, fit_rule(basis, options));
    return mle_fit(eval, sigma, init, options.bfgs);
}

std::vector<double> warm_start_schedule(double eps_loo, double sigma_target, int levels) {
    if (!(sigma_target > 0.0)) throw DomainError("target sigma must be positive");
    const double start = eps_loo > 0.0 ? std::sqrt(eps_loo) : sigma_target;
    if (levels <= 1 || start == sigma_target) return {sigma_target};
    std::vector<double> out(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i) out[static_cast<std::size_t>(i)] = log_space(start, sigma_target, i, levels);
    out.front() = start;
    out.back() = sigma_target;
    return out;
}

Eigen::VectorXd initial_coefficients(const SpceBasis& basis, const OlsFit& mean_fit, double output_sd,
                                     std::uint64_t seed, double spread) {
    const auto& pos = basis.mean_positions();
    if (static_cast<std::size_t>(mean_fit.coefficients.size()) != pos.size())
        throw ShapeError("mean fit does not match the mean part of the basis");
    Eigen::VectorXd c(static_cast<Eigen::Index>(basis.size()));
    Rng rng = make_rng(seed);
    const double half = spread * (output_sd > 0.0 ? output_sd : 1.0);
    std::uniform_real_distribution<double> u(-half, half);
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = u(rng);
    for (std::size_t k = 0; k < pos.size(); ++k) c[static_cast<Eigen::Index>(pos[k])] = mean_fit.coefficients[static_cast<Eigen::Index>(k)];
    return c;
}

WarmStartResult warm_start_fit(const LikelihoodEvaluator& eval, double sigma_target, Eigen::VectorXd init,
                               double eps_loo, const FitOptions& options) {
    WarmStartResult res;
    res.schedule = warm_start_schedule(eps_loo, sigma_target, options.warm_levels);
    res.coefficients = std::move(init);
    for (std::size_t level = 0; level < res.schedule.size(); ++level) {
        const double sigma = res.schedule[level];
        MleResult step;
        try {
            step = mle_fit(eval, sigma, res.coefficients, options.bfgs);
        } catch (const OptimizationError& e) {
            throw OptimizationError("warm start level " + std::to_string(level + 1) + "/" +
                                        std::to_string(res.schedule.size()) + " (sigma " + std::to_string(sigma) +
                                        "): " + e.what(),
                                    e.last_iterate());
        }
        res.coefficients = step.coefficients;
        res.cap_hit = res.cap_hit || step.cap_hit;
        ++res.mle_calls;
    }
    return res;
}

WarmStartResult warm_start_fit(const Dataset& data, double sigma_target, const SpceBasis& basis,
                               const OlsFit& mean_fit, std::uint64_t seed, const FitOptions& options) {
    const LikelihoodEvaluator eval(basis, data.inputs, data.outputs, fit_rule(basis, options));
    const Eigen::VectorXd init =
        initial_coefficients(basis, mean_fit, output_scale(data.outputs), seed, options.init_spread);
    return warm_start_fit(eval, sigma_target, init, mean_fit.eps_loo, options);
}

std::size_t cv_fold_count(std::size_t n) {
    if (n < 200) return 10;
    if (n < 1000) return 5;
    return 3;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (n < n_folds) throw ValidationError("fewer data points than cross-validation folds");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng = make_rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> folds(n_folds);
    std::size_t start = 0;
    for (std::size_t k = 0; k < n_folds; ++k) {
        const std::size_t len = n / n_folds + (k < n % n_folds ? 1 : 0);
        folds[k].assign(perm.begin() + static_cast<std::ptrdiff_t>(start),
                        perm.begin() + static_cast<std::ptrdiff_t>(start + len));
        std::sort(folds[k].begin(), folds[k].end());
        start += len;
    }
    return folds;
}

CrossValidator::CrossValidator(const SpceBasis& basis, const Dataset& data,
                               std::vector<std::vector<std::size_t>> folds, std::uint64_t seed, FitOptions options)
    : options_(std::move(options)) {
    const QuadratureRule rule = fit_rule(basis, options_);
    const std::size_t n = data.size();
    std::vector<char> seen(n, 0);
    for (const auto& f : folds)
        for (auto i : f) {
            if (i >= n || seen[i]) throw ValidationError("folds must partition the data rows");
            seen[i] = 1;
        }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw ValidationError("folds must partition the data rows");

    folds_.reserve(folds.size());
    for (std::size_t k = 0; k < folds.size(); ++k) {
        Fold fold;
        fold.test_rows = std::move(folds[k]);
        if (fold.test_rows.empty()) throw ValidationError("cross-validation folds must not be empty");
        std::sort(fold.test_rows.begin(), fold.test_rows.end());
        std::vector<std::size_t> train_rows;
        train_rows.reserve(n - fold.test_rows.size());
        std::size_t t = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (t < fold.test_rows.size() && fold.test_rows[t] == i) {
                ++t;
                continue;
            }
            train_rows.push_back(i);
        }
        const Dataset train = data.rows(train_rows);
        const Dataset test = data.rows(fold.test_rows);
        fold.train = std::make_unique<LikelihoodEvaluator>(basis, train.inputs, train.outputs, rule);
        fold.test = std::make_unique<LikelihoodEvaluator>(basis, test.inputs, test.outputs, rule);
        const OlsFit mf = mean_fit_or_fallback(mean_columns(basis, fold.train->input_design()), train.outputs);
        fold.eps_loo = mf.eps_loo;
        // Keyed by the fold's smallest row so relabelling folds changes nothing.
        const std::uint64_t fold_seed = derive_seed(seed, {fold.test_rows.front()});
        fold.init = initial_coefficients(basis, mf, output_scale(train.outputs), fold_seed, options_.init_spread);
        folds_.push_back(std::move(fold));
    }
}

CrossValidator::Score CrossValidator::score(double sigma) const {
    Score s;
    s.total = 0.0;
    s.per_fold.reserve(folds_.size());
    for (const auto& fold : folds_) {
        double value = -std::numeric_limits<double>::infinity();
        try {
            const auto fit = warm_start_fit(*fold.train, sigma, fold.init, fold.eps_loo, options_);
            const auto r = fold.test->log_likelihood(fit.coefficients, sigma);
            value = r.value;
            s.floored += r.floored;
        } catch (const NumericalError&) {
            ++s.failed_folds;
        }
        s.per_fold.push_back(value);
        s.total += value;
    }
    return s;
}

double cv_sigma_score(double sigma, const Dataset& data, const SpceBasis& basis,
                      const std::vector<std::vector<std::size_t>>& folds, std::uint64_t seed,
                      const FitOptions& options) {
    return CrossValidator(basis, data, folds, seed, options).score(sigma).total;
}

SigmaSelection select_sigma(const Dataset& data, const SpceBasis& basis, double eps_loo,
                            const std::vector<std::vector<std::size_t>>& folds, std::uint64_t seed,
                            const FitOptions& options) {
    if (!(eps_loo > 0.0) || !std::isfinite(eps_loo))
        throw SelectionError("leave-one-out error of the mean fit must be positive and finite");
    if (!(options.sigma_lower > 0.0) || !(options.sigma_upper > options.sigma_lower))
        throw ConfigError("sigma bracket must satisfy 0 < lower < upper");
    if (options.coarse_points < 2) throw ConfigError("sigma search needs at least 2 coarse points");

    const CrossValidator cv(basis, data, folds, derive_seed(seed, {1}), options);
    SigmaSelection sel;
    sel.eps_loo = eps_loo;
    sel.n_folds = cv.n_folds();

    const double root = std::sqrt(eps_loo);
    const double lo = options.sigma_lower * root;
    double hi = options.sigma_upper * root;
    // Keep sigma^2 <= upper^2 eps_loo exactly despite rounding in sqrt and exp(log).
    while (hi * hi > options.sigma_upper * options.sigma_upper * eps_loo) hi = std::nextafter(hi, 0.0);

    auto eval = [&](double log_sigma) {
        const double sigma = std::clamp(std::exp(log_sigma), lo, hi);
        const double v = cv.score(sigma).total;
        sel.trace.emplace_back(sigma, v);
        if (v > sel.cv_score || sel.trace.size() == 1) {
            sel.cv_score = v;
            sel.sigma = sigma;
        }
        return v;
    };

    const int m = options.coarse_points;
    std::vector<double> grid(static_cast<std::size_t>(m));
    std::vector<double> values(grid.size());
    for (int i = 0; i < m; ++i) {
        grid[static_cast<std::size_t>(i)] = std::log(log_space(lo, hi, i, m));
        values[static_cast<std::size_t>(i)] = eval(grid[static_cast<std::size_t>(i)]);
    }
    const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[std::min(best + 1, grid.size() - 1)];

    // Golden-section maximization in log sigma.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    int budget = options.golden_evaluations;
    if (budget >= 2) {
        double x1 = b - invphi * (b - a);
        double x2 = a + invphi * (b - a);
        double f1 = eval(x1);
        double f2 = eval(x2);
        budget -= 2;
        while (budget-- > 0) {
            if (f1 >= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - invphi * (b - a);
                f1 = eval(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + invphi * (b - a);
                f2 = eval(x2);
            }
        }
    }
    if (!std::isfinite(sel.cv_score))
        throw SelectionError("cross-validation failed for every candidate sigma");

    const LikelihoodEvaluator full(basis, data.inputs, data.outputs, fit_rule(basis, options));
    const OlsFit mf = mean_fit_or_fallback(mean_columns(basis, full.input_design()), data.outputs);
    const Eigen::VectorXd init = initial_coefficients(basis, mf, output_scale(data.outputs),
                                                      derive_seed(seed, {2}), options.init_spread);
    sel.coefficients = warm_start_fit(full, sel.sigma, init, mf.eps_loo, options).coefficients;
    return sel;
}

SigmaSelection select_sigma(const Dataset& data, const SpceBasis& basis, double eps_loo, std::uint64_t seed,
                            const FitOptions& options) {
    const std::size_t k = options.n_folds > 0 ? options.n_folds : cv_fold_count(data.size());
    return select_sigma(data, basis, eps_loo, make_folds(data.size(), k, derive_seed(seed, {0})), seed, options);
}

nlohmann::json report_to_json(const FitReport& r) {
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [s, v] : r.sigma_trace) trace.push_back({{"sigma", s}, {"cv_score", num(v)}});
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : r.candidates) {
        cands.push_back({{"latent", to_string(c.latent)},
                         {"p", c.p},
                         {"q", c.q},
                         {"basis_size", c.basis_size},
                         {"mean_terms", c.mean_terms},
                         {"eps_loo", num(c.eps_loo)},
                         {"sigma", num(c.sigma)},
                         {"cv_score", num(c.cv_score)},
                         {"reused", c.reused},
                         {"status", c.status}});
    }
    return {{"cv_score", num(r.cv_score)},
            {"latent", to_string(r.latent)},
            {"p", r.p},
            {"q", r.q},
            {"sigma", r.sigma},
            {"eps_loo", r.eps_loo},
            {"n_folds", r.n_folds},
            {"seed", r.seed},
            {"fold_seed", r.fold_seed},
            {"sigma_trace", trace},
            {"candidates", cands}};
}

namespace {

struct CandidateFit {
    CandidateRecord record;
    std::optional<SpceBasis> basis;
    SigmaSelection selection;
};

CandidateFit fit_candidate(const Dataset& data, Latent latent, int p, double q,
                           const std::vector<std::vector<std::size_t>>& folds, std::uint64_t seed,
                           const FitOptions& options,
                           std::map<std::vector<MultiIndex>, CandidateFit>& cache) {
    CandidateFit out;
    out.record.latent = latent;
    out.record.p = p;
    out.record.q = q;
    const std::size_t dim = data.n_inputs() + 1;

    const MultiIndexSet full = hyperbolic_set(p, q, dim);
    const MultiIndexSet mean_set = mean_subset(full);
    const SpceBasis mean_basis(data.marginals, latent, mean_set);
    const OlsFit lar = hybrid_lar(mean_basis.input_design(data.inputs), data.outputs, mean_set);
    const MultiIndexSet kept = mean_set.subset(lar.selected).merged(latent_subset(full));

    out.record.basis_size = kept.size();
    out.record.mean_terms = lar.selected.size();
    out.record.eps_loo = lar.eps_loo;

    if (auto it = cache.find(kept.indices()); it != cache.end()) {
        out.basis = it->second.basis;
        out.selection = it->second.selection;
        out.record.sigma = it->second.record.sigma;
        out.record.cv_score = it->second.record.cv_score;
        out.record.status = it->second.record.status;
        out.record.reused = true;
        return out;
    }

    out.basis.emplace(data.marginals, latent, kept);
    try {
        out.selection = select_sigma(data, *out.basis, lar.eps_loo, folds, seed, options);
        out.record.sigma = out.selection.sigma;
        out.record.cv_score = out.selection.cv_score;
    } catch (const NumericalError& e) {
        out.record.status = std::string("failed: ") + e.what();
    } catch (const SelectionError& e) {
        out.record.status = std::string("failed: ") + e.what();
    }
    cache.emplace(kept.indices(), out);
    return out;
}

}  // namespace

BuildResult adaptive_build(const Dataset& data, const AdaptiveConfig& config) {
    data.validate();
    if (config.latents.empty() || config.degrees.empty() || config.qnorms.empty())
        throw ConfigError("adaptive search needs at least one latent, degree and q-norm");
    for (int p : config.degrees)
        if (p < 1) throw ConfigError("degrees must be >= 1");
    for (double q : config.qnorms)
        if (!(q > 0.0 && q <= 1.0)) throw ConfigError("q-norms must lie in (0, 1]");
    for (const auto& m : data.marginals)
        if (m.kind() == MarginalKind::custom) throw ConfigError("input marginals must be uniform or normal");

    const FitOptions& opt = config.options;
    const std::size_t k = opt.n_folds > 0 ? opt.n_folds : cv_fold_count(data.size());
    const std::uint64_t fold_seed = derive_seed(config.seed, {0});
    const auto folds = make_folds(data.size(), k, fold_seed);

    FitReport report;
    report.seed = config.seed;
    report.fold_seed = fold_seed;
    report.n_folds = k;

    std::optional<CandidateFit> best;
    for (std::size_t li = 0; li < config.latents.size(); ++li) {
        const Latent latent = config.latents[li];
        std::map<std::vector<MultiIndex>, CandidateFit> cache;
        double prev_degree_best = -std::numeric_limits<double>::infinity();
        for (int p : config.degrees) {
            double best_in_p = -std::numeric_limits<double>::infinity();
            int misses = 0;
            for (std::size_t qi = 0; qi < config.qnorms.size(); ++qi) {
                const std::uint64_t seed =
                    derive_seed(config.seed, {1, static_cast<std::uint64_t>(latent), static_cast<std::uint64_t>(p), qi});
                CandidateFit cand = fit_candidate(data, latent, p, config.qnorms[qi], folds, seed, opt, cache);
                report.candidates.push_back(cand.record);
                const double score = cand.record.cv_score;
                if (std::isfinite(score) && (!best || score > best->record.cv_score)) best = std::move(cand);
                if (score > best_in_p) {
                    best_in_p = score;
                    misses = 0;
                } else if (++misses >= 2) {
                    break;
                }
            }
            if (best_in_p < prev_degree_best) break;
            prev_degree_best = std::max(prev_degree_best, best_in_p);
        }
    }
    if (!best) throw BuildError("no candidate model could be fitted");

    const auto& sel = best->selection;
    report.cv_score = sel.cv_score;
    report.sigma_trace = sel.trace;
    report.latent = best->record.latent;
    report.p = best->record.p;
    report.q = best->record.q;
    report.sigma = sel.sigma;
    report.eps_loo = sel.eps_loo;

    nlohmann::json info = {{"cv_score", sel.cv_score}, {"eps_loo", sel.eps_loo}, {"n_folds", k},
                           {"n_train", data.size()},   {"seed", config.seed},    {"p", report.p},
                           {"q", report.q}};
    SpceModel model(*best->basis, sel.coefficients, sel.sigma, std::move(info));
    return {std::move(model), std::move(report)};
}

}  // namespace spce
