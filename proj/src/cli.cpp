#include "spce/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "spce/errors.hpp"
#include "spce/postproc.hpp"
#include "spce/quantiles.hpp"
#include "spce/rng.hpp"

namespace spce::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// Row lookup for quantile providers, which only see the point itself.
std::size_t row_index(const Eigen::MatrixXd& xs, std::span<const double> x) {
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        bool same = true;
        for (Eigen::Index k = 0; k < xs.cols() && same; ++k) same = xs(i, k) == x[static_cast<std::size_t>(k)];
        if (same) return static_cast<std::size_t>(i);
    }
    throw ValidationError("quantile request for a point outside the test set");
}

std::vector<double> row(const Eigen::MatrixXd& xs, Eigen::Index i) {
    std::vector<double> x(static_cast<std::size_t>(xs.cols()));
    for (Eigen::Index k = 0; k < xs.cols(); ++k) x[static_cast<std::size_t>(k)] = xs(i, k);
    return x;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

// Linear-interpolation quantile of sorted data.
double quantile_sorted(const std::vector<double>& v, double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

json stats(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double a) { return !std::isfinite(a); }), v.end());
    if (v.empty()) return {{"count", 0}};
    std::sort(v.begin(), v.end());
    double s = 0;
    for (double a : v) s += a;
    return {{"count", v.size()},
            {"mean", s / static_cast<double>(v.size())},
            {"median", quantile_sorted(v, 0.5)},
            {"q1", quantile_sorted(v, 0.25)},
            {"q3", quantile_sorted(v, 0.75)},
            {"min", v.front()},
            {"max", v.back()}};
}

void check_report(const json& report) {
    for (const char* key : {"cv_score", "latent", "p", "q", "sigma", "eps_loo", "candidates", "sigma_trace"})
        if (!report.contains(key)) throw ValidationError(std::string("report lacks '") + key + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
    if (simulator.has_value() == !dataset.empty())
        throw ConfigError("config needs exactly one of 'simulator' and 'dataset'");
    if (!dataset.empty() && !fs::exists(dataset)) throw ConfigError("dataset not found: " + dataset.string());
    if (n < 10) throw ConfigError("design size n must be at least 10");
    for (std::size_t v : ladder)
        if (v < 10) throw ConfigError("ladder design sizes must be at least 10");
    if (replicates < 1) throw ConfigError("replicates must be at least 1");
    if (degrees.empty() || qnorms.empty() || latents.empty()) throw ConfigError("candidate lists must be nonempty");
    for (int p : degrees)
        if (p < 1) throw ConfigError("degrees must be positive");
    for (double q : qnorms)
        if (!(q > 0.0 && q <= 1.0)) throw ConfigError("q-norms must lie in (0, 1]");
    if (quadrature_points < 0) throw ConfigError("quadrature_points must be nonnegative");
    if (test_size < 1 || reference_replications < 2 || surrogate_samples < 2 || u_levels < 2 || variance_draws < 2)
        throw ConfigError("benchmark sizes are too small");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

AdaptiveConfig ExperimentConfig::adaptive(std::uint64_t fit_seed) const {
    AdaptiveConfig a;
    a.latents = latents;
    a.degrees = degrees;
    a.qnorms = qnorms;
    a.seed = fit_seed;
    a.options.quadrature_points = quadrature_points;
    return a;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known = {
        "simulator", "dataset", "marginals", "n", "ladder", "replicates", "degrees", "qnorms", "latents",
        "quadrature_points", "test_size", "reference_replications", "surrogate_samples", "u_levels",
        "variance_draws", "seed", "out", "jobs"};
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config field '" + key + "'");

    ExperimentConfig c;
    if (j.contains("simulator")) c.simulator = simulator_from_string(get_or<std::string>(j, "simulator", ""));
    c.dataset = get_or<std::string>(j, "dataset", "");
    if (j.contains("marginals")) {
        if (!j["marginals"].is_array()) throw ConfigError("'marginals' must be an array");
        for (const auto& m : j["marginals"]) c.marginals.push_back(marginal_from_json(m));
    }
    c.n = get_or<std::size_t>(j, "n", c.n);
    c.ladder = get_or<std::vector<std::size_t>>(j, "ladder", c.ladder);
    c.replicates = get_or<std::size_t>(j, "replicates", c.replicates);
    c.degrees = get_or<std::vector<int>>(j, "degrees", c.degrees);
    c.qnorms = get_or<std::vector<double>>(j, "qnorms", c.qnorms);
    if (j.contains("latents")) {
        c.latents.clear();
        for (const auto& name : get_or<std::vector<std::string>>(j, "latents", {})) {
            try {
                c.latents.push_back(latent_from_string(name));
            } catch (const Error& e) {
                throw ConfigError(e.what());
            }
        }
    }
    c.quadrature_points = get_or<int>(j, "quadrature_points", c.quadrature_points);
    c.test_size = get_or<std::size_t>(j, "test_size", c.test_size);
    c.reference_replications = get_or<std::size_t>(j, "reference_replications", c.reference_replications);
    c.surrogate_samples = get_or<std::size_t>(j, "surrogate_samples", c.surrogate_samples);
    c.u_levels = get_or<std::size_t>(j, "u_levels", c.u_levels);
    c.variance_draws = get_or<std::size_t>(j, "variance_draws", c.variance_draws);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.out = get_or<std::string>(j, "out", c.out.string());
    c.jobs = get_or<unsigned>(j, "jobs", c.jobs);
    c.validate();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    if (c.simulator) j["simulator"] = to_string(*c.simulator);
    if (!c.dataset.empty()) j["dataset"] = c.dataset.string();
    if (!c.marginals.empty()) j["marginals"] = c.marginals;
    j["n"] = c.n;
    j["ladder"] = c.ladder;
    j["replicates"] = c.replicates;
    j["degrees"] = c.degrees;
    j["qnorms"] = c.qnorms;
    std::vector<std::string> latents;
    for (Latent l : c.latents) latents.push_back(to_string(l));
    j["latents"] = latents;
    j["quadrature_points"] = c.quadrature_points;
    j["test_size"] = c.test_size;
    j["reference_replications"] = c.reference_replications;
    j["surrogate_samples"] = c.surrogate_samples;
    j["u_levels"] = c.u_levels;
    j["variance_draws"] = c.variance_draws;
    j["seed"] = c.seed;
    return j;
}

json read_config_json(const fs::path& path) {
    json j = parse_json_file(path);
    if (j.is_object() && j.contains("dataset") && j["dataset"].is_string()) {
        const fs::path d = j["dataset"].get<std::string>();
        if (d.is_relative()) j["dataset"] = (path.parent_path() / d).lexically_normal().string();
    }
    return j;
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
    try {
        j[key] = json::parse(value);
    } catch (const json::parse_error&) {
        j[key] = value;
    }
}

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.close();
        if (!out) {
            fs::remove(tmp);
            throw Error("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

Dataset load_or_generate(const ExperimentConfig& config) {
    if (config.simulator) {
        Dataset d = make_simulator(*config.simulator)->generate(config.n, derive_seed(config.seed, {0}));
        return d;
    }
    Dataset d;
    if (config.dataset.extension() == ".json") {
        d = dataset_from_json(parse_json_file(config.dataset));
        if (!config.marginals.empty()) d.marginals = config.marginals;
    } else {
        d = read_dataset_csv(config.dataset);
        if (config.marginals.empty()) throw ConfigError("CSV datasets need 'marginals' in the config");
        d.marginals = config.marginals;
    }
    d.source = config.dataset.string();
    d.validate();
    return d;
}

FitArtifacts run_fit(const ExperimentConfig& config) {
    config.validate();
    const Dataset data = load_or_generate(config);
    const std::uint64_t fit_seed = derive_seed(config.seed, {1});
    const BuildResult r = adaptive_build(data, config.adaptive(fit_seed));
    FitArtifacts a;
    a.model = model_to_json(r.model);
    a.report = report_to_json(r.report);
    a.report["config"] = config_to_json(config);
    a.report["dataset"] = {{"source", config.simulator ? to_string(*config.simulator) : data.source},
                           {"n", data.size()},
                           {"seed", config.simulator ? derive_seed(config.seed, {0}) : data.seed}};
    model_from_json(a.model);
    check_report(a.report);
    return a;
}

void cmd_fit(const ExperimentConfig& config) {
    const FitArtifacts a = run_fit(config);
    write_atomic(config.out / "model.json", a.model.dump(2) + "\n");
    write_atomic(config.out / "report.json", a.report.dump(2) + "\n");
}

SpceModel load_model(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("model file not found: " + path.string());
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string cmd_sample(const SpceModel& model, const std::optional<std::vector<double>>& x, std::size_t n,
                       std::uint64_t seed) {
    std::vector<double> ys;
    if (x) {
        if (x->size() != model.basis().n_inputs())
            throw ValidationError("point has " + std::to_string(x->size()) + " coordinates, model expects " +
                                  std::to_string(model.basis().n_inputs()));
        ys = sample_conditional(model, *x, n, seed);
    } else {
        ys = sample_unconditional(model, n, seed);
    }
    std::string s = "y\n";
    for (double y : ys) s += fmt(y) + "\n";
    return s;
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t n, std::size_t r) {
    return derive_seed(master, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
}

BenchmarkRow run_replicate(const ExperimentConfig& config, const Simulator& sim, std::size_t n, std::size_t r,
                           double var_y) {
    const auto t0 = std::chrono::steady_clock::now();
    BenchmarkRow row_out;
    row_out.simulator = to_string(sim.id());
    row_out.n = n;
    row_out.replicate = r;
    row_out.seed = replicate_seed(config.seed, n, r);
    const std::uint64_t rs = row_out.seed;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row_out.epsilon = row_out.oracle_epsilon = row_out.baseline_epsilon = nan;
    try {
        const Dataset data = sim.generate(n, derive_seed(rs, {0}));
        const BuildResult fit = adaptive_build(data, config.adaptive(derive_seed(rs, {1})));
        row_out.fit_seconds = seconds_since(t0);
        row_out.sigma = fit.report.sigma;
        row_out.eps_loo = fit.report.eps_loo;
        row_out.latent = to_string(fit.report.latent);
        row_out.p = fit.report.p;
        row_out.q = fit.report.q;
        row_out.min_sigma_ratio = std::numeric_limits<double>::infinity();
        for (const auto& [sigma, score] : fit.report.sigma_trace)
            row_out.min_sigma_ratio = std::min(row_out.min_sigma_ratio, sigma / std::sqrt(fit.report.eps_loo));
        for (const auto& c : fit.report.candidates) {
            if (c.status != "ok" || !(c.eps_loo > 0.0)) continue;
            row_out.min_sigma_ratio = std::min(row_out.min_sigma_ratio, c.sigma / std::sqrt(c.eps_loo));
            row_out.max_sigma2_ratio = std::max(row_out.max_sigma2_ratio, c.sigma * c.sigma / c.eps_loo);
        }

        const Eigen::MatrixXd test_x = lhs_design(config.test_size, sim.marginals(), derive_seed(rs, {2}));
        const std::vector<double> u = clipped_u_grid(config.u_levels);
        std::vector<QuantileGrid> refs(static_cast<std::size_t>(test_x.rows()));
        std::vector<double> means(refs.size()), vars(refs.size());
        for (Eigen::Index i = 0; i < test_x.rows(); ++i) {
            const auto x = row(test_x, i);
            const std::uint64_t s = derive_seed(rs, {3, static_cast<std::uint64_t>(i)});
            const auto k = static_cast<std::size_t>(i);
            refs[k] = sim.reference_quantiles(x, u, config.reference_replications, s);
            means[k] = sim.mean(x, config.reference_replications, s);
            vars[k] = sim.variance(x, config.reference_replications, s);
        }
        const QuantileProvider reference = [&](std::span<const double> x, std::span<const double> uu) {
            return resample(refs[row_index(test_x, x)], uu);
        };
        ErrorOptions eo;
        eo.n_samples = config.surrogate_samples;
        eo.n_u = config.u_levels;
        eo.seed = derive_seed(rs, {4});
        row_out.epsilon = error_metric(fit.model, reference, test_x, var_y, eo).epsilon;
        row_out.oracle_epsilon =
            oracle_normal_error([&](std::span<const double> x) { return means[row_index(test_x, x)]; },
                                [&](std::span<const double> x) { return vars[row_index(test_x, x)]; }, reference, test_x,
                                var_y, config.u_levels)
                .epsilon;
        const std::vector<double> train(data.outputs.data(), data.outputs.data() + data.outputs.size());
        const QuantileGrid constant = empirical_quantiles(train, u);
        const QuantileProvider baseline = [&](std::span<const double>, std::span<const double> uu) {
            return resample(constant, uu);
        };
        row_out.baseline_epsilon = error_metric(baseline, reference, test_x, var_y, config.u_levels).epsilon;
    } catch (const std::exception& e) {
        row_out.status = "failed: " + csv_safe(e.what());
    }
    row_out.total_seconds = seconds_since(t0);
    return row_out;
}

BenchmarkResult run_benchmark(const ExperimentConfig& config, const std::function<void(const BenchmarkRow&)>& progress) {
    config.validate();
    if (!config.simulator) throw ConfigError("benchmark needs a bundled simulator");
    if (config.ladder.empty()) throw ConfigError("benchmark needs a nonempty 'ladder'");
    const auto sim = make_simulator(*config.simulator);

    BenchmarkResult result;
    result.var_y = sim->output_variance(config.variance_draws, derive_seed(config.seed, {0xffff}));
    if (!(result.var_y > 0.0)) throw NumericalError("output variance is not positive");

    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t n : config.ladder)
        for (std::size_t r = 0; r < config.replicates; ++r) slots.emplace_back(n, r);
    result.rows.resize(slots.size());

    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < slots.size();) {
            result.rows[k] = run_replicate(config, *sim, slots[k].first, slots[k].second, result.var_y);
            if (progress) {
                std::lock_guard lock(report_mutex);
                progress(result.rows[k]);
            }
        }
    };
    const unsigned n_threads = std::min<unsigned>(config.jobs, static_cast<unsigned>(slots.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    json per_n = json::array();
    for (std::size_t n : config.ladder) {
        std::vector<double> eps, oracle, baseline;
        std::size_t ok = 0;
        for (const auto& row_k : result.rows) {
            if (row_k.n != n) continue;
            eps.push_back(row_k.epsilon);
            oracle.push_back(row_k.oracle_epsilon);
            baseline.push_back(row_k.baseline_epsilon);
            ok += row_k.status == "ok";
        }
        per_n.push_back({{"N", n},
                         {"replicates", eps.size()},
                         {"ok", ok},
                         {"epsilon", stats(eps)},
                         {"oracle_epsilon", stats(oracle)},
                         {"baseline_epsilon", stats(baseline)}});
    }
    json seeds = json::array();
    for (const auto& row_k : result.rows) seeds.push_back({{"N", row_k.n}, {"replicate", row_k.replicate}, {"seed", row_k.seed}});
    result.summary = {{"simulator", to_string(*config.simulator)},
                      {"config", config_to_json(config)},
                      {"var_y", result.var_y},
                      {"quantile_levels", {{"count", config.u_levels}, {"lower", kQuantileClip}, {"upper", 1 - kQuantileClip}}},
                      {"per_n", per_n},
                      {"replicate_seeds", seeds}};
    return result;
}

std::string errors_csv(const BenchmarkResult& result) {
    std::string s = "simulator,N,replicate,seed,epsilon,oracle_epsilon,baseline_epsilon,sigma,eps_loo,latent,p,q,status\n";
    for (const auto& r : result.rows) {
        s += r.simulator + "," + std::to_string(r.n) + "," + std::to_string(r.replicate) + "," + std::to_string(r.seed) +
             "," + fmt(r.epsilon) + "," + fmt(r.oracle_epsilon) + "," + fmt(r.baseline_epsilon) + "," + fmt(r.sigma) +
             "," + fmt(r.eps_loo) + "," + r.latent + "," + std::to_string(r.p) + "," + fmt(r.q) + "," + r.status + "\n";
    }
    return s;
}

std::string runtime_csv(const BenchmarkResult& result) {
    std::string s = "simulator,N,replicate,fit_seconds,total_seconds\n";
    char buf[64];
    for (const auto& r : result.rows) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f", r.fit_seconds, r.total_seconds);
        s += r.simulator + "," + std::to_string(r.n) + "," + std::to_string(r.replicate) + "," + buf + "\n";
    }
    return s;
}

void cmd_benchmark(const ExperimentConfig& config, std::ostream* log) {
    const BenchmarkResult result = run_benchmark(config, [&](const BenchmarkRow& r) {
        if (log)
            *log << r.simulator << " N=" << r.n << " replicate " << r.replicate << ": epsilon " << fmt(r.epsilon)
                 << " oracle " << fmt(r.oracle_epsilon) << " (" << r.status << ", " << r.total_seconds << " s)"
                 << std::endl;
    });
    write_atomic(config.out / "errors.csv", errors_csv(result));
    write_atomic(config.out / "summary.json", result.summary.dump(2) + "\n");
    write_atomic(config.out / "runtime.csv", runtime_csv(result));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic polynomial chaos expansions: fit, sample, sensitivity analysis and benchmarks", "spce"};
    app.require_subcommand(1);

    std::string config_path, model_path, out_path, x_list;
    std::vector<std::string> overrides, subsets;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::size_t n_samples = 0;
    bool unconditional = false;

    auto add_config_flags = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "JSON experiment config")->required();
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--out", out_path, "output directory (overrides the config)");
        sub->add_option("--set", overrides, "override a config field: key=value");
    };
    CLI::App* fit = app.add_subcommand("fit", "fit an SPCE and write model.json and report.json");
    add_config_flags(fit);
    CLI::App* bench = app.add_subcommand("benchmark", "run the error benchmark over a design-size ladder");
    add_config_flags(bench);
    bench->add_option("--jobs", jobs, "parallel replicates");

    CLI::App* sample = app.add_subcommand("sample", "draw from a fitted model");
    sample->add_option("-m,--model", model_path, "model JSON")->required();
    sample->add_option("-n", n_samples, "number of draws")->required();
    sample->add_option("--x", x_list, "input point, comma-separated");
    sample->add_flag("--unconditional", unconditional, "draw the inputs from their marginals");
    sample->add_option("--seed", seed, "seed");
    sample->add_option("--out", out_path, "CSV file (default: standard output)");

    CLI::App* sobol = app.add_subcommand("sobol", "Sobol' indices of a fitted model");
    sobol->add_option("-m,--model", model_path, "model JSON")->required();
    sobol->add_option("--subset", subsets, "interaction subset, 1-based and comma-separated");
    sobol->add_option("--out", out_path, "directory for sobol.json and sobol.csv (default: JSON to standard output)");

    CLI::App* validate = app.add_subcommand("validate-model", "check a model file");
    validate->add_option("-m,--model", model_path, "model JSON")->required();

    std::vector<const char*> argv = {"spce"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    auto load_config = [&] {
        json j = read_config_json(config_path);
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        for (const auto& o : overrides) apply_override(j, o);
        if (seed) j["seed"] = *seed;
        if (!out_path.empty()) j["out"] = out_path;
        if (jobs) j["jobs"] = *jobs;
        return config_from_json(j);
    };

    try {
        if (fit->parsed()) {
            const ExperimentConfig c = load_config();
            cmd_fit(c);
            out << "wrote " << (c.out / "model.json").string() << " and " << (c.out / "report.json").string() << "\n";
        } else if (bench->parsed()) {
            const ExperimentConfig c = load_config();
            cmd_benchmark(c, &err);
            out << "wrote " << (c.out / "errors.csv").string() << ", summary.json and runtime.csv\n";
        } else if (sample->parsed()) {
            if (unconditional == !x_list.empty()) throw ConfigError("give exactly one of --x and --unconditional");
            std::optional<std::vector<double>> x;
            if (!x_list.empty()) {
                x.emplace();
                std::stringstream ss(x_list);
                std::string cell;
                while (std::getline(ss, cell, ',')) {
                    try {
                        x->push_back(std::stod(cell));
                    } catch (const std::exception&) {
                        throw ConfigError("--x expects numbers, got '" + cell + "'");
                    }
                }
            }
            const std::string csv = cmd_sample(load_model(model_path), x, n_samples, seed.value_or(0));
            if (out_path.empty())
                out << csv;
            else
                write_atomic(out_path, csv);
        } else if (sobol->parsed()) {
            const SpceModel model = load_model(model_path);
            std::vector<InputSubset> us;
            for (const auto& s : subsets) {
                InputSubset u;
                std::stringstream ss(s);
                std::string cell;
                while (std::getline(ss, cell, ',')) {
                    try {
                        u.push_back(std::stoi(cell) - 1);
                    } catch (const std::exception&) {
                        throw ConfigError("--subset expects integers, got '" + cell + "'");
                    }
                }
                us.push_back(u);
            }
            const SobolReport report = sobol_indices(model, us);
            if (out_path.empty()) {
                out << sobol_to_json(report).dump(2) << "\n";
            } else {
                write_atomic(fs::path(out_path) / "sobol.json", sobol_to_json(report).dump(2) + "\n");
                write_atomic(fs::path(out_path) / "sobol.csv", sobol_to_csv(report));
            }
        } else if (validate->parsed()) {
            const SpceModel m = load_model(model_path);
            out << "valid model: " << m.basis().n_inputs() << " inputs, " << m.basis().size() << " terms, "
                << to_string(m.basis().latent()) << " latent, sigma " << fmt(m.sigma()) << "\n";
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace spce::cli
