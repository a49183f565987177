#include "spce/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "spce/errors.hpp"
#include "spce/rng.hpp"

namespace spce {

namespace {

const PolyFamily& latent_family(const SpceModel& model) { return model.basis().families().back(); }

double horner_latent(const PolyFamily& fam, const Eigen::VectorXd& b, double z, std::vector<double>& buf) {
    buf.resize(static_cast<std::size_t>(b.size()));
    fam.eval_all(z, buf);
    double v = 0.0;
    for (Eigen::Index k = 0; k < b.size(); ++k) v += b[k] * buf[static_cast<std::size_t>(k)];
    return v;
}

void check_count(std::size_t n) {
    if (n < 1) throw ValidationError("number of samples must be at least 1");
}

}  // namespace

std::vector<double> sample_conditional(const SpceModel& model, std::span<const double> x, std::size_t n,
                                       std::uint64_t seed) {
    check_count(n);
    const Eigen::VectorXd b = model.latent_polynomial(x);
    const PolyFamily& fam = latent_family(model);
    const Marginal zm = latent_marginal(model.basis().latent());
    Rng rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, model.sigma());
    std::vector<double> buf, out(n);
    for (auto& y : out) {
        const double z = zm.sample(rng);
        y = horner_latent(fam, b, z, buf) + noise(rng);
    }
    return out;
}

std::vector<double> sample_unconditional(const SpceModel& model, std::size_t n, std::uint64_t seed) {
    check_count(n);
    const auto& basis = model.basis();
    const PolyFamily& fam = latent_family(model);
    const Marginal zm = latent_marginal(basis.latent());
    Rng rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, model.sigma());
    std::vector<double> x(basis.n_inputs()), psi(basis.size()), buf;
    Eigen::VectorXd b(basis.max_latent_degree() + 1);
    std::vector<double> out(n);
    for (auto& y : out) {
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = basis.inputs()[k].sample(rng);
        basis.input_design_row(x, psi);
        b.setZero();
        for (std::size_t j = 0; j < psi.size(); ++j)
            b[basis.latent_degrees()[j]] += model.coefficients()[static_cast<Eigen::Index>(j)] * psi[j];
        const double z = zm.sample(rng);
        y = horner_latent(fam, b, z, buf) + noise(rng);
    }
    return out;
}

double mean_function(const SpceModel& model, std::span<const double> x) { return model.latent_polynomial(x)[0]; }

double variance_function(const SpceModel& model, std::span<const double> x) {
    const Eigen::VectorXd b = model.latent_polynomial(x);
    return b.tail(b.size() - 1).squaredNorm() + model.sigma() * model.sigma();
}

double unconditional_mean(const SpceModel& model) {
    const auto pos = model.basis().indices().find(MultiIndex(model.basis().indices().dim(), 0));
    return pos < model.basis().size() ? model.coefficients()[static_cast<Eigen::Index>(pos)] : 0.0;
}

double unconditional_variance(const SpceModel& model) {
    const double c0 = unconditional_mean(model);
    return model.coefficients().squaredNorm() - c0 * c0 + model.sigma() * model.sigma();
}

namespace {

SobolFamily make_family(std::size_t m) {
    SobolFamily f;
    f.first_order.assign(m, 0.0);
    f.total.assign(m, 0.0);
    return f;
}

void normalize(SobolFamily& f) {
    if (!(f.variance > 0.0)) {
        f.degenerate = true;
        std::fill(f.first_order.begin(), f.first_order.end(), 0.0);
        std::fill(f.total.begin(), f.total.end(), 0.0);
        for (auto& [u, v] : f.higher_order) v = 0.0;
        return;
    }
    auto clip = [&](double v) { return std::clamp(v / f.variance, 0.0, 1.0); };
    for (auto& v : f.first_order) v = clip(v);
    for (auto& v : f.total) v = clip(v);
    for (auto& [u, v] : f.higher_order) v = clip(v);
}

std::string subset_label(const InputSubset& u) {
    std::string s;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(u[i] + 1);
    }
    return s;
}

}  // namespace

SobolReport sobol_indices(const SpceModel& model, const std::vector<InputSubset>& subsets) {
    const auto& basis = model.basis();
    const std::size_t m = basis.n_inputs();
    const auto& c = model.coefficients();

    for (const auto& u : subsets) {
        if (u.empty()) throw ValidationError("Sobol' subsets must be nonempty");
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i] < 0 || static_cast<std::size_t>(u[i]) >= m) throw ValidationError("Sobol' subset refers to a missing input");
            if (i > 0 && u[i] <= u[i - 1]) throw ValidationError("Sobol' subsets must be strictly ascending");
        }
    }

    SobolReport r;
    r.classical = make_family(m);
    r.mean_function = make_family(m);
    const double s2 = model.sigma() * model.sigma();
    double latent = 0.0;
    std::map<InputSubset, double> by_subset;  // mean-part variance per support set

    for (std::size_t j = 0; j < basis.size(); ++j) {
        const auto& a = basis.indices()[j];
        const double v = c[static_cast<Eigen::Index>(j)] * c[static_cast<Eigen::Index>(j)];
        InputSubset u;
        for (std::size_t k = 0; k < m; ++k)
            if (a[k] != 0) u.push_back(static_cast<int>(k));
        const bool z = a[m] != 0;
        if (u.empty() && !z) continue;  // constant term
        r.classical.variance += v;
        for (int i : u) r.classical.total[static_cast<std::size_t>(i)] += v;
        if (z) {
            latent += v;
            continue;
        }
        r.mean_function.variance += v;
        for (int i : u) r.mean_function.total[static_cast<std::size_t>(i)] += v;
        if (u.size() == 1) {
            r.classical.first_order[static_cast<std::size_t>(u[0])] += v;
            r.mean_function.first_order[static_cast<std::size_t>(u[0])] += v;
        }
        by_subset[u] += v;
    }
    r.classical.variance += s2;

    if (subsets.empty()) {
        for (const auto& [u, v] : by_subset)
            if (u.size() >= 2) r.classical.higher_order[u] = r.mean_function.higher_order[u] = v;
    } else {
        for (const auto& u : subsets) {
            const auto it = by_subset.find(u);
            r.classical.higher_order[u] = r.mean_function.higher_order[u] = it == by_subset.end() ? 0.0 : it->second;
        }
    }

    if (r.classical.variance > 0.0) {
        r.latent_share = latent / r.classical.variance;
        r.noise_share = s2 / r.classical.variance;
    }
    normalize(r.classical);
    normalize(r.mean_function);
    return r;
}

namespace {

nlohmann::json family_json(const SobolFamily& f) {
    nlohmann::json higher = nlohmann::json::array();
    for (const auto& [u, v] : f.higher_order) {
        InputSubset one_based(u);
        for (auto& i : one_based) ++i;
        higher.push_back({{"subset", one_based}, {"index", v}});
    }
    return {{"first_order", f.first_order},
            {"total", f.total},
            {"higher_order", higher},
            {"variance", f.variance},
            {"degenerate", f.degenerate}};
}

}  // namespace

nlohmann::json sobol_to_json(const SobolReport& r) {
    return {{"classical", family_json(r.classical)},
            {"latent_share", r.latent_share},
            {"noise_share", r.noise_share},
            {"mean_function", family_json(r.mean_function)}};
}

std::string sobol_to_csv(const SobolReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "family,kind,subset,value\n";
    auto family = [&](const char* name, const SobolFamily& f) {
        for (std::size_t i = 0; i < f.first_order.size(); ++i) os << name << ",first," << i + 1 << ',' << f.first_order[i] << '\n';
        for (std::size_t i = 0; i < f.total.size(); ++i) os << name << ",total," << i + 1 << ',' << f.total[i] << '\n';
        for (const auto& [u, v] : f.higher_order) os << name << ",higher," << subset_label(u) << ',' << v << '\n';
        os << name << ",variance,," << f.variance << '\n';
    };
    family("classical", r.classical);
    os << "classical,latent,," << r.latent_share << '\n';
    os << "classical,noise,," << r.noise_share << '\n';
    family("mean_function", r.mean_function);
    return os.str();
}

ConditionalDensity conditional_pdf(const SpceModel& model, std::span<const double> x, std::span<const double> y_grid) {
    for (std::size_t i = 1; i < y_grid.size(); ++i)
        if (!(y_grid[i] > y_grid[i - 1])) throw ValidationError("y grid must be strictly increasing");
    const Eigen::VectorXd b = model.latent_polynomial(x);
    const PolyFamily& fam = latent_family(model);
    const Latent latent = model.basis().latent();
    const Marginal zm = latent_marginal(latent);
    const double sigma = model.sigma();
    const double lo = latent == Latent::uniform ? -1.0 : -9.0;
    const double hi = -lo;

    // Steepest slope of the latent map decides the panel width.
    std::vector<double> buf;
    double slope = 0.0;
    constexpr int probes = 4000;
    double prev = horner_latent(fam, b, lo, buf);
    for (int i = 1; i <= probes; ++i) {
        const double z = lo + (hi - lo) * i / probes;
        const double g = horner_latent(fam, b, z, buf);
        slope = std::max(slope, std::abs(g - prev) * probes / (hi - lo));
        prev = g;
    }
    const double width = slope > 0.0 ? 0.5 * sigma / slope : hi - lo;
    const auto panels = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / width), 64.0, 200000.0));
    const QuadratureRule gl = gauss_rule(family_for_marginal(Marginal::uniform(-1.0, 1.0), 8), 8);

    const std::size_t n_nodes = panels * gl.nodes.size();
    std::vector<double> g(n_nodes), w(n_nodes);
    const double h = (hi - lo) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = lo + h * static_cast<double>(p);
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double z = a + 0.5 * h * (gl.nodes[q] + 1.0);
            const std::size_t k = p * gl.nodes.size() + q;
            g[k] = horner_latent(fam, b, z, buf);
            w[k] = h * gl.weights[q] * zm.pdf(z);
            total += w[k];
        }
    }
    for (auto& v : w) v /= total;

    ConditionalDensity out;
    out.values.resize(y_grid.size());
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n_nodes; ++k) {
            const double t = (y_grid[i] - g[k]) / sigma;
            if (std::abs(t) < 40.0) s += w[k] * std::exp(-0.5 * t * t);
        }
        out.values[i] = norm * s;
    }
    for (std::size_t i = 1; i < y_grid.size(); ++i)
        out.mass += 0.5 * (y_grid[i] - y_grid[i - 1]) * (out.values[i] + out.values[i - 1]);
    out.covered = out.mass >= 0.99;
    return out;
}

double wasserstein2(const QuantileGrid& a, const QuantileGrid& b) {
    a.validate();
    b.validate();
    const QuantileGrid bb = a.u == b.u ? b : resample(b, a.u);
    double s = 0.0;
    for (std::size_t i = 1; i < a.u.size(); ++i) {
        const double d0 = a.values[i - 1] - bb.values[i - 1];
        const double d1 = a.values[i] - bb.values[i];
        s += 0.5 * (a.u[i] - a.u[i - 1]) * (d0 * d0 + d1 * d1);
    }
    return s;
}

namespace {

using IndexedProvider = std::function<QuantileGrid(Eigen::Index, std::span<const double>, std::span<const double>)>;

ErrorResult evaluate_error(const IndexedProvider& emulator, const QuantileProvider& reference,
                           const Eigen::MatrixXd& test_x, double var_y, std::size_t n_u) {
    if (test_x.rows() == 0) throw ValidationError("test set must not be empty");
    if (!(var_y > 0.0) || !std::isfinite(var_y)) throw ValidationError("output variance must be positive");
    const std::vector<double> u = clipped_u_grid(n_u);
    ErrorResult r;
    r.d2.assign(static_cast<std::size_t>(test_x.rows()), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> x(static_cast<std::size_t>(test_x.cols()));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < test_x.rows(); ++i) {
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = test_x(i, static_cast<Eigen::Index>(k));
        QuantileGrid ref;
        try {
            ref = reference(x, u);
        } catch (const Error&) {
            ++r.failed;
            continue;
        }
        const double d = wasserstein2(emulator(i, x, u), ref);
        r.d2[static_cast<std::size_t>(i)] = d;
        sum += d;
    }
    const auto ok = static_cast<std::size_t>(test_x.rows()) - r.failed;
    if (ok == 0) throw NumericalError("reference quantiles failed at every test point");
    r.coverage = static_cast<double>(ok) / static_cast<double>(test_x.rows());
    r.epsilon = sum / static_cast<double>(ok) / var_y;
    return r;
}

}  // namespace

ErrorResult error_metric(const QuantileProvider& emulator, const QuantileProvider& reference,
                         const Eigen::MatrixXd& test_x, double var_y, std::size_t n_u) {
    return evaluate_error([&](Eigen::Index, std::span<const double> x, std::span<const double> u) { return emulator(x, u); },
                          reference, test_x, var_y, n_u);
}

ErrorResult error_metric(const SpceModel& model, const QuantileProvider& reference, const Eigen::MatrixXd& test_x,
                         double var_y, const ErrorOptions& options) {
    auto surrogate = [&](Eigen::Index i, std::span<const double> x, std::span<const double> u) {
        const auto seed = derive_seed(options.seed, {static_cast<std::uint64_t>(i)});
        return empirical_quantiles(sample_conditional(model, x, options.n_samples, seed), u);
    };
    return evaluate_error(surrogate, reference, test_x, var_y, options.n_u);
}

ErrorResult oracle_normal_error(const std::function<double(std::span<const double>)>& mean,
                                const std::function<double(std::span<const double>)>& variance,
                                const QuantileProvider& reference, const Eigen::MatrixXd& test_x, double var_y,
                                std::size_t n_u) {
    auto normal = [&](std::span<const double> x, std::span<const double> u) {
        const double mu = mean(x);
        const double sd = std::sqrt(std::max(variance(x), 0.0));
        QuantileGrid g;
        g.u.assign(u.begin(), u.end());
        for (double v : u) g.values.push_back(mu + sd * std_normal_quantile(v));
        return g;
    };
    return error_metric(normal, reference, test_x, var_y, n_u);
}

}  // namespace spce
