#include "sensreach/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>

namespace sensreach {

std::string to_string(BoundsMethod m) { return m == BoundsMethod::sampling ? "sampling" : "interval-arith"; }
std::string to_string(OverApproxMethod m) { return m == OverApproxMethod::sign_stable ? "sign-stable" : "bounded"; }

// --- configuration ----------------------------------------------------------

namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
    }
}

std::size_t get_count(const json& doc, const char* key) {
    const json& v = doc.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw std::invalid_argument(std::string("config key '") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("config must be an object");
    reject_unknown(doc,
                   {"name", "model", "t0", "T", "X0", "P", "method", "bounds_method", "sampling", "grid_per_dim",
                    "random_samples", "max_falsification_iters", "taylor_order", "max_taylor_order", "seed",
                    "mc_samples", "corner_prob", "volume_samples", "volume_param_grid", "plot_dims", "integrator"},
                   "config");
    ConfiguredModel cm = model_from_config(doc);

    ExperimentConfig cfg;
    cfg.model_name = doc["model"].get<std::string>();
    cfg.model = std::move(cm.model);
    cfg.spec = std::move(cm.spec);
    cfg.name = doc.contains("name") ? get_as<std::string>(doc, "name") : cfg.model_name;

    if (doc.contains("method")) {
        const auto m = get_as<std::string>(doc, "method");
        if (m == "sign-stable") {
            cfg.method = OverApproxMethod::sign_stable;
        } else if (m == "bounded") {
            cfg.method = OverApproxMethod::bounded;
        } else {
            throw std::invalid_argument("method must be 'sign-stable' or 'bounded', got '" + m + "'");
        }
    }
    if (doc.contains("bounds_method")) {
        const auto m = get_as<std::string>(doc, "bounds_method");
        if (m == "sampling") {
            cfg.bounds_method = BoundsMethod::sampling;
        } else if (m == "interval-arith") {
            cfg.bounds_method = BoundsMethod::interval_arith;
        } else {
            throw std::invalid_argument("bounds_method must be 'sampling' or 'interval-arith', got '" + m + "'");
        }
    }

    // Sampling options may sit at the top level or under "sampling".
    auto read_sampling = [&cfg](const json& s) {
        if (s.contains("grid_per_dim")) cfg.grid_per_dim = get_count(s, "grid_per_dim");
        if (s.contains("random_samples")) cfg.random_samples = get_count(s, "random_samples");
        if (s.contains("max_falsification_iters")) cfg.max_falsification_iters = get_count(s, "max_falsification_iters");
    };
    read_sampling(doc);
    if (doc.contains("sampling")) {
        const json& s = doc["sampling"];
        if (!s.is_object()) throw std::invalid_argument("'sampling' must be an object");
        reject_unknown(s, {"grid_per_dim", "random_samples", "max_falsification_iters"}, "sampling");
        read_sampling(s);
    }
    if (cfg.random_samples == 0 && cfg.grid_per_dim == 0) {
        throw std::invalid_argument("sampling needs grid_per_dim > 0 or random_samples > 0");
    }

    if (doc.contains("taylor_order")) {
        const json& v = doc["taylor_order"];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
            throw std::invalid_argument("taylor_order must be a non-negative integer");
        }
        cfg.taylor_order = v.get<std::int64_t>();
    }
    if (doc.contains("max_taylor_order")) cfg.max_taylor_order = static_cast<std::int64_t>(get_count(doc, "max_taylor_order"));
    if (doc.contains("seed")) cfg.seed = get_count(doc, "seed");
    if (doc.contains("mc_samples")) cfg.mc_samples = get_count(doc, "mc_samples");
    if (cfg.mc_samples == 0) throw std::invalid_argument("mc_samples must be positive");
    if (doc.contains("corner_prob")) {
        cfg.corner_prob = get_as<double>(doc, "corner_prob");
        if (!(cfg.corner_prob >= 0.0 && cfg.corner_prob <= 0.5)) {
            throw std::invalid_argument("corner_prob must lie in [0, 0.5]");
        }
    }
    if (doc.contains("volume_samples")) cfg.volume_samples = get_count(doc, "volume_samples");
    if (doc.contains("volume_param_grid")) cfg.volume_param_grid = get_count(doc, "volume_param_grid");
    if (cfg.volume_param_grid == 0) throw std::invalid_argument("volume_param_grid must be positive");

    if (doc.contains("plot_dims")) {
        const json& d = doc["plot_dims"];
        if (!d.is_array() || d.size() != 2 || !d[0].is_number_integer() || !d[1].is_number_integer()) {
            throw std::invalid_argument("plot_dims must be a pair of 1-based dimension indices");
        }
        cfg.plot_dims = {d[0].get<int>(), d[1].get<int>()};
    } else {
        cfg.plot_dims = {1, static_cast<int>(std::min<std::size_t>(2, cfg.model.n))};
    }
    const int n = static_cast<int>(cfg.model.n);
    if (cfg.plot_dims.first < 1 || cfg.plot_dims.first > n || cfg.plot_dims.second < 1 || cfg.plot_dims.second > n) {
        throw std::invalid_argument("plot_dims out of range for a model of dimension " + std::to_string(n));
    }

    if (doc.contains("integrator")) {
        const json& ic = doc["integrator"];
        if (!ic.is_object()) throw std::invalid_argument("'integrator' must be an object");
        reject_unknown(ic, {"rel_tol", "abs_tol", "initial_step", "max_steps"}, "integrator");
        if (ic.contains("rel_tol")) cfg.integrator.rel_tol = get_as<double>(ic, "rel_tol");
        if (ic.contains("abs_tol")) cfg.integrator.abs_tol = get_as<double>(ic, "abs_tol");
        if (ic.contains("initial_step")) cfg.integrator.initial_step = get_as<double>(ic, "initial_step");
        if (ic.contains("max_steps")) cfg.integrator.max_steps = get_count(ic, "max_steps");
    }
    cfg.integrator.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return experiment_config_from_json(doc);
}

// --- volume estimation ------------------------------------------------------

namespace {

struct GslHandlerGuard {
    gsl_error_handler_t* previous = gsl_set_error_handler_off();
    ~GslHandlerGuard() { gsl_set_error_handler(previous); }
};

// How far x0 lies outside X0, in units of each coordinate's width; <= 0 inside.
double outside_by(const IntervalVector& X0, const Eigen::VectorXd& x0) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < X0.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double w = X0[j].width();
        worst = std::max(worst, std::max(X0[j].lo() - x0[jj], x0[jj] - X0[j].hi()) / w);
    }
    return worst;
}

struct MembershipProbe {
    const SystemModel* model;
    const ReachSpec* spec;
    const IntegratorConfig* cfg;
    Eigen::VectorXd y;
    Eigen::VectorXd p;
    std::size_t free_coord = 0;

    double at(const Eigen::VectorXd& param) const {
        try {
            return outside_by(spec->X0, integrate_phi_backward(*model, spec->t0, spec->T, y, param, *cfg));
        } catch (const IntegrationError&) {
            return std::numeric_limits<double>::infinity();
        }
    }
};

double probe_1d(double v, void* data) {
    auto* probe = static_cast<MembershipProbe*>(data);
    Eigen::VectorXd param = probe->p;
    param[static_cast<Eigen::Index>(probe->free_coord)] = v;
    return probe->at(param);
}

constexpr double kMemberTol = 1e-9;

// Local line search between grid neighbours a < m < b of the best point.
bool refine(MembershipProbe& probe, double a, double m, double b, double fm) {
    gsl_function fn{&probe_1d, &probe};
    gsl_min_fminimizer* s = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
    bool member = false;
    if (gsl_min_fminimizer_set_with_values(s, &fn, m, fm, a, probe_1d(a, &probe), b, probe_1d(b, &probe)) ==
        GSL_SUCCESS) {
        for (int it = 0; it < 40; ++it) {
            if (gsl_min_fminimizer_iterate(s) != GSL_SUCCESS) break;
            if (gsl_min_fminimizer_f_minimum(s) <= kMemberTol) {
                member = true;
                break;
            }
            const double lo = gsl_min_fminimizer_x_lower(s);
            const double hi = gsl_min_fminimizer_x_upper(s);
            if (gsl_min_test_interval(lo, hi, 1e-12, 1e-10) == GSL_SUCCESS) break;
        }
    }
    gsl_min_fminimizer_free(s);
    return member;
}

}  // namespace

std::optional<double> estimate_reachable_volume(const SystemModel& model, const ReachSpec& spec,
                                                const IntervalVector& box, const VolumeEstimateOptions& options,
                                                const IntegratorConfig& cfg) {
    spec.validate(model.n, model.q);
    if (box.size() != model.n) throw std::invalid_argument("estimate_reachable_volume: box dimension mismatch");
    if (options.samples == 0 || options.param_grid == 0) {
        throw std::invalid_argument("estimate_reachable_volume needs samples > 0 and param_grid > 0");
    }
    for (const auto& c : spec.X0) {
        if (c.is_degenerate()) return std::nullopt;
    }
    const double box_volume = box.volume();
    if (!(box_volume > 0.0) || !std::isfinite(box_volume)) return std::nullopt;

    // Parameter grid over the free coordinates.
    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < spec.P.size(); ++k) {
        if (!spec.P[k].is_degenerate()) free.push_back(k);
    }
    const std::size_t g = free.empty() ? 1 : options.param_grid;
    std::size_t grid_size = 1;
    for (std::size_t k = 0; k < free.size(); ++k) {
        if (grid_size > 1000000 / g) throw std::invalid_argument("estimate_reachable_volume: parameter grid too large");
        grid_size *= g;
    }
    auto node = [&](std::size_t k, std::size_t idx) {
        const Interval& iv = spec.P[free[k]];
        return g == 1 ? iv.mid() : iv.lo() + iv.width() * static_cast<double>(idx) / static_cast<double>(g - 1);
    };

    const GslHandlerGuard guard;
    std::mt19937_64 rng(options.seed);
    std::size_t members = 0;
    MembershipProbe probe{&model, &spec, &cfg, {}, spec.P.lower(), free.empty() ? 0 : free[0]};
    std::vector<double> values(grid_size);
    for (std::size_t s = 0; s < options.samples; ++s) {
        probe.y = sample_box(box, rng);
        bool member = false;
        for (std::size_t cell = 0; cell < grid_size && !member; ++cell) {
            Eigen::VectorXd param = spec.P.lower();
            std::size_t rest = cell;
            for (std::size_t k = free.size(); k-- > 0;) {
                param[static_cast<Eigen::Index>(free[k])] = node(k, rest % g);
                rest /= g;
            }
            values[cell] = probe.at(param);
            member = values[cell] <= kMemberTol;
        }
        if (!member && free.size() == 1 && g >= 3) {
            const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
            if (best > 0 && best + 1 < g && std::isfinite(values[best])) {
                member = refine(probe, node(0, best - 1), node(0, best), node(0, best + 1), values[best]);
            }
        }
        members += member ? 1 : 0;
    }
    return box_volume * static_cast<double>(members) / static_cast<double>(options.samples);
}

// --- experiments ------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

double hull_volume(const std::vector<Eigen::VectorXd>& points) {
    if (points.empty()) return 0.0;
    Eigen::VectorXd lo = points.front();
    Eigen::VectorXd hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).prod();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const SystemModel& model = config.model;
    const ReachSpec& spec = config.spec;
    spec.validate(model.n, model.q);

    ExperimentResult r;
    r.name = config.name;
    r.model_name = config.model_name;
    r.spec = spec;
    r.bounds_method = config.bounds_method;
    r.method = config.method;
    r.plot_dims = config.plot_dims;

    auto t = Clock::now();
    if (config.bounds_method == BoundsMethod::sampling) {
        const SamplingStrategy strategy = config.random_samples > 0
                                              ? SamplingStrategy{RandomSampling{config.random_samples, config.seed}}
                                              : SamplingStrategy{GridSampling{config.grid_per_dim}};
        r.bounds = sample_bounds(model, spec, strategy, config.integrator);
        r.timings.push_back({"sampling", elapsed_ms(t)});
        if (config.max_falsification_iters > 0) {
            t = Clock::now();
            FalsificationOptions opts;
            opts.max_iters = config.max_falsification_iters;
            opts.seed = config.seed;
            FalsificationResult f = falsify_bounds(model, spec, r.bounds, config.integrator, opts);
            r.bounds = std::move(f.bounds);
            r.falsification = f.report;
            r.timings.push_back({"falsification", elapsed_ms(t)});
        }
    } else {
        const JacobianBounds jb = jacobian_bounds(model, spec);
        const std::int64_t minimal = minimal_taylor_order(jb, spec.horizon());
        const std::int64_t order = config.taylor_order.value_or(minimal);
        r.minimal_taylor_order = minimal;
        r.taylor_order = order;
        if (minimal > config.max_taylor_order || order > config.max_taylor_order) {
            throw InfeasibleTaylorOrder(minimal, std::min(order, config.max_taylor_order));
        }
        r.bounds = taylor_sensitivity_bounds(jb, spec.t0, spec.T, order);
        r.timings.push_back({"interval_bounds", elapsed_ms(t)});
    }

    t = Clock::now();
    if (config.method == OverApproxMethod::sign_stable && r.bounds.sign_stable()) {
        r.overapprox = overapprox_sign_stable(model, spec, r.bounds, config.integrator);
        r.applied = OverApproxMethod::sign_stable;
    } else {
        r.overapprox = overapprox_bounded(model, spec, r.bounds, config.integrator);
        r.applied = OverApproxMethod::bounded;
    }
    r.timings.push_back({"overapprox", elapsed_ms(t)});

    t = Clock::now();
    TightnessOptions topts;
    topts.samples = config.mc_samples;
    topts.seed = config.seed + 1;
    topts.corner_prob = config.corner_prob;
    r.tightness = tightness_check(model, spec, r.overapprox, topts, config.integrator);
    const double box_volume = r.overapprox.interval.volume();
    const double hv = hull_volume(r.tightness.successors);
    if (hv > 0.0 && std::isfinite(box_volume)) r.hull_volume_ratio = box_volume / hv;
    r.timings.push_back({"monte_carlo", elapsed_ms(t)});

    if (config.volume_samples > 0) {
        t = Clock::now();
        VolumeEstimateOptions vopts;
        vopts.samples = config.volume_samples;
        vopts.param_grid = config.volume_param_grid;
        vopts.seed = config.seed + 2;
        r.reachable_volume = estimate_reachable_volume(model, spec, r.overapprox.interval, vopts, config.integrator);
        if (r.reachable_volume && *r.reachable_volume > 0.0) r.volume_ratio = box_volume / *r.reachable_volume;
        r.timings.push_back({"volume", elapsed_ms(t)});
    }
    return r;
}

ExperimentResult run_experiment(const std::filesystem::path& config_path) {
    return run_experiment(load_experiment_config(config_path));
}

// --- output -----------------------------------------------------------------

namespace {

json pairs(const IntervalVector& v) {
    json out = json::array();
    for (const auto& c : v) out.push_back({c.lo(), c.hi()});
    return out;
}

json pairs(const IntervalMatrix& m) {
    json out = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back({m(i, j).lo(), m(i, j).hi()});
        out.push_back(std::move(row));
    }
    return out;
}

json flags(const IntervalMatrix& m) {
    json out = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).sign_stable());
        out.push_back(std::move(row));
    }
    return out;
}

json vec(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const ExperimentResult& r, bool include_timings) {
    json out;
    out["name"] = r.name;
    out["model"] = r.model_name;
    out["spec"] = {{"t0", r.spec.t0}, {"T", r.spec.T}, {"X0", pairs(r.spec.X0)}, {"P", pairs(r.spec.P)}};
    out["bounds_method"] = to_string(r.bounds_method);
    out["method"] = to_string(r.method);
    out["applied"] = to_string(r.applied);
    out["bounds"] = {{"sx", pairs(r.bounds.sx)},
                     {"sp", pairs(r.bounds.sp)},
                     {"sign_stable", {{"all", r.bounds.sign_stable()},
                                      {"entries", r.bounds.sign_stable_count()},
                                      {"of", r.bounds.entry_count()},
                                      {"sx", flags(r.bounds.sx)},
                                      {"sp", flags(r.bounds.sp)}}},
                     {"guaranteed", r.bounds.guaranteed}};
    if (r.falsification) {
        out["falsification"] = {{"iterations", r.falsification->iterations},
                                {"enlargements", r.falsification->enlargements},
                                {"final_min_value", r.falsification->final_min_value},
                                {"samples_used", r.falsification->samples_used}};
    } else {
        out["falsification"] = nullptr;
    }
    if (r.taylor_order) {
        out["taylor"] = {{"order", *r.taylor_order}, {"minimal_order", opt(r.minimal_taylor_order)}};
    }
    out["interval"] = pairs(r.overapprox.interval);
    out["tight"] = r.overapprox.tight;
    out["per_dim_slack"] = vec(r.overapprox.per_dim_slack);
    out["phi_evals"] = r.overapprox.phi_evals;
    out["interval_volume"] = r.overapprox.interval.volume();
    out["reachable_volume"] = opt(r.reachable_volume);
    out["volume_ratio"] = opt(r.volume_ratio);
    out["hull_volume_ratio"] = opt(r.hull_volume_ratio);
    out["monte_carlo"] = {{"samples", r.tightness.successors.size()},
                          {"contained_fraction", r.tightness.contained_fraction},
                          {"max_face_gap", vec(r.tightness.max_face_gap)}};
    if (include_timings) {
        json tm = json::object();
        for (const auto& pt : r.timings) tm[pt.phase] = pt.ms;
        out["timings_ms"] = std::move(tm);
    }
    return out;
}

PlotFiles emit_plot_data(const ExperimentResult& result, std::pair<int, int> dims, const std::filesystem::path& dir,
                         const std::string& stem) {
    const int n = static_cast<int>(result.overapprox.interval.size());
    const auto [a, b] = dims;
    if (a < 1 || a > n || b < 1 || b > n) {
        throw std::invalid_argument("plot dims (" + std::to_string(a) + ", " + std::to_string(b) +
                                    ") out of range for dimension " + std::to_string(n));
    }
    if (result.tightness.successors.empty()) throw std::invalid_argument("result holds no Monte-Carlo successors");
    std::filesystem::create_directories(dir);
    const auto i = static_cast<std::size_t>(a - 1);
    const auto j = static_cast<std::size_t>(b - 1);
    const std::string header = "x" + std::to_string(a) + ",x" + std::to_string(b) + "\n";

    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        out << std::setprecision(17);
        return out;
    };
    auto corners = [&](std::ofstream& out, const IntervalVector& box) {
        out << header;
        out << box[i].lo() << ',' << box[j].lo() << '\n';
        out << box[i].hi() << ',' << box[j].lo() << '\n';
        out << box[i].hi() << ',' << box[j].hi() << '\n';
        out << box[i].lo() << ',' << box[j].hi() << '\n';
    };

    PlotFiles files{dir / (stem + "_samples.csv"), dir / (stem + "_box.csv"), dir / (stem + "_x0.csv")};
    {
        auto out = open(files.samples);
        out << header;
        for (const auto& y : result.tightness.successors) {
            out << y[static_cast<Eigen::Index>(i)] << ',' << y[static_cast<Eigen::Index>(j)] << '\n';
        }
    }
    {
        auto out = open(files.box);
        corners(out, result.overapprox.interval);
    }
    {
        auto out = open(files.x0);
        corners(out, result.spec.X0);
    }
    return files;
}

// --- suites -----------------------------------------------------------------

std::vector<json> suite_configs(const std::string& suite) {
    if (suite != "paper") throw std::invalid_argument("unknown suite '" + suite + "' (available: paper)");
    return {
        {{"name", "traffic3-sampling"},
         {"model", "traffic3"},
         {"bounds_method", "sampling"},
         {"sampling", {{"grid_per_dim", 2}, {"max_falsification_iters", 20}}},
         {"plot_dims", {1, 3}}},
        {{"name", "traffic3-interval"},
         {"model", "traffic3"},
         {"bounds_method", "interval-arith"},
         {"taylor_order", 7},
         {"plot_dims", {1, 3}}},
        {{"name", "traffic11-sampling"},
         {"model", "traffic11"},
         {"bounds_method", "sampling"},
         {"sampling", {{"grid_per_dim", 2}, {"max_falsification_iters", 20}}},
         {"volume_samples", 0},
         {"plot_dims", {1, 3}}},
        {{"name", "traffic11-interval"},
         {"model", "traffic11"},
         {"bounds_method", "interval-arith"},
         {"taylor_order", 15},
         {"volume_samples", 0},
         {"plot_dims", {1, 3}}},
        {{"name", "satellite-sampling"},
         {"model", "satellite"},
         {"bounds_method", "sampling"},
         {"sampling", {{"random_samples", 100}, {"max_falsification_iters", 20}}},
         {"plot_dims", {1, 3}}},
        {{"name", "satellite-interval"},
         {"model", "satellite"},
         {"bounds_method", "interval-arith"},
         {"plot_dims", {1, 3}}},
    };
}

std::vector<SuiteEntry> run_suite(const std::string& suite, const SuiteOptions& options) {
    std::vector<SuiteEntry> out;
    for (json doc : suite_configs(suite)) {
        if (options.seed) doc["seed"] = *options.seed;
        if (options.mc_samples) doc["mc_samples"] = *options.mc_samples;
        SuiteEntry e;
        e.name = doc["name"].get<std::string>();
        try {
            e.result = run_experiment(experiment_config_from_json(doc));
        } catch (const InfeasibleTaylorOrder& ex) {
            e.error = ex.what();
            e.minimal_taylor_order = ex.minimal_order();
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

// Interval-arith box volume over sampled box volume, per model.
std::vector<std::pair<std::string, double>> cross_ratios(const std::vector<SuiteEntry>& entries) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& a : entries) {
        if (!a.result || a.result->bounds_method != BoundsMethod::interval_arith) continue;
        for (const auto& b : entries) {
            if (!b.result || b.result->bounds_method != BoundsMethod::sampling) continue;
            if (b.result->model_name != a.result->model_name) continue;
            out.emplace_back(a.result->model_name,
                             a.result->overapprox.interval.volume() / b.result->overapprox.interval.volume());
        }
    }
    return out;
}

}  // namespace

json to_json(const std::vector<SuiteEntry>& entries, bool include_timings) {
    json out;
    json list = json::array();
    for (const auto& e : entries) {
        json item;
        if (e.result) {
            item = to_json(*e.result, include_timings);
        } else {
            item["name"] = e.name;
            item["error"] = e.error;
            item["minimal_taylor_order"] = opt(e.minimal_taylor_order);
        }
        list.push_back(std::move(item));
    }
    out["experiments"] = std::move(list);
    json ratios = json::object();
    for (const auto& [model, ratio] : cross_ratios(entries)) ratios[model] = ratio;
    out["interval_over_sampled_volume"] = std::move(ratios);
    return out;
}

std::string suite_summary(const std::vector<SuiteEntry>& entries) {
    std::ostringstream os;
    auto fmt = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        std::ostringstream s;
        s << std::setprecision(3) << *v;
        return s.str();
    };
    os << std::left << std::setw(22) << "experiment" << std::setw(12) << "stable" << std::setw(13) << "path"
       << std::setw(6) << "phi" << std::setw(10) << "vol/true" << std::setw(10) << "vol/hull" << std::setw(11)
       << "contained" << "time_s\n";
    for (const auto& e : entries) {
        os << std::setw(22) << e.name;
        if (!e.result) {
            os << "error: " << e.error << '\n';
            continue;
        }
        const ExperimentResult& r = *e.result;
        double total = 0.0;
        for (const auto& pt : r.timings) total += pt.ms;
        os << std::setw(12)
           << (std::to_string(r.bounds.sign_stable_count()) + "/" + std::to_string(r.bounds.entry_count()))
           << std::setw(13) << to_string(r.applied) << std::setw(6) << r.overapprox.phi_evals << std::setw(10)
           << fmt(r.volume_ratio) << std::setw(10) << fmt(r.hull_volume_ratio) << std::setw(11)
           << fmt(r.tightness.contained_fraction) << fmt(total / 1000.0) << '\n';
    }
    for (const auto& [model, ratio] : cross_ratios(entries)) {
        os << model << ": interval-arith box volume / sampled box volume = " << fmt(ratio) << '\n';
    }
    return os.str();
}

}  // namespace sensreach
