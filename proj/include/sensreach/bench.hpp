// Experiment driver: config -> bounds -> over-approximation -> diagnostics.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sensreach/bounds.hpp"
#include "sensreach/integrator.hpp"
#include "sensreach/reach.hpp"
#include "sensreach/system_model.hpp"
#include "sensreach/taylor.hpp"

namespace sensreach {

enum class BoundsMethod { sampling, interval_arith };
// sign_stable uses the two-successor formula whenever the bounds allow it;
// bounded always applies the compensated formula.
enum class OverApproxMethod { sign_stable, bounded };

struct ExperimentConfig {
    std::string name;
    std::string model_name;
    SystemModel model;
    ReachSpec spec;
    OverApproxMethod method = OverApproxMethod::sign_stable;
    BoundsMethod bounds_method = BoundsMethod::sampling;

    // Sampling: a grid unless random_samples > 0.
    std::size_t grid_per_dim = 2;
    std::size_t random_samples = 0;
    std::size_t max_falsification_iters = 20;

    // Interval arithmetic: the requested order, or the minimal one when unset.
    std::optional<std::int64_t> taylor_order;
    std::int64_t max_taylor_order = 10000;

    std::uint64_t seed = 0;
    // Forward successors for containment, face gaps and the hull volume.
    std::size_t mc_samples = 10000;
    double corner_prob = 0.25;
    // Points of the membership volume estimate; 0 disables it.
    std::size_t volume_samples = 4000;
    std::size_t volume_param_grid = 41;

    std::pair<int, int> plot_dims{1, 2};  // 1-based
    IntegratorConfig integrator;
};

// Throws std::invalid_argument on unknown keys or malformed values.
[[nodiscard]] ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);
[[nodiscard]] ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct VolumeEstimateOptions {
    std::size_t samples = 4000;
    // Points per non-degenerate parameter coordinate.
    std::size_t param_grid = 41;
    std::uint64_t seed = 0;
};

// Monte-Carlo volume of the reachable set inside box: uniform points y are
// members when, for some p, the backward flow from y lands in X0.  The
// parameter search is a grid refined by a line search when q = 1.  Returns
// std::nullopt when the set is lower-dimensional (X0 degenerate in some
// coordinate) or the box has zero volume.
[[nodiscard]] std::optional<double> estimate_reachable_volume(const SystemModel& model, const ReachSpec& spec,
                                                              const IntervalVector& box,
                                                              const VolumeEstimateOptions& options = {},
                                                              const IntegratorConfig& cfg = {});

struct PhaseTiming {
    std::string phase;
    double ms = 0.0;
};

struct ExperimentResult {
    std::string name;
    std::string model_name;
    ReachSpec spec;
    BoundsMethod bounds_method = BoundsMethod::sampling;
    OverApproxMethod method = OverApproxMethod::sign_stable;

    SensitivityBounds bounds;
    std::optional<FalsificationReport> falsification;
    std::optional<std::int64_t> taylor_order;
    std::optional<std::int64_t> minimal_taylor_order;

    OverApprox overapprox;
    // The formula actually applied.
    OverApproxMethod applied = OverApproxMethod::sign_stable;
    TightnessReport tightness;

    std::optional<double> reachable_volume;
    // Box volume over the membership estimate of the reachable volume.
    std::optional<double> volume_ratio;
    // Box volume over the volume of the successors' interval hull.
    std::optional<double> hull_volume_ratio;

    std::vector<PhaseTiming> timings;
    std::pair<int, int> plot_dims{1, 2};
};

// Throws InfeasibleTaylorOrder (with the minimal order) when interval
// bounds would need an order above max_taylor_order, IntegrationError on
// integrator failures and std::invalid_argument on config errors.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config);
[[nodiscard]] ExperimentResult run_experiment(const std::filesystem::path& config_path);

[[nodiscard]] nlohmann::json to_json(const ExperimentResult& result, bool include_timings = true);

struct PlotFiles {
    std::filesystem::path samples;
    std::filesystem::path box;
    std::filesystem::path x0;
};

// CSVs of the (i, j) projection (1-based dims) of the successors, of the
// box's corners and of X0's corners, named <stem>_samples.csv,
// <stem>_box.csv and <stem>_x0.csv.  Throws std::invalid_argument on
// invalid dims or when the result holds no successors.
PlotFiles emit_plot_data(const ExperimentResult& result, std::pair<int, int> dims, const std::filesystem::path& dir,
                         const std::string& stem);

struct SuiteEntry {
    std::string name;
    std::optional<ExperimentResult> result;
    std::string error;
    std::optional<std::int64_t> minimal_taylor_order;
};

struct SuiteOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> mc_samples;
};

// The built-in configurations of a named suite; only "paper" exists.
[[nodiscard]] std::vector<nlohmann::json> suite_configs(const std::string& suite);

// Runs every configuration, recording failures instead of stopping.
[[nodiscard]] std::vector<SuiteEntry> run_suite(const std::string& suite, const SuiteOptions& options = {});

[[nodiscard]] nlohmann::json to_json(const std::vector<SuiteEntry>& entries, bool include_timings = true);

// Fixed-width table: sign-stability, path, volume ratios, successor counts.
[[nodiscard]] std::string suite_summary(const std::vector<SuiteEntry>& entries);

[[nodiscard]] std::string to_string(BoundsMethod m);
[[nodiscard]] std::string to_string(OverApproxMethod m);

}  // namespace sensreach
