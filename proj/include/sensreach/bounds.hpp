// Sensitivity bounds over X0 x P and their two sources: sampling with
// falsification, and interval Taylor enclosures (see taylor.hpp).

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sensreach/integrator.hpp"
#include "sensreach/interval.hpp"
#include "sensreach/system_model.hpp"

namespace sensreach {

struct SensitivityBounds {
    IntervalMatrix sx;  // n x n
    IntervalMatrix sp;  // n x q
    // True only for enclosures that are sound by construction.
    bool guaranteed = false;
    double t0 = 0.0;
    double T = 0.0;

    // Degenerate bounds at one sensitivity value.
    static SensitivityBounds at(const Eigen::MatrixXd& sx, const Eigen::MatrixXd& sp, double t0, double T);

    // Elementwise min/max with a sensitivity value.
    void include(const Eigen::MatrixXd& sx_value, const Eigen::MatrixXd& sp_value);

    [[nodiscard]] bool contains(const Eigen::MatrixXd& sx_value, const Eigen::MatrixXd& sp_value) const;
    [[nodiscard]] bool contains(const SensitivityBounds& other) const;
    [[nodiscard]] bool sign_stable() const { return sx.sign_stable() && sp.sign_stable(); }
    [[nodiscard]] std::size_t sign_stable_count() const { return sx.sign_stable_count() + sp.sign_stable_count(); }
    [[nodiscard]] std::size_t entry_count() const { return sx.rows() * sx.cols() + sp.rows() * sp.cols(); }
};

// --- sampling ---------------------------------------------------------------

// k points per non-degenerate coordinate of X0 x P (endpoints included for
// k >= 2, the midpoint for k = 1); degenerate coordinates are held fixed.
struct GridSampling {
    std::size_t per_dim = 2;
};

struct RandomSampling {
    std::size_t count = 100;
    std::uint64_t seed = 0;
};

using SamplingStrategy = std::variant<GridSampling, RandomSampling>;

struct SamplePoint {
    Eigen::VectorXd x0;
    Eigen::VectorXd p;
};

// The (x0, p) pairs a strategy visits.  Throws std::invalid_argument when it
// would yield no samples.
[[nodiscard]] std::vector<SamplePoint> sample_points(const ReachSpec& spec, const SamplingStrategy& strategy);

[[nodiscard]] SensitivityBounds sample_bounds(const SystemModel& model, const ReachSpec& spec,
                                              const SamplingStrategy& strategy, const IntegratorConfig& cfg = {});

// A point of the box.  Each coordinate is its lower endpoint with probability
// corner_prob, its upper endpoint with probability corner_prob, and uniform
// otherwise.  corner_prob = 0 gives uniform draws.
[[nodiscard]] Eigen::VectorXd sample_box(const IntervalVector& box, std::mt19937_64& rng, double corner_prob = 0.0);

// --- falsification ----------------------------------------------------------

struct FalsificationOptions {
    std::size_t max_iters = 20;
    // Nelder-Mead starts per pass and iteration.
    std::size_t starts = 5;
    // Objective evaluations allowed per start.
    std::size_t max_evals = 200;
    std::uint64_t seed = 0;
};

struct FalsificationReport {
    std::size_t iterations = 0;
    double final_min_value = 0.0;
    std::size_t enlargements = 0;
    std::size_t samples_used = 0;
};

struct FalsificationResult {
    SensitivityBounds bounds;
    FalsificationReport report;
};

// min over entries of (half-width - |s - center|): positive strictly inside,
// negative as soon as one entry lies outside.
[[nodiscard]] double falsification_objective(const IntervalMatrix& bounds, const Eigen::MatrixXd& s);

// Searches X0 x P for sensitivities outside the bounds and enlarges the
// bounds until a pass finds none (objective >= 0) or max_iters is reached.
// The sx and sp bounds are falsified in separate passes.  Throws
// std::runtime_error on a non-finite objective.
[[nodiscard]] FalsificationResult falsify_bounds(const SystemModel& model, const ReachSpec& spec,
                                                 const SensitivityBounds& bounds, const IntegratorConfig& cfg = {},
                                                 const FalsificationOptions& options = {});

}  // namespace sensreach
