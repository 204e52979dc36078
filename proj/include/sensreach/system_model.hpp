// ODE systems x' = f(t, x, p) with analytic Jacobians, plus the built-in
// traffic-network and satellite benchmarks.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sensreach/interval.hpp"

namespace sensreach {

// Problem data: reach from X0 under parameters P over [t0, T].
struct ReachSpec {
    double t0 = 0.0;
    double T = 0.0;
    IntervalVector X0;
    IntervalVector P;

    // Throws std::invalid_argument unless T >= t0 and the boxes have sizes n, q.
    void validate(std::size_t n, std::size_t q) const;
    [[nodiscard]] double horizon() const noexcept { return T - t0; }
};

using VectorField = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& p)>;
using JacobianFn = std::function<Eigen::MatrixXd(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& p)>;
// Interval enclosure of a Jacobian over a state box and parameter box (any t).
using JacobianRangeFn = std::function<IntervalMatrix(const IntervalVector& x, const IntervalVector& p)>;
// A box that contains every trajectory started in X0 under parameters in P,
// for all t >= t0.
using InvariantBoxFn = std::function<IntervalVector(const IntervalVector& X0, const IntervalVector& P)>;

struct SystemModel {
    std::string name;
    std::size_t n = 0;
    std::size_t q = 0;
    VectorField f;
    JacobianFn jac_x;
    JacobianFn jac_p;

    // Optional capabilities; required by the guaranteed (interval) bounds path.
    JacobianRangeFn jac_x_range;
    JacobianRangeFn jac_p_range;
    InvariantBoxFn invariant_box;

    // The benchmark problem the model ships with, if any.
    std::optional<ReachSpec> default_spec;
};

// --- built-in models --------------------------------------------------------

struct TrafficParams {
    double capacity = 40.0;         // c
    double free_flow_speed = 0.5;   // v
    double jam_density = 320.0;     // x-bar
    double congestion_speed = 1.0 / 6.0;  // w
    double time_step = 30.0;        // the 1/T scaling of the dynamics, seconds
    double turning_ratio = 0.75;    // beta
};

// Three-link diverge junction; n = 3, q = 1 (inflow to link 1).
[[nodiscard]] SystemModel model_traffic3(const TrafficParams& params = {});

// n_links-link network: link 1 diverges into two chains 2->4->6.. and
// 3->5->7..; n_links must be odd and >= 5.  Throws std::invalid_argument.
[[nodiscard]] SystemModel model_traffic_n(int n_links, const TrafficParams& params = {});

struct SatelliteParams {
    double radius_lo = 6.7718e3;  // R + 400, km
    double radius_hi = 6.7845e3;
    double mu_lo = 3.9779e5;      // p = GM, km^3/s^2
    double mu_hi = 3.9938e5;
    double horizon = 5520.0;      // s
};

// Planar orbit in polar coordinates (r, r', theta, theta'); n = 4, q = 1.
[[nodiscard]] SystemModel model_satellite(const SatelliteParams& params = {});

// x' = A x + B p with constant A, B.  Used for closed-form checks.
[[nodiscard]] SystemModel model_linear(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::string name = "linear");

// --- registry and configuration ----------------------------------------------

using ModelFactory = std::function<SystemModel()>;

// Adds (or replaces) a named model available to model_from_config.
void register_model(const std::string& name, ModelFactory factory);
// Built-ins: "traffic3", "traffic<N>" (odd N >= 5), "satellite", plus
// anything registered.  Throws std::invalid_argument for unknown names.
[[nodiscard]] SystemModel make_model(const std::string& name);
[[nodiscard]] std::vector<std::string> registered_models();

struct ConfiguredModel {
    SystemModel model;
    ReachSpec spec;
};

// Reads keys model, t0, T, X0 ([[lo, hi], ...]) and P from the document.
// Missing spec keys fall back to the model's default problem.  Throws
// std::invalid_argument on unknown models, dimension mismatches and
// malformed values.
[[nodiscard]] ConfiguredModel model_from_config(const nlohmann::json& doc);

// Jacobian of f at (t, x, p) by central differences with step
// rel_step * (1 + |x_j|).  Test and diagnostic helper.
[[nodiscard]] Eigen::MatrixXd finite_difference_jac_x(const SystemModel& model, double t, const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd& p, double rel_step = 1e-6);
[[nodiscard]] Eigen::MatrixXd finite_difference_jac_p(const SystemModel& model, double t, const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd& p, double rel_step = 1e-6);

}  // namespace sensreach
