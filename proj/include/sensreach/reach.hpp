// Interval over-approximations of the reachable set at time T from
// sensitivity bounds.
//
// For output dimension i, each coordinate j of X0 (and k of P) is pushed to
// the endpoint that decreases x_i(T) for the lower successor and to the
// opposite endpoint for the upper one, according to the sign of the center
// of sensitivity entry (i, j).  With sign-stable bounds the two successors
// give the exact interval hull; otherwise compensation terms c, d widen it:
//
//   lo_i = Phi_i(xi_lo, pi_lo) - c_i . (xi_lo - xi_hi) - d_i . (pi_lo - pi_hi)
//   hi_i = Phi_i(xi_hi, pi_hi) + c_i . (xi_lo - xi_hi) + d_i . (pi_lo - pi_hi)

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "sensreach/bounds.hpp"
#include "sensreach/integrator.hpp"
#include "sensreach/interval.hpp"
#include "sensreach/system_model.hpp"

namespace sensreach {

struct VertexSelection {
    // Row i holds the vertices for output dimension i.
    Eigen::MatrixXd xi_lo;  // n x n
    Eigen::MatrixXd xi_hi;  // n x n
    Eigen::MatrixXd pi_lo;  // n x q
    Eigen::MatrixXd pi_hi;  // n x q
};

struct Compensation {
    Eigen::MatrixXd c;  // n x n
    Eigen::MatrixXd d;  // n x q
};

struct OverApprox {
    IntervalVector interval;
    // True when no compensation was needed.
    bool tight = false;
    Eigen::VectorXd per_dim_slack;
    // Distinct successor evaluations.
    std::size_t phi_evals = 0;
};

// Center >= 0 picks (lo, hi), center < 0 picks (hi, lo).
[[nodiscard]] VertexSelection select_vertices(const IntervalMatrix& sx, const IntervalMatrix& sp,
                                              const IntervalVector& X0, const IntervalVector& P);
[[nodiscard]] VertexSelection select_vertices(const SensitivityBounds& bounds, const IntervalVector& X0,
                                              const IntervalVector& P);

// Entry min(0, lo) when the center is >= 0, max(0, hi) otherwise.
[[nodiscard]] Compensation compensation_vectors(const IntervalMatrix& sx, const IntervalMatrix& sp);
[[nodiscard]] Compensation compensation_vectors(const SensitivityBounds& bounds);

// Two successors per dimension; requires sign-stable bounds (throws
// std::invalid_argument otherwise).
[[nodiscard]] OverApprox overapprox_sign_stable(const SystemModel& model, const ReachSpec& spec,
                                                const SensitivityBounds& bounds, const IntegratorConfig& cfg = {});

// Any bounds.  Coincides exactly with overapprox_sign_stable when the bounds
// are sign-stable.
[[nodiscard]] OverApprox overapprox_bounded(const SystemModel& model, const ReachSpec& spec,
                                            const SensitivityBounds& bounds, const IntegratorConfig& cfg = {});

using DiscreteMap = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& p)>;

// One step of a map F with Jacobian bounds dF/dx in A and dF/dp in B over
// X0 x P.
[[nodiscard]] OverApprox overapprox_discrete(const DiscreteMap& map, const IntervalMatrix& A, const IntervalMatrix& B,
                                             double t, const IntervalVector& X0, const IntervalVector& P);

// Thrown when the compensated lower endpoint exceeds the upper one, which
// means the bounds do not hold.
class AssumptionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TightnessReport {
    double contained_fraction = 0.0;
    // Distance from each face of the interval to the nearest successor.
    Eigen::VectorXd lower_gap;
    Eigen::VectorXd upper_gap;
    Eigen::VectorXd max_face_gap;  // max(lower_gap, upper_gap)
    std::vector<Eigen::VectorXd> successors;
};

struct TightnessOptions {
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    // Probability of drawing each coordinate at each endpoint; faces are
    // attained at vertices, so biased draws expose them.
    double corner_prob = 0.25;
    // Successors within rel_tol * (1 + |v|) of the interval count as inside,
    // absorbing integration error.
    double rel_tol = 1e-6;
};

[[nodiscard]] TightnessReport tightness_check(const SystemModel& model, const ReachSpec& spec,
                                             const OverApprox& result, const TightnessOptions& options = {},
                                             const IntegratorConfig& cfg = {});

}  // namespace sensreach
