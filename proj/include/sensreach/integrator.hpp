// Trajectory and sensitivity integration.
//
// The flow x(T) and the sensitivities sx = dx(T)/dx0, sp = dx(T)/dp are
// integrated together as one augmented ODE:
//
//   x'  = f(t, x, p)
//   sx' = Df_x(t, x, p) sx,          sx(t0) = I
//   sp' = Df_x(t, x, p) sp + Df_p,   sp(t0) = 0
//
// with an embedded Dormand-Prince 5(4) pair.

#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "sensreach/system_model.hpp"

namespace sensreach {

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    // 0 selects a starting step automatically.
    double initial_step = 0.0;
    std::size_t max_steps = 200000;

    void validate() const;
};

// Step-count exhaustion or a non-finite state (blow-up, leaving the model's
// domain).
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

// y' = rhs(t, y) on [t_start, t_end]; t_end < t_start integrates backwards.
using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

// Steps are accepted when both the embedded 5(4) estimate and the
// interpolant's mid-step correction are within tolerance.  The latter stays
// reliable when rhs is only piecewise smooth, but it stalls on a rhs with
// jumps; it is applied to the first smooth_dim components only (all when
// negative).
[[nodiscard]] Eigen::VectorXd dopri5(const OdeRhs& rhs, double t_start, double t_end, Eigen::VectorXd y0,
                                     const IntegratorConfig& cfg, IntegrationStats* stats = nullptr,
                                     Eigen::Index smooth_dim = -1);

struct AugmentedState {
    double t = 0.0;
    Eigen::VectorXd x;
    Eigen::MatrixXd sx;  // n x n
    Eigen::MatrixXd sp;  // n x q
};

// Phi(T; t0, x0, p).  Requires T >= t0; returns x0 unchanged when T == t0.
[[nodiscard]] Eigen::VectorXd integrate_phi(const SystemModel& model, double t0, double T, const Eigen::VectorXd& x0,
                                            const Eigen::VectorXd& p, const IntegratorConfig& cfg = {});

// Inverse flow: the x0 with Phi(T; t0, x0, p) = xT, by integrating from T back to t0.
[[nodiscard]] Eigen::VectorXd integrate_phi_backward(const SystemModel& model, double t0, double T,
                                                     const Eigen::VectorXd& xT, const Eigen::VectorXd& p,
                                                     const IntegratorConfig& cfg = {});

[[nodiscard]] AugmentedState integrate_augmented(const SystemModel& model, double t0, double T,
                                                 const Eigen::VectorXd& x0, const Eigen::VectorXd& p,
                                                 const IntegratorConfig& cfg = {});

// Layout of the augmented vector: x, then sx row-major, then sp row-major.
[[nodiscard]] Eigen::VectorXd pack_augmented(const AugmentedState& s);
[[nodiscard]] AugmentedState unpack_augmented(const Eigen::VectorXd& y, std::size_t n, std::size_t q, double t);

}  // namespace sensreach
