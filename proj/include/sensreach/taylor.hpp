// Guaranteed sensitivity bounds from interval Jacobian bounds.
//
// If Df_x(t, x, p) lies in A and Df_p in B for every x in an invariant box
// and p in P, then with dt = T - t0 and order m
//
//   sx(T) in  sum_{i=0}^{m} (A dt)^i / i!        + E
//   sp(T) in (sum_{i=0}^{m} (A dt)^i / (i + 1)! + E) (dt B)
//
// where E = [-eps, eps]^{n x n}, eps = alpha^{m+1} / (m+1)! / (1 - alpha / (m+2))
// and alpha = ||A||_inf dt.  The tail bound needs alpha < m + 2.

#pragma once

#include <cstdint>
#include <stdexcept>

#include "sensreach/bounds.hpp"
#include "sensreach/interval.hpp"
#include "sensreach/system_model.hpp"

namespace sensreach {

struct JacobianBounds {
    IntervalMatrix A;  // n x n
    IntervalMatrix B;  // n x q
    IntervalVector invariant_box;
};

// Enclosures of jac_x and jac_p over box x P.  Throws std::invalid_argument
// if the model has no range functions, std::domain_error if the box leaves
// the model's domain.
[[nodiscard]] JacobianBounds jacobian_bounds(const SystemModel& model, const IntervalVector& box,
                                             const IntervalVector& P);

// Same, over the model's invariant box for the problem.
[[nodiscard]] JacobianBounds jacobian_bounds(const SystemModel& model, const ReachSpec& spec);

class InfeasibleTaylorOrder : public std::runtime_error {
public:
    InfeasibleTaylorOrder(std::int64_t minimal_order, std::int64_t requested_order);
    [[nodiscard]] std::int64_t minimal_order() const noexcept { return minimal_; }
    [[nodiscard]] std::int64_t requested_order() const noexcept { return requested_; }

private:
    std::int64_t minimal_;
    std::int64_t requested_;
};

// max(0, ceil(alpha) - 1): the smallest order of the form above whose tail
// bound converges.  Grows linearly in dt.
[[nodiscard]] std::int64_t minimal_taylor_order(const JacobianBounds& jb, double dt);

// eps for the given alpha and order, rounded upward; +inf if the tail bound
// diverges (alpha >= m + 2).
[[nodiscard]] double taylor_remainder(double alpha, std::int64_t order);

// Throws InfeasibleTaylorOrder when order < minimal_taylor_order, and
// std::invalid_argument on shape mismatch or T < t0.
[[nodiscard]] SensitivityBounds taylor_sensitivity_bounds(const JacobianBounds& jb, double t0, double T,
                                                          std::int64_t order);

}  // namespace sensreach
