#include "sensreach/taylor.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sensreach {

JacobianBounds jacobian_bounds(const SystemModel& model, const IntervalVector& box, const IntervalVector& P) {
    if (!model.jac_x_range || !model.jac_p_range) {
        throw std::invalid_argument("model '" + model.name + "' provides no Jacobian range functions");
    }
    if (box.size() != model.n || P.size() != model.q) throw std::invalid_argument("jacobian_bounds: dimension mismatch");
    JacobianBounds jb{model.jac_x_range(box, P), model.jac_p_range(box, P), box};
    if (jb.A.rows() != model.n || jb.A.cols() != model.n || jb.B.rows() != model.n || jb.B.cols() != model.q) {
        throw std::invalid_argument("model '" + model.name + "' returned Jacobian ranges of the wrong shape");
    }
    return jb;
}

JacobianBounds jacobian_bounds(const SystemModel& model, const ReachSpec& spec) {
    spec.validate(model.n, model.q);
    if (!model.invariant_box) throw std::invalid_argument("model '" + model.name + "' provides no invariant box");
    return jacobian_bounds(model, model.invariant_box(spec.X0, spec.P), spec.P);
}

InfeasibleTaylorOrder::InfeasibleTaylorOrder(std::int64_t minimal_order, std::int64_t requested_order)
    : std::runtime_error("infeasible Taylor order: the remainder bound needs order >= " + std::to_string(minimal_order) +
                         ", requested " + std::to_string(requested_order)),
      minimal_(minimal_order),
      requested_(requested_order) {}

namespace {

double scaled_norm(const JacobianBounds& jb, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("time step must be >= 0");
    return rounding::mul_up(norm_inf(jb.A), dt);
}

}  // namespace

std::int64_t minimal_taylor_order(const JacobianBounds& jb, double dt) {
    const double alpha = scaled_norm(jb, dt);
    if (alpha == 0.0) return 0;
    constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
    if (!(alpha < 9.0e18)) return kMax;
    return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(alpha)) - 1);
}

double taylor_remainder(double alpha, std::int64_t order) {
    if (order < 0) throw std::invalid_argument("Taylor order must be >= 0");
    if (alpha == 0.0) return 0.0;
    const double m = static_cast<double>(order);
    if (!(alpha < m + 2.0)) return std::numeric_limits<double>::infinity();
    // log eps = (m+1) log alpha - log (m+1)! - log(1 - alpha/(m+2)), then
    // inflated to cover the rounding of each elementary function.
    const double log_eps = (m + 1.0) * std::log(alpha) - std::lgamma(m + 2.0) - std::log1p(-alpha / (m + 2.0));
    const double slack = 1e-9 + 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(log_eps));
    return rounding::mul_up(std::exp(log_eps), 1.0 + slack);
}

namespace {

IntervalMatrix divide(const IntervalMatrix& m, double k) {
    IntervalMatrix out = m;
    const Interval d(k);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j) / d;
    }
    return out;
}

bool is_zero(const IntervalMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m(i, j).lo() != 0.0 || m(i, j).hi() != 0.0) return false;
        }
    }
    return true;
}

}  // namespace

SensitivityBounds taylor_sensitivity_bounds(const JacobianBounds& jb, double t0, double T, std::int64_t order) {
    const std::size_t n = jb.A.rows();
    if (jb.A.cols() != n || jb.B.rows() != n) throw std::invalid_argument("taylor_sensitivity_bounds: shape mismatch");
    if (!(T >= t0)) throw std::invalid_argument("taylor_sensitivity_bounds: T must be >= t0");
    const double dt = T - t0;
    const std::int64_t minimal = minimal_taylor_order(jb, dt);
    if (order < minimal) throw InfeasibleTaylorOrder(minimal, order);

    const IntervalMatrix M = dt * jb.A;
    IntervalMatrix term = IntervalMatrix::identity(n);
    IntervalMatrix sum_x = term;
    IntervalMatrix sum_p = term;
    // A zero power means every matrix in A is nilpotent: the series ends
    // there and the tail vanishes.
    bool terminated = false;
    for (std::int64_t i = 1; i <= order && !terminated; ++i) {
        term = divide(term * M, static_cast<double>(i));
        if (is_zero(term)) {
            terminated = true;
            break;
        }
        sum_x = sum_x + term;
        sum_p = sum_p + divide(term, static_cast<double>(i + 1));
    }
    const double eps = terminated ? 0.0 : taylor_remainder(scaled_norm(jb, dt), order);
    const IntervalMatrix E = IntervalMatrix::symmetric_box(n, n, eps);

    SensitivityBounds out;
    out.sx = sum_x + E;
    out.sp = (sum_p + E) * (dt * jb.B);
    out.guaranteed = true;
    out.t0 = t0;
    out.T = T;
    return out;
}

}  // namespace sensreach
