#include "sensreach/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sensreach {

namespace {

// Dormand & Prince (1980) RK5(4)7M tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b - b_hat
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// Step control after Hairer's DOPRI5: PI controller with beta = 0.04, no
// growth directly after a rejection.
// Dense-output coefficients; h * sum(d_i k_i) is the quartic correction to
// the cubic Hermite interpolant over the step.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - 0.75 * kBeta;

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                  const IntegratorConfig& cfg) {
    if (err.size() == 0) return 0.0;
    const Eigen::ArrayXd scale = cfg.abs_tol + cfg.rel_tol * y0.array().abs().max(y1.array().abs());
    return (err.array() / scale).abs().maxCoeff();
}

double weighted_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& y, const IntegratorConfig& cfg) {
    if (v.size() == 0) return 0.0;
    const Eigen::ArrayXd scale = cfg.abs_tol + cfg.rel_tol * y.array().abs();
    return std::sqrt((v.array() / scale).square().mean());
}

// Hairer, Norsett & Wanner, "Solving ODEs I", II.4.
double initial_step(const OdeRhs& rhs, double t, const Eigen::VectorXd& y, const Eigen::VectorXd& f0, double dir,
                    double span, const IntegratorConfig& cfg, IntegrationStats& stats) {
    const double d0 = weighted_norm(y, y, cfg);
    const double d1 = weighted_norm(f0, y, cfg);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Eigen::VectorXd y1 = y + dir * h0 * f0;
    Eigen::VectorXd f1(y.size());
    rhs(t + dir * h0, y1, f1);
    ++stats.rhs_evals;
    const double d2 = weighted_norm(f1 - f0, y, cfg) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span});
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
    if (initial_step < 0.0) throw std::invalid_argument("IntegratorConfig: initial_step must be >= 0");
    if (max_steps == 0) throw std::invalid_argument("IntegratorConfig: max_steps must be > 0");
}

Eigen::VectorXd dopri5(const OdeRhs& rhs, double t_start, double t_end, Eigen::VectorXd y, const IntegratorConfig& cfg,
                       IntegrationStats* stats_out, Eigen::Index smooth_dim) {
    cfg.validate();
    IntegrationStats stats;
    if (t_end == t_start) {
        if (stats_out) *stats_out = stats;
        return y;
    }
    const double dir = t_end > t_start ? 1.0 : -1.0;
    const Eigen::Index dim = y.size();
    Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim), ynew(dim), err(dim);

    double t = t_start;
    rhs(t, y, k1);
    ++stats.rhs_evals;
    if (!k1.allFinite()) throw IntegrationError("non-finite derivative at t = " + std::to_string(t));

    double h = cfg.initial_step > 0.0 ? std::min(cfg.initial_step, std::abs(t_end - t))
                                      : initial_step(rhs, t, y, k1, dir, std::abs(t_end - t), cfg, stats);
    const double min_step = 1e-14 * std::max({1.0, std::abs(t_start), std::abs(t_end)});
    double err_old = 1e-4;
    bool rejected_last = false;

    while (dir * (t_end - t) > 0.0) {
        if (stats.accepted + stats.rejected >= cfg.max_steps) {
            throw IntegrationError("step limit of " + std::to_string(cfg.max_steps) + " reached at t = " +
                                   std::to_string(t));
        }
        bool last = false;
        if (h >= std::abs(t_end - t)) {
            h = std::abs(t_end - t);
            last = true;
        }
        const double hs = dir * h;

        ytmp = y + hs * a21 * k1;
        rhs(t + c2 * hs, ytmp, k2);
        ytmp = y + hs * (a31 * k1 + a32 * k2);
        rhs(t + c3 * hs, ytmp, k3);
        ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * hs, ytmp, k4);
        ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * hs, ytmp, k5);
        ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + hs, ytmp, k6);
        ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + hs, ynew, k7);
        stats.rhs_evals += 6;

        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = error_norm(err, y, ynew, cfg);
        // The interpolant's quartic term at mid-step, as a second estimate.
        // Across a kink in f both embedded solutions are only first-order
        // accurate and their difference can vanish; this term does not.
        const Eigen::Index m = smooth_dim < 0 ? dim : std::min(smooth_dim, dim);
        if (m > 0) {
            const Eigen::VectorXd defect =
                hs * (d1 * k1.head(m) + d3 * k3.head(m) + d4 * k4.head(m) + d5 * k5.head(m) + d6 * k6.head(m) +
                      d7 * k7.head(m)) / 16.0;
            en = std::max(en, error_norm(defect, y.head(m), ynew.head(m), cfg));
        }

        if (!ynew.allFinite() || !k7.allFinite() || !std::isfinite(en)) {
            ++stats.rejected;
            h *= kFacMin;
            rejected_last = true;
            if (h < min_step) throw IntegrationError("non-finite state near t = " + std::to_string(t));
            continue;
        }

        if (en <= 1.0) {
            ++stats.accepted;
            t = last ? t_end : t + hs;
            y.swap(ynew);
            k1.swap(k7);
            double fac = en == 0.0 ? kFacMax
                                   : std::clamp(kSafety * std::pow(en, -kExpo) * std::pow(err_old, kBeta), kFacMin, kFacMax);
            if (rejected_last) fac = std::min(fac, 1.0);
            h *= fac;
            err_old = std::max(en, 1e-4);
            rejected_last = false;
        } else {
            ++stats.rejected;
            rejected_last = true;
            h *= std::max(kFacMin, kSafety * std::pow(en, -kExpo));
            if (h < min_step) throw IntegrationError("step size underflow at t = " + std::to_string(t));
        }
    }
    if (stats_out) *stats_out = stats;
    return y;
}

namespace {

void check_dims(const SystemModel& model, const Eigen::VectorXd& x0, const Eigen::VectorXd& p) {
    if (static_cast<std::size_t>(x0.size()) != model.n || static_cast<std::size_t>(p.size()) != model.q) {
        throw std::invalid_argument("dimension mismatch for model '" + model.name + "'");
    }
}

}  // namespace

Eigen::VectorXd integrate_phi(const SystemModel& model, double t0, double T, const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& p, const IntegratorConfig& cfg) {
    check_dims(model, x0, p);
    if (!(T >= t0)) throw std::invalid_argument("integrate_phi: T must be >= t0");
    if (T == t0) return x0;
    const OdeRhs rhs = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) { dx = model.f(t, x, p); };
    return dopri5(rhs, t0, T, x0, cfg);
}

Eigen::VectorXd integrate_phi_backward(const SystemModel& model, double t0, double T, const Eigen::VectorXd& xT,
                                       const Eigen::VectorXd& p, const IntegratorConfig& cfg) {
    check_dims(model, xT, p);
    if (!(T >= t0)) throw std::invalid_argument("integrate_phi_backward: T must be >= t0");
    if (T == t0) return xT;
    const OdeRhs rhs = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) { dx = model.f(t, x, p); };
    return dopri5(rhs, T, t0, xT, cfg);
}

Eigen::VectorXd pack_augmented(const AugmentedState& s) {
    const auto n = s.x.size();
    const auto q = s.sp.cols();
    Eigen::VectorXd y(n + n * n + n * q);
    y.head(n) = s.x;
    Eigen::Map<RowMajorMatrix>(y.data() + n, n, n) = s.sx;
    Eigen::Map<RowMajorMatrix>(y.data() + n + n * n, n, q) = s.sp;
    return y;
}

AugmentedState unpack_augmented(const Eigen::VectorXd& y, std::size_t n_, std::size_t q_, double t) {
    const auto n = static_cast<Eigen::Index>(n_);
    const auto q = static_cast<Eigen::Index>(q_);
    if (y.size() != n + n * n + n * q) throw std::invalid_argument("unpack_augmented: size mismatch");
    AugmentedState s;
    s.t = t;
    s.x = y.head(n);
    s.sx = Eigen::Map<const RowMajorMatrix>(y.data() + n, n, n);
    s.sp = Eigen::Map<const RowMajorMatrix>(y.data() + n + n * n, n, q);
    return s;
}

AugmentedState integrate_augmented(const SystemModel& model, double t0, double T, const Eigen::VectorXd& x0,
                                   const Eigen::VectorXd& p, const IntegratorConfig& cfg) {
    check_dims(model, x0, p);
    if (!(T >= t0)) throw std::invalid_argument("integrate_augmented: T must be >= t0");
    const auto n = static_cast<Eigen::Index>(model.n);
    const auto q = static_cast<Eigen::Index>(model.q);

    AugmentedState init;
    init.t = t0;
    init.x = x0;
    init.sx = Eigen::MatrixXd::Identity(n, n);
    init.sp = Eigen::MatrixXd::Zero(n, q);
    if (T == t0) return init;

    const OdeRhs rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy.resize(y.size());
        const Eigen::VectorXd x = y.head(n);
        const Eigen::MatrixXd J = model.jac_x(t, x, p);
        dy.head(n) = model.f(t, x, p);
        Eigen::Map<const RowMajorMatrix> sx(y.data() + n, n, n);
        Eigen::Map<RowMajorMatrix>(dy.data() + n, n, n).noalias() = J * sx;
        if (q > 0) {
            Eigen::Map<const RowMajorMatrix> sp(y.data() + n + n * n, n, q);
            Eigen::Map<RowMajorMatrix> dsp(dy.data() + n + n * n, n, q);
            dsp.noalias() = J * sp;
            dsp += model.jac_p(t, x, p);
        }
    };
    // The sensitivity right-hand side jumps where the active branch of a
    // piecewise f switches, so only the state takes part in the defect test.
    const Eigen::VectorXd yT = dopri5(rhs, t0, T, pack_augmented(init), cfg, nullptr, n);
    return unpack_augmented(yT, model.n, model.q, T);
}

}  // namespace sensreach
