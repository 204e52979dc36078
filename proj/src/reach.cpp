#include "sensreach/reach.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

namespace sensreach {

namespace {

void check_shapes(const IntervalMatrix& sx, const IntervalMatrix& sp, const IntervalVector& X0, const IntervalVector& P) {
    const std::size_t n = sx.rows();
    if (sx.cols() != X0.size() || sp.rows() != n || sp.cols() != P.size()) {
        throw std::invalid_argument("sensitivity bounds do not match X0 / P dimensions");
    }
}

}  // namespace

VertexSelection select_vertices(const IntervalMatrix& sx, const IntervalMatrix& sp, const IntervalVector& X0,
                                const IntervalVector& P) {
    check_shapes(sx, sp, X0, P);
    const auto n = static_cast<Eigen::Index>(sx.rows());
    const auto nx = static_cast<Eigen::Index>(X0.size());
    const auto q = static_cast<Eigen::Index>(P.size());
    VertexSelection v{Eigen::MatrixXd(n, nx), Eigen::MatrixXd(n, nx), Eigen::MatrixXd(n, q), Eigen::MatrixXd(n, q)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        for (Eigen::Index j = 0; j < nx; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const bool up = sx(ui, uj).mid() >= 0.0;
            v.xi_lo(i, j) = up ? X0[uj].lo() : X0[uj].hi();
            v.xi_hi(i, j) = up ? X0[uj].hi() : X0[uj].lo();
        }
        for (Eigen::Index k = 0; k < q; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            const bool up = sp(ui, uk).mid() >= 0.0;
            v.pi_lo(i, k) = up ? P[uk].lo() : P[uk].hi();
            v.pi_hi(i, k) = up ? P[uk].hi() : P[uk].lo();
        }
    }
    return v;
}

VertexSelection select_vertices(const SensitivityBounds& bounds, const IntervalVector& X0, const IntervalVector& P) {
    return select_vertices(bounds.sx, bounds.sp, X0, P);
}

namespace {

Eigen::MatrixXd compensation_matrix(const IntervalMatrix& s) {
    Eigen::MatrixXd c(static_cast<Eigen::Index>(s.rows()), static_cast<Eigen::Index>(s.cols()));
    for (std::size_t i = 0; i < s.rows(); ++i) {
        for (std::size_t j = 0; j < s.cols(); ++j) {
            const Interval& e = s(i, j);
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                e.mid() >= 0.0 ? std::min(0.0, e.lo()) : std::max(0.0, e.hi());
        }
    }
    return c;
}

}  // namespace

Compensation compensation_vectors(const IntervalMatrix& sx, const IntervalMatrix& sp) {
    return {compensation_matrix(sx), compensation_matrix(sp)};
}

Compensation compensation_vectors(const SensitivityBounds& bounds) { return compensation_vectors(bounds.sx, bounds.sp); }

namespace {

using Successor = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& p)>;

// c . (lo - hi) summed over a row; every term is >= 0 by construction of the
// vertices and c, so it is accumulated as |c| |hi - lo| rounded upward.
double row_slack(const Eigen::MatrixXd& c, const Eigen::MatrixXd& lo, const Eigen::MatrixXd& hi, Eigen::Index i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
        if (c(i, j) == 0.0) continue;
        const double span = rounding::add_up(std::max(lo(i, j), hi(i, j)), -std::min(lo(i, j), hi(i, j)));
        acc = rounding::add_up(acc, rounding::mul_up(std::abs(c(i, j)), span));
    }
    return acc;
}

OverApprox assemble(const Successor& successor, const IntervalMatrix& sx, const IntervalMatrix& sp,
                    const IntervalVector& X0, const IntervalVector& P) {
    const VertexSelection v = select_vertices(sx, sp, X0, P);
    const Compensation comp = compensation_vectors(sx, sp);
    const auto n = v.xi_lo.rows();

    // Successors keyed on the exact (x, p) vertex.
    std::map<std::vector<double>, Eigen::VectorXd> cache;
    auto eval = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& p) -> const Eigen::VectorXd& {
        std::vector<double> key(x.data(), x.data() + x.size());
        key.insert(key.end(), p.data(), p.data() + p.size());
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(std::move(key), successor(x, p)).first;
        return it->second;
    };

    OverApprox out;
    out.interval = IntervalVector(static_cast<std::size_t>(n));
    out.per_dim_slack = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lo_phi = eval(v.xi_lo.row(i).transpose(), v.pi_lo.row(i).transpose())[i];
        const double hi_phi = eval(v.xi_hi.row(i).transpose(), v.pi_hi.row(i).transpose())[i];
        const double slack =
            rounding::add_up(row_slack(comp.c, v.xi_lo, v.xi_hi, i), row_slack(comp.d, v.pi_lo, v.pi_hi, i));
        const double lo = rounding::add_down(lo_phi, -slack);
        const double hi = rounding::add_up(hi_phi, slack);
        if (!(lo <= hi)) {
            throw AssumptionViolation("dimension " + std::to_string(i + 1) + ": lower successor " +
                                      std::to_string(lo) + " exceeds upper " + std::to_string(hi) +
                                      "; the sensitivity bounds do not hold");
        }
        out.interval[static_cast<std::size_t>(i)] = Interval(lo, hi);
        out.per_dim_slack[i] = slack;
    }
    out.tight = (out.per_dim_slack.array() == 0.0).all();
    out.phi_evals = cache.size();
    return out;
}

Successor flow_successor(const SystemModel& model, const ReachSpec& spec, const IntegratorConfig& cfg) {
    return [&model, &spec, &cfg](const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
        return integrate_phi(model, spec.t0, spec.T, x, p, cfg);
    };
}

void check_problem(const SystemModel& model, const ReachSpec& spec, const SensitivityBounds& bounds) {
    spec.validate(model.n, model.q);
    if (bounds.sx.rows() != model.n || bounds.sx.cols() != model.n || bounds.sp.rows() != model.n ||
        bounds.sp.cols() != model.q) {
        throw std::invalid_argument("sensitivity bounds do not match the model dimensions");
    }
}

}  // namespace

OverApprox overapprox_sign_stable(const SystemModel& model, const ReachSpec& spec, const SensitivityBounds& bounds,
                                  const IntegratorConfig& cfg) {
    check_problem(model, spec, bounds);
    if (!bounds.sign_stable()) {
        throw std::invalid_argument("sensitivity bounds are not sign-stable; use overapprox_bounded");
    }
    return assemble(flow_successor(model, spec, cfg), bounds.sx, bounds.sp, spec.X0, spec.P);
}

OverApprox overapprox_bounded(const SystemModel& model, const ReachSpec& spec, const SensitivityBounds& bounds,
                              const IntegratorConfig& cfg) {
    check_problem(model, spec, bounds);
    return assemble(flow_successor(model, spec, cfg), bounds.sx, bounds.sp, spec.X0, spec.P);
}

OverApprox overapprox_discrete(const DiscreteMap& map, const IntervalMatrix& A, const IntervalMatrix& B, double t,
                               const IntervalVector& X0, const IntervalVector& P) {
    if (A.rows() != A.cols() || A.rows() != X0.size() || B.rows() != A.rows() || B.cols() != P.size()) {
        throw std::invalid_argument("overapprox_discrete: Jacobian bounds do not match X0 / P dimensions");
    }
    const Successor successor = [&map, t](const Eigen::VectorXd& x, const Eigen::VectorXd& p) { return map(t, x, p); };
    return assemble(successor, A, B, X0, P);
}

TightnessReport tightness_check(const SystemModel& model, const ReachSpec& spec, const OverApprox& result,
                                const TightnessOptions& options, const IntegratorConfig& cfg) {
    spec.validate(model.n, model.q);
    if (options.samples == 0) throw std::invalid_argument("tightness_check needs at least one sample");
    if (result.interval.size() != model.n) throw std::invalid_argument("tightness_check: interval dimension mismatch");

    const auto n = static_cast<Eigen::Index>(model.n);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    TightnessReport report;
    report.lower_gap = Eigen::VectorXd::Constant(n, kInf);
    report.upper_gap = Eigen::VectorXd::Constant(n, kInf);
    report.successors.reserve(options.samples);

    std::mt19937_64 rng(options.seed);
    std::size_t inside = 0;
    for (std::size_t s = 0; s < options.samples; ++s) {
        const Eigen::VectorXd x0 = sample_box(spec.X0, rng, options.corner_prob);
        const Eigen::VectorXd p = sample_box(spec.P, rng, options.corner_prob);
        Eigen::VectorXd y = integrate_phi(model, spec.t0, spec.T, x0, p, cfg);
        bool ok = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Interval& box = result.interval[static_cast<std::size_t>(i)];
            const double tol = options.rel_tol * (1.0 + std::abs(y[i]));
            ok = ok && y[i] >= box.lo() - tol && y[i] <= box.hi() + tol;
            report.lower_gap[i] = std::min(report.lower_gap[i], std::max(0.0, y[i] - box.lo()));
            report.upper_gap[i] = std::min(report.upper_gap[i], std::max(0.0, box.hi() - y[i]));
        }
        inside += ok ? 1 : 0;
        report.successors.push_back(std::move(y));
    }
    report.contained_fraction = static_cast<double>(inside) / static_cast<double>(options.samples);
    report.max_face_gap = report.lower_gap.cwiseMax(report.upper_gap);
    return report;
}

}  // namespace sensreach
