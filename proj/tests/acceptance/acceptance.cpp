// Acceptance checks: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sensreach/bench.hpp"

using namespace sensreach;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* title, double limit_s, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (secs > limit_s) {
        o.pass = false;
        o.detail += " [over time limit]";
    }
    if (!o.pass) ++failures;
    std::printf("%s %s  %s: %s (%.1fs, limit %.0fs)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), secs,
                limit_s);
    std::fflush(stdout);
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

ExperimentConfig suite_config(const std::string& name) {
    for (const auto& doc : suite_configs("paper")) {
        if (doc["name"] == name) return experiment_config_from_json(doc);
    }
    throw std::invalid_argument("no suite config " + name);
}

// Sampled and falsified experiments, shared by several criteria.
std::map<std::string, ExperimentResult> sampled;

const ExperimentResult& sampled_result(const std::string& model) {
    auto it = sampled.find(model);
    if (it == sampled.end()) {
        ExperimentConfig cfg = suite_config(model + "-sampling");
        cfg.mc_samples = 1000;
        cfg.volume_samples = 0;
        it = sampled.emplace(model, run_experiment(cfg)).first;
    }
    return it->second;
}

// Random interval with endpoints of mixed sign and magnitude.
Interval random_interval(std::mt19937_64& rng, bool positive = false) {
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-20, 20);
    double a = std::ldexp(mant(rng), expo(rng));
    double b = std::ldexp(mant(rng), expo(rng));
    if (positive) {
        a = std::abs(a);
        b = std::abs(b);
    }
    return Interval(std::min(a, b), std::max(a, b));
}

// Endpoints k * 2^e with |k| < 2^20 and |e| <= 10, so that sums of products
// stay exact in binary128.
Interval coarse_interval(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> mant(-(1 << 20) + 1, (1 << 20) - 1);
    std::uniform_int_distribution<int> expo(-10, 10);
    const int e = expo(rng);
    const double a = std::ldexp(mant(rng), e);
    const double b = std::ldexp(mant(rng), e);
    return Interval(std::min(a, b), std::max(a, b));
}

double coarse_point(const Interval& x, std::mt19937_64& rng) {
    // Endpoints share the exponent; stay on that lattice.
    std::uniform_int_distribution<int> pick(0, 2);
    const int k = pick(rng);
    if (k == 0) return x.lo();
    if (k == 1) return x.hi();
    const double mid = 0.5 * (x.lo() + x.hi());
    return std::clamp(mid, x.lo(), x.hi());
}

double random_point(const Interval& x, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 3);
    switch (pick(rng)) {
        case 0: return x.lo();
        case 1: return x.hi();
        default: {
            std::uniform_real_distribution<double> u(x.lo(), x.hi());
            return std::clamp(u(rng), x.lo(), x.hi());
        }
    }
}

// The exact real value of a double expression tested against an interval,
// using binary128 where sums and products of these doubles are exact.
using Quad = __float128;
bool in(const Interval& r, Quad v) { return Quad(r.lo()) <= v && v <= Quad(r.hi()); }

}  // namespace

int main() {
    std::printf("acceptance suite\n");

    criterion("AC1", "guaranteed-path containment, traffic3 interval-arith order 7", 120, [] {
        ExperimentConfig cfg = suite_config("traffic3-interval");
        cfg.mc_samples = 10000;
        cfg.volume_samples = 0;
        const ExperimentResult r = run_experiment(cfg);
        std::size_t outside = 0;
        for (const auto& y : r.tightness.successors) outside += r.overapprox.interval.contains(y) ? 0 : 1;
        return Outcome{r.tightness.successors.size() == 10000 && outside == 0 && r.bounds.guaranteed,
                       std::to_string(outside) + " of " + std::to_string(r.tightness.successors.size()) +
                           " successors outside the interval"};
    });

    criterion("AC2", "sampled-path containment on fresh successors", 600, [] {
        bool ok = true;
        std::string detail;
        for (const std::string model : {"traffic3", "traffic11", "satellite"}) {
            const ExperimentResult& r = sampled_result(model);
            ExperimentConfig cfg = suite_config(model + "-sampling");
            TightnessOptions fresh;
            fresh.samples = 1000;
            fresh.seed = 0xC0FFEE;
            const TightnessReport t = tightness_check(cfg.model, cfg.spec, r.overapprox, fresh, cfg.integrator);
            ok = ok && t.contained_fraction == 1.0;
            detail += model + " " + fmt(t.contained_fraction) + "; ";
        }
        return Outcome{ok, "contained_fraction: " + detail};
    });

    criterion("AC3", "traffic3 volume ratios", 180, [] {
        ExperimentConfig lemma = suite_config("traffic3-sampling");
        ExperimentConfig thm = suite_config("traffic3-interval");
        for (auto* c : {&lemma, &thm}) {
            c->mc_samples = 1000;
            c->volume_samples = 4000;
        }
        const ExperimentResult a = run_experiment(lemma);
        const ExperimentResult b = run_experiment(thm);
        const double ra = a.volume_ratio.value_or(NAN);
        const double rb = b.volume_ratio.value_or(NAN);
        const bool ok = a.applied == OverApproxMethod::sign_stable && b.applied == OverApproxMethod::bounded &&
                        ra >= 1.4 && ra <= 2.1 && rb >= 3.5 && rb <= 7.0;
        return Outcome{ok, "sign-stable " + fmt(ra) + " (required [1.4, 2.1]), bounded " + fmt(rb) + " (required [3.5, 7.0])"};
    });

    criterion("AC4", "traffic11 interval-arith / sampled volume", 900, [] {
        const ExperimentResult& s = sampled_result("traffic11");
        ExperimentConfig cfg = suite_config("traffic11-interval");
        cfg.mc_samples = 1000;
        const ExperimentResult i = run_experiment(cfg);
        const double ratio = i.overapprox.interval.volume() / s.overapprox.interval.volume();
        return Outcome{ratio >= 20.0 && ratio <= 200.0, "ratio " + fmt(ratio) + " (required [20, 200])"};
    });

    criterion("AC5", "sign-stability of sampled bounds", 600, [] {
        const auto& t3 = sampled_result("traffic3").bounds;
        const auto& t11 = sampled_result("traffic11").bounds;
        const auto& sat = sampled_result("satellite").bounds;
        const std::size_t unstable = sat.entry_count() - sat.sign_stable_count();
        const bool ok = t3.sign_stable() && t11.sign_stable() && sat.entry_count() == 20 && unstable >= 7 &&
                        unstable <= 11;
        return Outcome{ok, "(bounds shared with AC2) traffic3 " + std::to_string(t3.sign_stable_count()) + "/" +
                               std::to_string(t3.entry_count()) + ", traffic11 " +
                               std::to_string(t11.sign_stable_count()) + "/" + std::to_string(t11.entry_count()) +
                               ", satellite non-sign-stable " + std::to_string(unstable) + " of " +
                               std::to_string(sat.entry_count())};
    });

    criterion("AC6", "satellite Taylor infeasibility", 10, [] {
        const ExperimentConfig cfg = suite_config("satellite-interval");
        const std::int64_t m = minimal_taylor_order(jacobian_bounds(cfg.model, cfg.spec), cfg.spec.horizon());
        std::int64_t reported = -1;
        try {
            (void)run_experiment(cfg);
        } catch (const InfeasibleTaylorOrder& e) {
            reported = e.minimal_order();
        }
        return Outcome{m > 10000 && reported == m,
                       "minimal order " + std::to_string(m) + ", run_experiment reported " + std::to_string(reported)};
    });

    criterion("AC7", "sensitivities vs central finite differences", 120, [] {
        const IntegratorConfig cfg{1e-13, 1e-13};
        std::mt19937_64 rng(7);
        double worst = 0.0;
        std::size_t compared = 0;
        for (const SystemModel& m : {model_traffic3(), model_traffic_n(11), model_satellite()}) {
            const ReachSpec& spec = *m.default_spec;
            const double rel = m.name == "satellite" ? 1e-6 : 1e-4;
            auto step = [rel](double v) { return v == 0.0 ? rel : rel * std::abs(v); };
            auto flow = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
                return integrate_phi(m, spec.t0, spec.T, x, p, cfg);
            };
            for (int k = 0; k < 20; ++k) {
                const Eigen::VectorXd x0 = sample_box(spec.X0, rng);
                const Eigen::VectorXd p = sample_box(spec.P, rng);
                const AugmentedState s = integrate_augmented(m, spec.t0, spec.T, x0, p, cfg);
                Eigen::MatrixXd Dx(m.n, m.n), Dp(m.n, m.q);
                for (Eigen::Index j = 0; j < x0.size(); ++j) {
                    const double h = step(x0[j]);
                    Eigen::VectorXd a = x0, b = x0;
                    a[j] += h;
                    b[j] -= h;
                    Dx.col(j) = (flow(a, p) - flow(b, p)) / (2 * h);
                }
                for (Eigen::Index j = 0; j < p.size(); ++j) {
                    const double h = step(p[j]);
                    Eigen::VectorXd a = p, b = p;
                    a[j] += h;
                    b[j] -= h;
                    Dp.col(j) = (flow(x0, a) - flow(x0, b)) / (2 * h);
                }
                // Relative error per entry; entries below 1e-3 of the
                // matrix's largest are compared at that floor.
                for (const auto& [S, D] : {std::pair{&s.sx, &Dx}, std::pair{&s.sp, &Dp}}) {
                    const double scale = S->cwiseAbs().maxCoeff();
                    for (Eigen::Index i = 0; i < S->rows(); ++i) {
                        for (Eigen::Index j = 0; j < S->cols(); ++j) {
                            const double denom = std::max(std::abs((*S)(i, j)), 1e-3 * scale);
                            worst = std::max(worst, std::abs((*S)(i, j) - (*D)(i, j)) / denom);
                            ++compared;
                        }
                    }
                }
            }
        }
        return Outcome{worst <= 1e-3, std::to_string(compared) + " entries, worst relative error " + fmt(worst)};
    });

    criterion("AC8", "bounded reduces to sign-stable bit for bit", 30, [] {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_real_distribution<double> grow(1.0, 1.5);
        int identical = 0;
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 1 + trial % 5;
            const int q = trial % 3;
            Eigen::MatrixXd A(n, n), B(n, q);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) A(i, j) = u(rng);
                for (int k = 0; k < q; ++k) B(i, k) = u(rng);
            }
            const SystemModel m = model_linear(A, B);
            ReachSpec s;
            s.T = 1.0 + 0.5 * u(rng);
            s.X0 = IntervalVector(static_cast<std::size_t>(n));
            for (auto i = 0u; i < s.X0.size(); ++i) s.X0[i] = Interval(u(rng) - 1.0, u(rng) + 1.5);
            s.P = IntervalVector(static_cast<std::size_t>(q));
            for (auto k = 0u; k < s.P.size(); ++k) s.P[k] = Interval(u(rng) - 1.0, u(rng) + 1.5);
            // Point sensitivities, widened away from zero so the bounds stay sign-stable.
            SensitivityBounds b = sample_bounds(m, s, GridSampling{1});
            b.include(b.sx.mid() * grow(rng), b.sp.mid() * grow(rng));
            if (!b.sign_stable()) continue;
            const OverApprox a = overapprox_sign_stable(m, s, b);
            const OverApprox c = overapprox_bounded(m, s, b);
            bool same = a.interval.size() == c.interval.size();
            for (std::size_t i = 0; same && i < a.interval.size(); ++i) {
                same = std::memcmp(&a.interval[i], &c.interval[i], sizeof(Interval)) == 0;
            }
            identical += same ? 1 : 0;
        }
        return Outcome{identical == 50, std::to_string(identical) + " of 50 systems identical"};
    });

    criterion("AC9", "discrete form of the flow equals the bounded result", 60, [] {
        const ExperimentResult& r = sampled_result("traffic3");
        const ExperimentConfig cfg = suite_config("traffic3-sampling");
        const DiscreteMap F = [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
            return integrate_phi(cfg.model, t, cfg.spec.T, x, p, cfg.integrator);
        };
        const OverApprox d = overapprox_discrete(F, r.bounds.sx, r.bounds.sp, cfg.spec.t0, cfg.spec.X0, cfg.spec.P);
        const OverApprox b = overapprox_bounded(cfg.model, cfg.spec, r.bounds, cfg.integrator);
        return Outcome{d.interval == b.interval, d.interval == b.interval ? "identical" : "differ"};
    });

    criterion("AC10", "traffic3 face gaps of the sign-stable interval", 60, [] {
        const ExperimentResult& r = sampled_result("traffic3");
        const ExperimentConfig cfg = suite_config("traffic3-sampling");
        TightnessOptions opts;
        opts.samples = 1000;
        opts.seed = 10;
        const TightnessReport t = tightness_check(cfg.model, cfg.spec, r.overapprox, opts, cfg.integrator);
        double worst = 0.0;
        for (std::size_t i = 0; i < r.overapprox.interval.size(); ++i) {
            worst = std::max(worst, t.max_face_gap[static_cast<Eigen::Index>(i)] / r.overapprox.interval[i].width());
        }
        return Outcome{r.overapprox.tight && worst < 0.05, "largest gap / width " + fmt(worst) + " < 0.05"};
    });

    criterion("AC11", "interval kernel enclosure", 10, [] {
        std::mt19937_64 rng(11);
        constexpr int kCases = 10000;
        std::map<std::string, int> bad;
        for (int k = 0; k < kCases; ++k) {
            const Interval x = random_interval(rng), y = random_interval(rng);
            const double a = random_point(x, rng), b = random_point(y, rng);
            if (!in(x + y, Quad(a) + Quad(b))) ++bad["add"];
            if (!in(x - y, Quad(a) - Quad(b))) ++bad["sub"];
            if (!in(x * y, Quad(a) * Quad(b))) ++bad["mul"];
            if (!in(-x, -Quad(a))) ++bad["neg"];
            if (!in(sqr(x), Quad(a) * Quad(a))) ++bad["sqr"];
            if (!in(b * x, Quad(b) * Quad(a))) ++bad["scale"];
            if (!in(min(x, y), Quad(std::min(a, b)))) ++bad["min"];
            if (!in(max(x, y), Quad(std::max(a, b)))) ++bad["max"];
            if (!hull(x, y).contains(a) || !hull(x, y).contains(b)) ++bad["hull"];

            // a / d in r  <=>  r.lo * d <= a <= r.hi * d  for d > 0.
            const Interval d = random_interval(rng, true);
            if (d.lo() > 0.0) {
                const double dv = random_point(d, rng);
                const Interval r = x / d;
                if (!(Quad(r.lo()) * Quad(dv) <= Quad(a) && Quad(a) <= Quad(r.hi()) * Quad(dv))) ++bad["div"];
                // sqrt(v) in r  <=>  r.lo^2 <= v <= r.hi^2.
                const Interval s = sqrt(d);
                if (!(s.lo() >= 0.0 && Quad(s.lo()) * Quad(s.lo()) <= Quad(dv) && Quad(dv) <= Quad(s.hi()) * Quad(s.hi())))
                    ++bad["sqrt"];
            }
        }
        // Matrix products and norms, checked entrywise in binary128.
        for (int k = 0; k < kCases; ++k) {
            const std::size_t n = 1 + static_cast<std::size_t>(k % 4);
            IntervalMatrix M(n, n), N(n, n);
            std::vector<double> pm(n * n), pn(n * n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    M(i, j) = coarse_interval(rng);
                    N(i, j) = coarse_interval(rng);
                    pm[i * n + j] = coarse_point(M(i, j), rng);
                    pn[i * n + j] = coarse_point(N(i, j), rng);
                }
            }
            const IntervalMatrix P = M * N;
            const double norm = norm_inf(M);
            for (std::size_t i = 0; i < n; ++i) {
                Quad row = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    Quad acc = 0;
                    for (std::size_t l = 0; l < n; ++l) acc += Quad(pm[i * n + l]) * Quad(pn[l * n + j]);
                    if (!in(P(i, j), acc)) ++bad["matmul"];
                    row += pm[i * n + j] < 0 ? -Quad(pm[i * n + j]) : Quad(pm[i * n + j]);
                }
                if (Quad(norm) < row) ++bad["norm_inf"];
            }
        }
        int total = 0;
        std::string detail;
        for (const auto& [op, count] : bad) {
            total += count;
            detail += op + "=" + std::to_string(count) + " ";
        }
        return Outcome{total == 0, total == 0 ? "0 violations over 13 operations x 1e4 cases" : "violations: " + detail};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
