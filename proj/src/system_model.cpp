#include "sensreach/system_model.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace sensreach {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// constant + coeff * x[var]; var < 0 means a constant term.
struct AffineTerm {
    double constant = 0.0;
    int var = -1;
    double coeff = 0.0;

    [[nodiscard]] double eval(const Eigen::VectorXd& x) const { return var < 0 ? constant : constant + coeff * x[var]; }
    [[nodiscard]] Interval range(const IntervalVector& box) const {
        if (var < 0) return Interval(constant);
        return Interval(constant) + coeff * box[static_cast<std::size_t>(var)];
    }
};

// Pointwise minimum of affine branches.  The derivative takes the first
// branch attaining the minimum, so kinks resolve to the lowest index.
// Branches within a relative 1e-9 of the minimum count as attaining it:
// trajectories that run along a tie (two links jammed alike) would otherwise
// flip branches on rounding noise at every step.
struct MinOfAffine {
    std::vector<AffineTerm> branches;

    static constexpr double kTieBand = 1e-9;

    [[nodiscard]] std::size_t active(const Eigen::VectorXd& x) const {
        double lowest = kInf;
        for (const auto& b : branches) lowest = std::min(lowest, b.eval(x));
        const double band = kTieBand * (1.0 + std::abs(lowest));
        for (std::size_t l = 0; l < branches.size(); ++l) {
            if (branches[l].eval(x) <= lowest + band) return l;
        }
        return 0;
    }

    [[nodiscard]] double eval(const Eigen::VectorXd& x) const {
        double lowest = kInf;
        for (const auto& b : branches) lowest = std::min(lowest, b.eval(x));
        return lowest;
    }

    // d/dx_j of the active branch.
    [[nodiscard]] double partial(const Eigen::VectorXd& x, int j) const {
        const auto& b = branches[active(x)];
        return b.var == j ? b.coeff : 0.0;
    }

    // Hull of d/dx_j over every branch that can attain the minimum in the box.
    [[nodiscard]] Interval partial_range(const IntervalVector& box, int j) const {
        double cap = kInf;
        std::vector<Interval> values;
        values.reserve(branches.size());
        for (const auto& b : branches) {
            values.push_back(b.range(box));
            cap = std::min(cap, values.back().hi());
        }
        cap = rounding::add_up(cap, kTieBand * (1.0 + std::abs(cap)) * 1.01);
        std::optional<Interval> out;
        for (std::size_t l = 0; l < branches.size(); ++l) {
            if (values[l].lo() > cap) continue;
            const Interval d(branches[l].var == j ? branches[l].coeff : 0.0);
            out = out ? hull(*out, d) : d;
        }
        return *out;
    }
};

// Link 1 feeds links 2 and 3 evenly through the diverge flow g; link i >= 4
// receives the fraction beta of link (i - 2)'s outflow.  Indices are 0-based.
struct TrafficNetwork {
    TrafficParams prm;
    int n = 0;
    MinOfAffine diverge;              // g(x)
    std::vector<MinOfAffine> outflow;  // outflow[i] for i >= 1

    TrafficNetwork(int n_links, const TrafficParams& params) : prm(params), n(n_links) {
        const double c = prm.capacity;
        const double v = prm.free_flow_speed;
        const double xb = prm.jam_density;
        const double w = prm.congestion_speed;
        const double beta = prm.turning_ratio;
        diverge.branches = {{c, -1, 0.0}, {0.0, 0, v}, {2 * w * xb, 1, -2 * w}, {2 * w * xb, 2, -2 * w}};
        outflow.resize(static_cast<std::size_t>(n));
        for (int i = 1; i < n; ++i) {
            auto& out = outflow[static_cast<std::size_t>(i)].branches;
            out = {{c, -1, 0.0}, {0.0, i, v}};
            // Links without a downstream successor (the last of each chain)
            // drop the supply term.
            if (i + 2 < n) out.push_back({w / beta * xb, i + 2, -w / beta});
        }
    }

    [[nodiscard]] double inflow_factor(int i) const { return i <= 2 ? 0.5 : prm.turning_ratio; }
    [[nodiscard]] const MinOfAffine& inflow(int i) const {
        return i <= 2 ? diverge : outflow[static_cast<std::size_t>(i - 2)];
    }

    [[nodiscard]] Eigen::VectorXd f(const Eigen::VectorXd& x, const Eigen::VectorXd& p) const {
        Eigen::VectorXd dx(n);
        dx[0] = p[0] - diverge.eval(x);
        for (int i = 1; i < n; ++i) {
            dx[i] = inflow_factor(i) * inflow(i).eval(x) - outflow[static_cast<std::size_t>(i)].eval(x);
        }
        return dx / prm.time_step;
    }

    [[nodiscard]] Eigen::MatrixXd jac_x(const Eigen::VectorXd& x) const {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int j = 0; j < n; ++j) J(0, j) = -diverge.partial(x, j);
        for (int i = 1; i < n; ++i) {
            const auto& in = inflow(i);
            const auto& out = outflow[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) J(i, j) = inflow_factor(i) * in.partial(x, j) - out.partial(x, j);
        }
        return J / prm.time_step;
    }

    [[nodiscard]] Eigen::MatrixXd jac_p() const {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, 1);
        B(0, 0) = 1.0 / prm.time_step;
        return B;
    }

    [[nodiscard]] IntervalMatrix jac_x_range(const IntervalVector& box) const {
        IntervalMatrix A(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        const Interval scale = Interval(1.0) / Interval(prm.time_step);
        for (int j = 0; j < n; ++j) A(0, static_cast<std::size_t>(j)) = -(scale * diverge.partial_range(box, j));
        for (int i = 1; i < n; ++i) {
            const auto& in = inflow(i);
            const auto& out = outflow[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) {
                const Interval d = inflow_factor(i) * in.partial_range(box, j) - out.partial_range(box, j);
                A(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = scale * d;
            }
        }
        return A;
    }

    [[nodiscard]] IntervalMatrix jac_p_range() const {
        IntervalMatrix B(static_cast<std::size_t>(n), 1);
        B(0, 0) = Interval(1.0) / Interval(prm.time_step);
        return B;
    }

    // Links 2..n stay within [0, jam density].  Link 1 never drains when the
    // inflow is at least the capacity, since g <= c; otherwise it stays >= 0.
    [[nodiscard]] IntervalVector invariant_box(const IntervalVector& X0, const IntervalVector& P) const {
        IntervalVector box(static_cast<std::size_t>(n));
        const double x1_lo = P[0].lo() >= prm.capacity ? X0[0].lo() : std::min(0.0, X0[0].lo());
        box[0] = Interval(x1_lo, kInf);
        for (std::size_t i = 1; i < box.size(); ++i) box[i] = hull(Interval(0.0, prm.jam_density), X0[i]);
        return box;
    }
};

SystemModel make_traffic(int n_links, const TrafficParams& params) {
    auto net = std::make_shared<const TrafficNetwork>(n_links, params);
    SystemModel m;
    m.name = "traffic" + std::to_string(n_links);
    m.n = static_cast<std::size_t>(n_links);
    m.q = 1;
    m.f = [net](double, const Eigen::VectorXd& x, const Eigen::VectorXd& p) { return net->f(x, p); };
    m.jac_x = [net](double, const Eigen::VectorXd& x, const Eigen::VectorXd&) { return net->jac_x(x); };
    m.jac_p = [net](double, const Eigen::VectorXd&, const Eigen::VectorXd&) { return net->jac_p(); };
    m.jac_x_range = [net](const IntervalVector& x, const IntervalVector&) { return net->jac_x_range(x); };
    m.jac_p_range = [net](const IntervalVector&, const IntervalVector&) { return net->jac_p_range(); };
    m.invariant_box = [net](const IntervalVector& X0, const IntervalVector& P) { return net->invariant_box(X0, P); };

    ReachSpec spec;
    spec.t0 = 0.0;
    spec.T = 30.0;
    spec.P = IntervalVector{Interval(40.0, 60.0)};
    if (n_links == 3) {
        spec.X0 = IntervalVector{Interval(150.0, 200.0), Interval(250.0, 320.0), Interval(50.0, 100.0)};
    } else {
        spec.X0 = IntervalVector(std::vector<Interval>(static_cast<std::size_t>(n_links), Interval(20.0, 300.0)));
    }
    m.default_spec = std::move(spec);
    return m;
}

// Bounds on r, r' and theta' from conservation of angular momentum h = r^2 theta'
// and of the orbit's conic shape.  theta is left unbounded.
IntervalVector satellite_invariant_box(const IntervalVector& X0, const IntervalVector& P) {
    const Interval& R = X0[0];
    const Interval& VR = X0[1];
    const Interval& W = X0[3];
    const Interval& MU = P[0];
    if (R.lo() <= 0.0 || W.lo() <= 0.0 || MU.lo() <= 0.0) {
        throw std::domain_error("satellite invariant box needs r > 0, theta' > 0 and p > 0");
    }
    const Interval H = sqr(R) * W;
    Interval r_range;
    double ecc_hi = 0.0;
    if (VR.lo() == 0.0 && VR.hi() == 0.0) {
        // r(0) is an apsis; the opposite apsis is r k / (2 - k) with k = r^3 w^2 / p.
        const Interval K = sqr(R) * R * sqr(W) / MU;
        if (K.hi() >= 2.0) throw std::domain_error("satellite initial set contains escape trajectories");
        const Interval other = R * (K / (Interval(2.0) - K));
        r_range = hull(R, other);
        ecc_hi = std::max(std::abs(K.lo() - 1.0), std::abs(K.hi() - 1.0));
        ecc_hi = rounding::next_up(ecc_hi);
    } else {
        const Interval energy = Interval(0.5) * (sqr(VR) + sqr(R * W)) - MU / R;
        const Interval e2 = Interval(1.0) + Interval(2.0) * energy * sqr(H) / sqr(MU);
        ecc_hi = sqrt(Interval(0.0, std::max(0.0, e2.hi()))).hi();
        if (ecc_hi >= 1.0) throw std::domain_error("satellite initial set contains escape trajectories");
        const Interval semi_latus = sqr(H) / MU;
        r_range = hull(R, Interval(rounding::div_down(semi_latus.lo(), rounding::add_up(1.0, ecc_hi)),
                                   rounding::div_up(semi_latus.hi(), rounding::add_down(1.0, -ecc_hi))));
    }
    // |r'| = (p / h) e |sin(nu)|
    const double vr_max = rounding::div_up(rounding::mul_up(MU.hi(), ecc_hi), H.lo());
    IntervalVector box(4);
    box[0] = r_range;
    box[1] = hull(Interval(-vr_max, vr_max), VR);
    box[2] = Interval(-kInf, kInf);
    box[3] = hull(H / sqr(r_range), W);
    return box;
}

}  // namespace

void ReachSpec::validate(std::size_t n, std::size_t q) const {
    if (!(T >= t0)) throw std::invalid_argument("ReachSpec: T must be >= t0");
    if (X0.size() != n) {
        throw std::invalid_argument("ReachSpec: X0 has " + std::to_string(X0.size()) + " components, model expects " +
                                    std::to_string(n));
    }
    if (P.size() != q) {
        throw std::invalid_argument("ReachSpec: P has " + std::to_string(P.size()) + " components, model expects " +
                                    std::to_string(q));
    }
}

SystemModel model_traffic3(const TrafficParams& params) { return make_traffic(3, params); }

SystemModel model_traffic_n(int n_links, const TrafficParams& params) {
    if (n_links < 5 || n_links % 2 == 0) {
        throw std::invalid_argument("traffic network needs an odd number of links >= 5, got " + std::to_string(n_links));
    }
    return make_traffic(n_links, params);
}

SystemModel model_satellite(const SatelliteParams& params) {
    SystemModel m;
    m.name = "satellite";
    m.n = 4;
    m.q = 1;
    m.f = [](double, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
        Eigen::VectorXd dx(4);
        dx << x[1], -p[0] / (x[0] * x[0]) + x[0] * x[3] * x[3], x[3], -2.0 * x[1] * x[3] / x[0];
        return dx;
    };
    m.jac_x = [](double, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
        const double r = x[0];
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4, 4);
        J(0, 1) = 1.0;
        J(1, 0) = 2.0 * p[0] / (r * r * r) + x[3] * x[3];
        J(1, 3) = 2.0 * r * x[3];
        J(2, 3) = 1.0;
        J(3, 0) = 2.0 * x[1] * x[3] / (r * r);
        J(3, 1) = -2.0 * x[3] / r;
        J(3, 3) = -2.0 * x[1] / r;
        return J;
    };
    m.jac_p = [](double, const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 1);
        B(1, 0) = -1.0 / (x[0] * x[0]);
        return B;
    };
    m.jac_x_range = [](const IntervalVector& x, const IntervalVector& p) {
        const Interval& r = x[0];
        if (r.contains(0.0)) throw std::domain_error("satellite Jacobian undefined for boxes with r = 0");
        IntervalMatrix A(4, 4);
        A(0, 1) = Interval(1.0);
        A(1, 0) = Interval(2.0) * p[0] / (sqr(r) * r) + sqr(x[3]);
        A(1, 3) = Interval(2.0) * r * x[3];
        A(2, 3) = Interval(1.0);
        A(3, 0) = Interval(2.0) * x[1] * x[3] / sqr(r);
        A(3, 1) = Interval(-2.0) * x[3] / r;
        A(3, 3) = Interval(-2.0) * x[1] / r;
        return A;
    };
    m.jac_p_range = [](const IntervalVector& x, const IntervalVector&) {
        if (x[0].contains(0.0)) throw std::domain_error("satellite Jacobian undefined for boxes with r = 0");
        IntervalMatrix B(4, 1);
        B(1, 0) = -(Interval(1.0) / sqr(x[0]));
        return B;
    };
    m.invariant_box = satellite_invariant_box;

    // Circular orbit with uncertain radius and p; the initial angular rate
    // sqrt(p / r^3) is replaced by its interval hull.
    ReachSpec spec;
    spec.t0 = 0.0;
    spec.T = params.horizon;
    spec.P = IntervalVector{Interval(params.mu_lo, params.mu_hi)};
    const double w_lo = std::sqrt(params.mu_lo / (params.radius_hi * params.radius_hi * params.radius_hi));
    const double w_hi = std::sqrt(params.mu_hi / (params.radius_lo * params.radius_lo * params.radius_lo));
    spec.X0 = IntervalVector{Interval(params.radius_lo, params.radius_hi), Interval(0.0), Interval(0.0),
                             Interval(rounding::next_down(w_lo), rounding::next_up(w_hi))};
    m.default_spec = std::move(spec);
    return m;
}

SystemModel model_linear(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::string name) {
    if (A.rows() != A.cols() || B.rows() != A.rows()) throw std::invalid_argument("model_linear: shape mismatch");
    SystemModel m;
    m.name = std::move(name);
    m.n = static_cast<std::size_t>(A.rows());
    m.q = static_cast<std::size_t>(B.cols());
    m.f = [A, B](double, const Eigen::VectorXd& x, const Eigen::VectorXd& p) -> Eigen::VectorXd {
        if (B.cols() == 0) return A * x;
        return A * x + B * p;
    };
    m.jac_x = [A](double, const Eigen::VectorXd&, const Eigen::VectorXd&) { return A; };
    m.jac_p = [B](double, const Eigen::VectorXd&, const Eigen::VectorXd&) { return B; };
    m.jac_x_range = [A](const IntervalVector&, const IntervalVector&) { return IntervalMatrix::point(A); };
    m.jac_p_range = [B](const IntervalVector&, const IntervalVector&) { return IntervalMatrix::point(B); };
    m.invariant_box = [n = m.n](const IntervalVector&, const IntervalVector&) {
        return IntervalVector(std::vector<Interval>(n, Interval(-kInf, kInf)));
    };
    return m;
}

// --- registry ---------------------------------------------------------------

namespace {

std::mutex& registry_mutex() {
    static std::mutex mu;
    return mu;
}

std::map<std::string, ModelFactory>& registry() {
    static std::map<std::string, ModelFactory> models;
    return models;
}

}  // namespace

void register_model(const std::string& name, ModelFactory factory) {
    std::lock_guard lock(registry_mutex());
    registry()[name] = std::move(factory);
}

SystemModel make_model(const std::string& name) {
    {
        std::lock_guard lock(registry_mutex());
        if (auto it = registry().find(name); it != registry().end()) return it->second();
    }
    if (name == "traffic3") return model_traffic3();
    if (name == "satellite") return model_satellite();
    static const std::regex traffic_re(R"(traffic(\d+))");
    if (std::smatch match; std::regex_match(name, match, traffic_re)) return model_traffic_n(std::stoi(match[1].str()));
    throw std::invalid_argument("unknown model '" + name + "'");
}

std::vector<std::string> registered_models() {
    std::vector<std::string> names{"satellite", "traffic3", "traffic<N>"};
    std::lock_guard lock(registry_mutex());
    for (const auto& [name, factory] : registry()) names.push_back(name);
    return names;
}

// --- configuration ------------------------------------------------------------

namespace {

IntervalVector parse_box(const nlohmann::json& doc, const char* key) {
    const auto& arr = doc.at(key);
    if (!arr.is_array()) throw std::invalid_argument(std::string(key) + " must be a list of [lo, hi] pairs");
    std::vector<Interval> comps;
    for (const auto& pair : arr) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw std::invalid_argument(std::string(key) + " entries must be [lo, hi] number pairs");
        }
        comps.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    return IntervalVector(std::move(comps));
}

}  // namespace

ConfiguredModel model_from_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("config must be an object");
    if (!doc.contains("model") || !doc["model"].is_string()) throw std::invalid_argument("config needs a 'model' name");
    ConfiguredModel out{make_model(doc["model"].get<std::string>()), {}};
    const auto& model = out.model;
    ReachSpec spec = model.default_spec.value_or(ReachSpec{});
    const bool has_default = model.default_spec.has_value();
    try {
        if (doc.contains("t0")) spec.t0 = doc["t0"].get<double>();
        if (doc.contains("T")) {
            spec.T = doc["T"].get<double>();
        } else if (!has_default) {
            throw std::invalid_argument("config needs a horizon 'T'");
        }
        if (doc.contains("X0")) {
            spec.X0 = parse_box(doc, "X0");
        } else if (!has_default) {
            throw std::invalid_argument("config needs 'X0'");
        }
        if (doc.contains("P")) {
            spec.P = parse_box(doc, "P");
        } else if (!has_default) {
            throw std::invalid_argument("config needs 'P'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed config: ") + e.what());
    }
    spec.validate(model.n, model.q);
    out.spec = std::move(spec);
    return out;
}

Eigen::MatrixXd finite_difference_jac_x(const SystemModel& model, double t, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& p, double rel_step) {
    Eigen::MatrixXd J(model.n, model.n);
    for (std::size_t j = 0; j < model.n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double h = rel_step * (1.0 + std::abs(x[jj]));
        Eigen::VectorXd xp = x, xm = x;
        xp[jj] += h;
        xm[jj] -= h;
        J.col(jj) = (model.f(t, xp, p) - model.f(t, xm, p)) / (xp[jj] - xm[jj]);
    }
    return J;
}

Eigen::MatrixXd finite_difference_jac_p(const SystemModel& model, double t, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& p, double rel_step) {
    Eigen::MatrixXd J(model.n, model.q);
    for (std::size_t k = 0; k < model.q; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double h = rel_step * (1.0 + std::abs(p[kk]));
        Eigen::VectorXd pp = p, pm = p;
        pp[kk] += h;
        pm[kk] -= h;
        J.col(kk) = (model.f(t, x, pp) - model.f(t, x, pm)) / (pp[kk] - pm[kk]);
    }
    return J;
}

}  // namespace sensreach
