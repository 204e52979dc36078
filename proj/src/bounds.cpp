#include "sensreach/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace sensreach {

SensitivityBounds SensitivityBounds::at(const Eigen::MatrixXd& sx, const Eigen::MatrixXd& sp, double t0, double T) {
    SensitivityBounds b;
    b.sx = IntervalMatrix::point(sx);
    b.sp = IntervalMatrix::point(sp);
    b.t0 = t0;
    b.T = T;
    return b;
}

namespace {

void hull_into(IntervalMatrix& m, const Eigen::MatrixXd& v) {
    if (static_cast<Eigen::Index>(m.rows()) != v.rows() || static_cast<Eigen::Index>(m.cols()) != v.cols()) {
        throw std::invalid_argument("sensitivity shape mismatch");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            m(i, j) = hull(m(i, j), Interval(v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        }
    }
}

}  // namespace

void SensitivityBounds::include(const Eigen::MatrixXd& sx_value, const Eigen::MatrixXd& sp_value) {
    hull_into(sx, sx_value);
    hull_into(sp, sp_value);
}

bool SensitivityBounds::contains(const Eigen::MatrixXd& sx_value, const Eigen::MatrixXd& sp_value) const {
    return sx.contains(sx_value) && sp.contains(sp_value);
}

bool SensitivityBounds::contains(const SensitivityBounds& other) const {
    return sx.contains(other.sx) && sp.contains(other.sp);
}

// --- sampling ---------------------------------------------------------------

namespace {

// One free coordinate of X0 x P.
struct Coord {
    bool param = false;
    Eigen::Index index = 0;
    double lo = 0.0;
    double hi = 0.0;
};

std::vector<Coord> free_coords(const ReachSpec& spec) {
    std::vector<Coord> out;
    for (std::size_t i = 0; i < spec.X0.size(); ++i) {
        if (!spec.X0[i].is_degenerate()) out.push_back({false, static_cast<Eigen::Index>(i), spec.X0[i].lo(), spec.X0[i].hi()});
    }
    for (std::size_t k = 0; k < spec.P.size(); ++k) {
        if (!spec.P[k].is_degenerate()) out.push_back({true, static_cast<Eigen::Index>(k), spec.P[k].lo(), spec.P[k].hi()});
    }
    return out;
}

void check_finite(const IntervalVector& box, const char* what) {
    for (const auto& c : box) {
        if (!std::isfinite(c.lo()) || !std::isfinite(c.hi())) {
            throw std::invalid_argument(std::string(what) + " must be bounded");
        }
    }
}

SamplePoint base_point(const ReachSpec& spec) { return {spec.X0.lower(), spec.P.lower()}; }

void set_coord(SamplePoint& pt, const Coord& c, double value) {
    (c.param ? pt.p : pt.x0)[c.index] = value;
}

}  // namespace

std::vector<SamplePoint> sample_points(const ReachSpec& spec, const SamplingStrategy& strategy) {
    check_finite(spec.X0, "X0");
    check_finite(spec.P, "P");
    const std::vector<Coord> coords = free_coords(spec);
    std::vector<SamplePoint> out;

    if (const auto* grid = std::get_if<GridSampling>(&strategy)) {
        const std::size_t k = grid->per_dim;
        if (k == 0) throw std::invalid_argument("grid sampling needs at least one point per dimension");
        auto node = [k](const Coord& c, std::size_t idx) {
            if (k == 1) return std::midpoint(c.lo, c.hi);
            if (idx == k - 1) return c.hi;
            return c.lo + (c.hi - c.lo) * static_cast<double>(idx) / static_cast<double>(k - 1);
        };
        std::vector<std::size_t> counter(coords.size(), 0);
        while (true) {
            SamplePoint pt = base_point(spec);
            for (std::size_t d = 0; d < coords.size(); ++d) set_coord(pt, coords[d], node(coords[d], counter[d]));
            out.push_back(std::move(pt));
            // Odometer increment, last coordinate fastest.
            std::size_t d = coords.size();
            while (d > 0 && ++counter[d - 1] == k) counter[--d] = 0;
            if (d == 0) break;
        }
        return out;
    }

    const auto& random = std::get<RandomSampling>(strategy);
    if (random.count == 0) throw std::invalid_argument("random sampling needs at least one sample");
    std::mt19937_64 rng(random.seed);
    out.reserve(random.count);
    for (std::size_t s = 0; s < random.count; ++s) out.push_back({sample_box(spec.X0, rng), sample_box(spec.P, rng)});
    return out;
}

SensitivityBounds sample_bounds(const SystemModel& model, const ReachSpec& spec, const SamplingStrategy& strategy,
                                const IntegratorConfig& cfg) {
    spec.validate(model.n, model.q);
    const std::vector<SamplePoint> points = sample_points(spec, strategy);
    std::optional<SensitivityBounds> bounds;
    for (const auto& pt : points) {
        const AugmentedState s = integrate_augmented(model, spec.t0, spec.T, pt.x0, pt.p, cfg);
        if (bounds) {
            bounds->include(s.sx, s.sp);
        } else {
            bounds = SensitivityBounds::at(s.sx, s.sp, spec.t0, spec.T);
        }
    }
    return *bounds;
}

Eigen::VectorXd sample_box(const IntervalVector& box, std::mt19937_64& rng, double corner_prob) {
    if (!(corner_prob >= 0.0 && corner_prob <= 0.5)) throw std::invalid_argument("corner_prob must lie in [0, 0.5]");
    check_finite(box, "sampled box");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd x(static_cast<Eigen::Index>(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Interval& c = box[i];
        double v;
        if (corner_prob > 0.0) {
            const double r = unit(rng);
            if (r < corner_prob) {
                v = c.lo();
            } else if (r < 2.0 * corner_prob) {
                v = c.hi();
            } else {
                v = c.lo() + unit(rng) * c.width();
            }
        } else {
            v = c.lo() + unit(rng) * c.width();
        }
        x[static_cast<Eigen::Index>(i)] = std::clamp(v, c.lo(), c.hi());
    }
    return x;
}

// --- falsification ----------------------------------------------------------

double falsification_objective(const IntervalMatrix& bounds, const Eigen::MatrixXd& s) {
    if (static_cast<Eigen::Index>(bounds.rows()) != s.rows() || static_cast<Eigen::Index>(bounds.cols()) != s.cols()) {
        throw std::invalid_argument("falsification_objective: shape mismatch");
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bounds.rows(); ++i) {
        for (std::size_t j = 0; j < bounds.cols(); ++j) {
            const Interval& b = bounds(i, j);
            const double v = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            best = std::min(best, 0.5 * b.width() - std::abs(v - b.mid()));
        }
    }
    return best;
}

namespace {

struct Evaluation {
    double value = std::numeric_limits<double>::infinity();
    AugmentedState state;
};

struct PassContext {
    const SystemModel* model;
    const ReachSpec* spec;
    const IntegratorConfig* cfg;
    const std::vector<Coord>* coords;
    const IntervalMatrix* target;
    bool param_pass;
    std::size_t evals = 0;
    std::size_t max_evals = 0;
    Evaluation best;
    std::exception_ptr error;

    double eval(const double* u) {
        SamplePoint pt = base_point(*spec);
        for (std::size_t d = 0; d < coords->size(); ++d) {
            const Coord& c = (*coords)[d];
            const double t = std::clamp(u[d], 0.0, 1.0);
            set_coord(pt, c, std::clamp(c.lo + t * (c.hi - c.lo), c.lo, c.hi));
        }
        AugmentedState s = integrate_augmented(*model, spec->t0, spec->T, pt.x0, pt.p, *cfg);
        ++evals;
        const double v = falsification_objective(*target, param_pass ? s.sp : s.sx);
        if (!std::isfinite(v)) throw std::runtime_error("falsification objective is not finite");
        if (v < best.value) best = {v, std::move(s)};
        return v;
    }
};

double gsl_objective(const gsl_vector* u, void* params) {
    auto* ctx = static_cast<PassContext*>(params);
    if (ctx->error) return GSL_NAN;
    try {
        return ctx->eval(u->data);
    } catch (...) {
        ctx->error = std::current_exception();
        return GSL_NAN;
    }
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

// One local Nelder-Mead search from u0 over the unit cube.
void nelder_mead(PassContext& ctx, const std::vector<double>& u0) {
    const std::size_t dim = u0.size();
    const std::size_t budget = ctx.evals + ctx.max_evals;
    if (dim == 0) {
        ctx.eval(nullptr);
        return;
    }
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(dim));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(dim));
    for (std::size_t d = 0; d < dim; ++d) gsl_vector_set(x.get(), d, u0[d]);
    gsl_vector_set_all(step.get(), 0.1);

    gsl_multimin_function fn{&gsl_objective, dim, &ctx};
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> mini(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
    gsl_multimin_fminimizer_set(mini.get(), &fn, x.get(), step.get());
    while (!ctx.error && ctx.evals < budget) {
        if (gsl_multimin_fminimizer_iterate(mini.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(mini.get()), 1e-6) == GSL_SUCCESS) break;
    }
    if (ctx.error) std::rethrow_exception(ctx.error);
}

// The GSL default handler aborts the process; errors are reported through
// return codes instead.
struct GslHandlerGuard {
    gsl_error_handler_t* previous = gsl_set_error_handler_off();
    ~GslHandlerGuard() { gsl_set_error_handler(previous); }
};

}  // namespace

FalsificationResult falsify_bounds(const SystemModel& model, const ReachSpec& spec, const SensitivityBounds& bounds,
                                   const IntegratorConfig& cfg, const FalsificationOptions& options) {
    spec.validate(model.n, model.q);
    if (bounds.sx.rows() != model.n || bounds.sx.cols() != model.n || bounds.sp.rows() != model.n ||
        bounds.sp.cols() != model.q) {
        throw std::invalid_argument("falsify_bounds: bounds do not match the model dimensions");
    }
    if (bounds.t0 != spec.t0 || bounds.T != spec.T) throw std::invalid_argument("falsify_bounds: horizon mismatch");
    check_finite(spec.X0, "X0");
    check_finite(spec.P, "P");
    if (options.starts == 0 || options.max_evals == 0) {
        throw std::invalid_argument("falsify_bounds: starts and max_evals must be positive");
    }

    const GslHandlerGuard guard;
    const std::vector<Coord> coords = free_coords(spec);
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    FalsificationResult out{bounds, {}};
    auto& report = out.report;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // Pass 0 falsifies sx, pass 1 sp.  An empty matrix has nothing to falsify.
    bool done[2] = {false, model.q == 0};
    double last_min[2] = {kInf, kInf};

    for (std::size_t it = 0; it < options.max_iters && !(done[0] && done[1]); ++it) {
        report.iterations = it + 1;
        for (int pass = 0; pass < 2; ++pass) {
            if (done[pass]) continue;
            PassContext ctx{.model = &model,
                            .spec = &spec,
                            .cfg = &cfg,
                            .coords = &coords,
                            .target = pass == 0 ? &out.bounds.sx : &out.bounds.sp,
                            .param_pass = pass == 1,
                            .evals = 0,
                            .max_evals = options.max_evals,
                            .best = {},
                            .error = nullptr};
            // With every coordinate fixed there is a single point to try.
            const std::size_t starts = coords.empty() ? 1 : options.starts;
            for (std::size_t s = 0; s < starts; ++s) {
                std::vector<double> u0(coords.size());
                for (double& v : u0) v = unit(rng);
                nelder_mead(ctx, u0);
            }
            report.samples_used += ctx.evals;
            last_min[pass] = ctx.best.value;
            if (ctx.best.value < 0.0) {
                out.bounds.include(ctx.best.state.sx, ctx.best.state.sp);
                ++report.enlargements;
            } else {
                done[pass] = true;
            }
        }
    }
    report.final_min_value = std::min(last_min[0], last_min[1]);
    return out;
}

}  // namespace sensreach
