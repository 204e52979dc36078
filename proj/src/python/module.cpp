// Python bindings.  Interval vectors cross the boundary as (n, 2) arrays of
// [lo, hi] rows, interval matrices as (lo, hi) pairs of arrays.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>

#include "sensreach/bench.hpp"
#include "sensreach/bounds.hpp"
#include "sensreach/integrator.hpp"
#include "sensreach/reach.hpp"
#include "sensreach/system_model.hpp"
#include "sensreach/taylor.hpp"

namespace py = pybind11;
using namespace sensreach;

namespace {

Eigen::MatrixX2d to_rows(const IntervalVector& v) {
    Eigen::MatrixX2d out(static_cast<Eigen::Index>(v.size()), 2);
    out.col(0) = v.lower();
    out.col(1) = v.upper();
    return out;
}

IntervalVector from_rows(const Eigen::MatrixXd& m) {
    if (m.cols() != 2) throw std::invalid_argument("expected an (n, 2) array of [lo, hi] rows");
    return IntervalVector::from_bounds(m.col(0), m.col(1));
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> to_pair(const IntervalMatrix& m) { return {m.lower(), m.upper()}; }

IntegratorConfig integrator(double rel_tol, double abs_tol) {
    IntegratorConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    cfg.validate();
    return cfg;
}

SamplingStrategy strategy(std::size_t grid_per_dim, std::size_t random_samples, std::uint64_t seed) {
    if (random_samples > 0) return RandomSampling{random_samples, seed};
    return GridSampling{grid_per_dim};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Interval reachability from sensitivity bounds";

    static py::exception<InfeasibleTaylorOrder> infeasible(m, "InfeasibleTaylorOrder", PyExc_RuntimeError);
    py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);
    py::register_exception<AssumptionViolation>(m, "AssumptionViolation", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InfeasibleTaylorOrder& e) {
            py::object err = py::handle(infeasible.ptr())(e.what());
            err.attr("minimal_order") = e.minimal_order();
            err.attr("requested_order") = e.requested_order();
            py::set_error(infeasible, err);
        }
    });

    py::class_<ReachSpec>(m, "ReachSpec")
        .def(py::init([](double t0, double T, const Eigen::MatrixXd& X0, const Eigen::MatrixXd& P) {
                 return ReachSpec{t0, T, from_rows(X0), from_rows(P)};
             }),
             py::arg("t0"), py::arg("T"), py::arg("X0"), py::arg("P"))
        .def_readwrite("t0", &ReachSpec::t0)
        .def_readwrite("T", &ReachSpec::T)
        .def_property(
            "X0", [](const ReachSpec& s) { return to_rows(s.X0); },
            [](ReachSpec& s, const Eigen::MatrixXd& v) { s.X0 = from_rows(v); })
        .def_property(
            "P", [](const ReachSpec& s) { return to_rows(s.P); },
            [](ReachSpec& s, const Eigen::MatrixXd& v) { s.P = from_rows(v); })
        .def("__repr__", [](const ReachSpec& s) {
            return "ReachSpec(t0=" + std::to_string(s.t0) + ", T=" + std::to_string(s.T) +
                   ", n=" + std::to_string(s.X0.size()) + ", q=" + std::to_string(s.P.size()) + ")";
        });

    py::class_<SystemModel>(m, "Model")
        .def_readonly("name", &SystemModel::name)
        .def_readonly("n", &SystemModel::n)
        .def_readonly("q", &SystemModel::q)
        .def_readonly("default_spec", &SystemModel::default_spec)
        .def_property_readonly("has_interval_jacobians",
                               [](const SystemModel& s) { return bool(s.jac_x_range) && bool(s.jac_p_range); })
        .def("f", [](const SystemModel& s, double t, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
            return s.f(t, x, p);
        })
        .def("jac_x", [](const SystemModel& s, double t, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
            return s.jac_x(t, x, p);
        })
        .def("jac_p", [](const SystemModel& s, double t, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
            return s.jac_p(t, x, p);
        })
        .def("__repr__", [](const SystemModel& s) {
            return "Model(" + s.name + ", n=" + std::to_string(s.n) + ", q=" + std::to_string(s.q) + ")";
        });

    m.def("traffic3", [] { return model_traffic3(); });
    m.def("traffic", [](int n_links) { return model_traffic_n(n_links); }, py::arg("n_links"));
    m.def("satellite", [] { return model_satellite(); });
    m.def("linear", &model_linear, py::arg("A"), py::arg("B"), py::arg("name") = "linear");
    m.def("make_model", &make_model, py::arg("name"));
    m.def("registered_models", &registered_models);

    m.def(
        "integrate",
        [](const SystemModel& model, double t0, double T, const Eigen::VectorXd& x0, const Eigen::VectorXd& p,
           double rel_tol, double abs_tol) {
            const AugmentedState s = integrate_augmented(model, t0, T, x0, p, integrator(rel_tol, abs_tol));
            return py::make_tuple(s.x, s.sx, s.sp);
        },
        py::arg("model"), py::arg("t0"), py::arg("T"), py::arg("x0"), py::arg("p"), py::arg("rel_tol") = 1e-8,
        py::arg("abs_tol") = 1e-10, "Returns (x(T), S_x(T), S_p(T)).");

    py::class_<SensitivityBounds>(m, "SensitivityBounds")
        .def_property_readonly("sx", [](const SensitivityBounds& b) { return to_pair(b.sx); })
        .def_property_readonly("sp", [](const SensitivityBounds& b) { return to_pair(b.sp); })
        .def_readonly("guaranteed", &SensitivityBounds::guaranteed)
        .def_readonly("t0", &SensitivityBounds::t0)
        .def_readonly("T", &SensitivityBounds::T)
        .def("sign_stable", &SensitivityBounds::sign_stable)
        .def("sign_stable_count", &SensitivityBounds::sign_stable_count)
        .def("entry_count", &SensitivityBounds::entry_count)
        .def(
            "contains",
            [](const SensitivityBounds& b, const Eigen::MatrixXd& sx, const Eigen::MatrixXd& sp) {
                return b.contains(sx, sp);
            },
            py::arg("sx"), py::arg("sp"));

    m.def(
        "sample_bounds",
        [](const SystemModel& model, const ReachSpec& spec, std::size_t grid_per_dim, std::size_t random_samples,
           std::uint64_t seed) { return sample_bounds(model, spec, strategy(grid_per_dim, random_samples, seed)); },
        py::arg("model"), py::arg("spec"), py::arg("grid_per_dim") = 2, py::arg("random_samples") = 0,
        py::arg("seed") = 0);

    m.def(
        "falsify_bounds",
        [](const SystemModel& model, const ReachSpec& spec, const SensitivityBounds& bounds, std::size_t max_iters,
           std::uint64_t seed) {
            FalsificationOptions opts;
            opts.max_iters = max_iters;
            opts.seed = seed;
            const FalsificationResult r = falsify_bounds(model, spec, bounds, {}, opts);
            py::dict report;
            report["iterations"] = r.report.iterations;
            report["final_min_value"] = r.report.final_min_value;
            report["enlargements"] = r.report.enlargements;
            report["samples_used"] = r.report.samples_used;
            return py::make_tuple(r.bounds, report);
        },
        py::arg("model"), py::arg("spec"), py::arg("bounds"), py::arg("max_iters") = 20, py::arg("seed") = 0,
        "Returns (bounds, report).");

    m.def(
        "jacobian_bounds",
        [](const SystemModel& model, const ReachSpec& spec) {
            const JacobianBounds jb = jacobian_bounds(model, spec);
            return py::make_tuple(to_pair(jb.A), to_pair(jb.B), to_rows(jb.invariant_box));
        },
        py::arg("model"), py::arg("spec"), "Returns ((A_lo, A_hi), (B_lo, B_hi), invariant_box).");
    m.def(
        "minimal_taylor_order",
        [](const SystemModel& model, const ReachSpec& spec) {
            return minimal_taylor_order(jacobian_bounds(model, spec), spec.horizon());
        },
        py::arg("model"), py::arg("spec"));
    m.def(
        "taylor_bounds",
        [](const SystemModel& model, const ReachSpec& spec, std::int64_t order) {
            return taylor_sensitivity_bounds(jacobian_bounds(model, spec), spec.t0, spec.T, order);
        },
        py::arg("model"), py::arg("spec"), py::arg("order"));
    m.def("taylor_remainder", &taylor_remainder, py::arg("alpha"), py::arg("order"));

    py::class_<OverApprox>(m, "OverApprox")
        .def_property_readonly("interval", [](const OverApprox& o) { return to_rows(o.interval); })
        .def_readonly("tight", &OverApprox::tight)
        .def_readonly("per_dim_slack", &OverApprox::per_dim_slack)
        .def_readonly("phi_evals", &OverApprox::phi_evals)
        .def_property_readonly("volume", [](const OverApprox& o) { return o.interval.volume(); });

    m.def(
        "overapprox",
        [](const SystemModel& model, const ReachSpec& spec, const SensitivityBounds& bounds,
           const std::string& method) {
            if (method == "sign_stable") return overapprox_sign_stable(model, spec, bounds);
            if (method == "bounded") return overapprox_bounded(model, spec, bounds);
            throw std::invalid_argument("method must be 'sign_stable' or 'bounded'");
        },
        py::arg("model"), py::arg("spec"), py::arg("bounds"), py::arg("method") = "bounded");

    m.def(
        "tightness_check",
        [](const SystemModel& model, const ReachSpec& spec, const OverApprox& result, std::size_t samples,
           std::uint64_t seed, double corner_prob) {
            TightnessOptions opts;
            opts.samples = samples;
            opts.seed = seed;
            opts.corner_prob = corner_prob;
            const TightnessReport r = tightness_check(model, spec, result, opts);
            Eigen::MatrixXd succ(static_cast<Eigen::Index>(r.successors.size()), static_cast<Eigen::Index>(model.n));
            for (std::size_t k = 0; k < r.successors.size(); ++k) {
                succ.row(static_cast<Eigen::Index>(k)) = r.successors[k].transpose();
            }
            py::dict out;
            out["contained_fraction"] = r.contained_fraction;
            out["lower_gap"] = r.lower_gap;
            out["upper_gap"] = r.upper_gap;
            out["max_face_gap"] = r.max_face_gap;
            out["successors"] = succ;
            return out;
        },
        py::arg("model"), py::arg("spec"), py::arg("result"), py::arg("samples") = 1000, py::arg("seed") = 0,
        py::arg("corner_prob") = 0.25);

    m.def(
        "run_experiment_json",
        [](const std::string& config, bool include_timings) {
            const ExperimentConfig cfg = experiment_config_from_json(nlohmann::json::parse(config));
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(cfg);
            }
            return to_json(r, include_timings).dump();
        },
        py::arg("config"), py::arg("include_timings") = true);

    m.def(
        "suite_configs_json", [](const std::string& name) { return nlohmann::json(suite_configs(name)).dump(); },
        py::arg("name") = "paper");
}
