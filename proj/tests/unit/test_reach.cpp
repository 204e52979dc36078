#include <doctest.h>

#include <cmath>
#include <random>

#include "sensreach/reach.hpp"

using namespace sensreach;

namespace {

SystemModel decay() { return model_linear(-Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd(1, 0), "decay"); }

ReachSpec decay_spec(double lo, double hi) {
    ReachSpec s;
    s.t0 = 0.0;
    s.T = 1.0;
    s.X0 = IntervalVector{Interval(lo, hi)};
    return s;
}

SensitivityBounds scalar_bounds(double lo, double hi, double T = 1.0) {
    SensitivityBounds b;
    b.sx = IntervalMatrix(1, 1);
    b.sx(0, 0) = Interval(lo, hi);
    b.sp = IntervalMatrix(1, 0);
    b.T = T;
    return b;
}

IntervalMatrix from_signs(const Eigen::MatrixXd& signs) {
    IntervalMatrix m(static_cast<std::size_t>(signs.rows()), static_cast<std::size_t>(signs.cols()));
    for (Eigen::Index i = 0; i < signs.rows(); ++i) {
        for (Eigen::Index j = 0; j < signs.cols(); ++j) {
            const double s = signs(i, j);
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                s >= 0 ? Interval(0.1 * s, 2.0 * s) : Interval(2.0 * s, 0.1 * s);
        }
    }
    return m;
}

}  // namespace

TEST_CASE("vertex selection follows the sign of the center") {
    const IntervalVector unit2{Interval(0.0, 1.0), Interval(0.0, 1.0)};
    const IntervalVector P{Interval(5.0, 6.0)};

    Eigen::MatrixXd signs(2, 2);
    signs << 1, -1, 1, 1;
    const VertexSelection v = select_vertices(from_signs(signs), from_signs(Eigen::MatrixXd::Constant(2, 1, -1.0)),
                                              unit2, P);
    CHECK(v.xi_lo.row(0) == Eigen::RowVector2d(0, 1));
    CHECK(v.xi_hi.row(0) == Eigen::RowVector2d(1, 0));
    CHECK(v.xi_lo.row(1) == Eigen::RowVector2d(0, 0));
    CHECK(v.xi_hi.row(1) == Eigen::RowVector2d(1, 1));
    CHECK(v.pi_lo(0, 0) == 6.0);
    CHECK(v.pi_hi(0, 0) == 5.0);

    const VertexSelection all_pos = select_vertices(from_signs(Eigen::MatrixXd::Ones(2, 2)),
                                                    from_signs(Eigen::MatrixXd::Ones(2, 1)), unit2, P);
    for (Eigen::Index i = 0; i < 2; ++i) {
        CHECK(all_pos.xi_lo.row(i) == Eigen::RowVector2d(0, 0));
        CHECK(all_pos.xi_hi.row(i) == Eigen::RowVector2d(1, 1));
    }

    IntervalMatrix neg(1, 1);
    neg(0, 0) = Interval(-3.0, -1.0);
    const VertexSelection flip = select_vertices(neg, IntervalMatrix(1, 0), IntervalVector{Interval(2.0, 4.0)}, {});
    CHECK(flip.xi_lo(0, 0) == 4.0);
    CHECK(flip.xi_hi(0, 0) == 2.0);

    // A straddling entry with center exactly zero counts as non-negative.
    IntervalMatrix tie(1, 1);
    tie(0, 0) = Interval(-1.0, 1.0);
    const VertexSelection t = select_vertices(tie, IntervalMatrix(1, 0), IntervalVector{Interval(2.0, 4.0)}, {});
    CHECK(t.xi_lo(0, 0) == 2.0);

    CHECK_THROWS_AS(select_vertices(neg, IntervalMatrix(1, 0), unit2, {}), std::invalid_argument);
}

TEST_CASE("selected vertices are diagonally opposite corners") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const IntervalVector X0{Interval(-1, 2), Interval(3, 4), Interval(0, 0.5)};
    const IntervalVector P{Interval(1, 2)};
    for (int k = 0; k < 50; ++k) {
        IntervalMatrix sx(3, 3), sp(3, 1);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                const double a = u(rng), b = u(rng);
                sx(i, j) = Interval(std::min(a, b), std::max(a, b));
            }
            sp(i, 0) = Interval(-0.5, u(rng) + 1.0);
        }
        const VertexSelection v = select_vertices(sx, sp, X0, P);
        for (Eigen::Index i = 0; i < 3; ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) {
                const auto& iv = X0[static_cast<std::size_t>(j)];
                const double a = v.xi_lo(i, j), b = v.xi_hi(i, j);
                CHECK(std::min(a, b) == iv.lo());
                CHECK(std::max(a, b) == iv.hi());
            }
        }
    }
}

TEST_CASE("compensation vectors") {
    IntervalMatrix sx(1, 3);
    sx(0, 0) = Interval(0.2, 0.9);
    sx(0, 1) = Interval(-0.3, 0.9);
    sx(0, 2) = Interval(-0.9, 0.3);
    IntervalMatrix sp(1, 2);
    sp(0, 0) = Interval(-0.7, -0.1);
    sp(0, 1) = Interval(-0.2, 0.2);
    const Compensation c = compensation_vectors(sx, sp);
    CHECK(c.c(0, 0) == 0.0);
    CHECK(c.c(0, 1) == -0.3);
    CHECK(c.c(0, 2) == 0.3);
    CHECK(c.d(0, 0) == 0.0);
    CHECK(c.d(0, 1) == -0.2);

    const Compensation zero =
        compensation_vectors(from_signs(Eigen::MatrixXd::Ones(3, 3)), from_signs(-Eigen::MatrixXd::Ones(3, 1)));
    CHECK(zero.c.isZero(0.0));
    CHECK(zero.d.isZero(0.0));
}

TEST_CASE("scalar decay") {
    const OverApprox r = overapprox_sign_stable(decay(), decay_spec(1.0, 2.0), scalar_bounds(std::exp(-1.0), std::exp(-1.0)));
    CHECK(r.interval[0].lo() == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
    CHECK(r.interval[0].hi() == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-8));
    CHECK(r.tight);
    CHECK(r.phi_evals == 2);
    CHECK(r.per_dim_slack[0] == 0.0);
}

TEST_CASE("monotone system needs two successors") {
    Eigen::Matrix3d A;
    A << -1.0, 0.2, 0.0, 0.3, -0.5, 0.1, 0.0, 0.4, -0.8;  // Metzler: cooperative
    Eigen::MatrixXd B(3, 1);
    B << 1.0, 0.0, 0.5;
    const SystemModel m = model_linear(A, B);
    ReachSpec s;
    s.T = 1.5;
    s.X0 = IntervalVector{Interval(0, 1), Interval(1, 2), Interval(-1, 0)};
    s.P = IntervalVector{Interval(0, 2)};
    const SensitivityBounds b = sample_bounds(m, s, GridSampling{2});
    REQUIRE(b.sx.lower().minCoeff() >= 0.0);
    const OverApprox r = overapprox_sign_stable(m, s, b);
    CHECK(r.phi_evals == 2);
    const Eigen::VectorXd lo = integrate_phi(m, s.t0, s.T, s.X0.lower(), s.P.lower());
    const Eigen::VectorXd hi = integrate_phi(m, s.t0, s.T, s.X0.upper(), s.P.upper());
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r.interval[i].lo() == lo[static_cast<Eigen::Index>(i)]);
        CHECK(r.interval[i].hi() == hi[static_cast<Eigen::Index>(i)]);
    }
}

TEST_CASE("sign-stable path rejects straddling bounds") {
    CHECK_THROWS_AS(overapprox_sign_stable(decay(), decay_spec(0.0, 1.0), scalar_bounds(-0.5, 1.5)),
                    std::invalid_argument);
}

TEST_CASE("bounded path on a scalar example") {
    const OverApprox r = overapprox_bounded(decay(), decay_spec(0.0, 1.0), scalar_bounds(-0.5, 1.5));
    // c = -0.5, xi_lo = 0, xi_hi = 1: [Phi(0) - 0.5, Phi(1) + 0.5].
    CHECK(r.interval[0].lo() == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(r.interval[0].hi() == doctest::Approx(std::exp(-1.0) + 0.5).epsilon(1e-8));
    CHECK(r.interval[0].lo() <= -0.5);
    CHECK_FALSE(r.tight);
    CHECK(r.per_dim_slack[0] == 0.5);
}

TEST_CASE("contradictory bounds are detected") {
    // Claims the sensitivity is negative; the successors come out reversed.
    CHECK_THROWS_AS(overapprox_bounded(decay(), decay_spec(0.0, 1.0), scalar_bounds(-0.9, -0.1)), AssumptionViolation);
}

TEST_CASE("bounded path coincides with the sign-stable path") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 3;
        Eigen::MatrixXd A(n, n), B(n, 1);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) A(i, j) = 0.5 * u(rng);
            B(i, 0) = u(rng);
        }
        const SystemModel m = model_linear(A, B);
        ReachSpec s;
        s.T = 1.0;
        s.X0 = IntervalVector(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) s.X0[static_cast<std::size_t>(i)] = Interval(u(rng) - 1.0, u(rng) + 1.0);
        s.P = IntervalVector{Interval(-1.0, 1.0)};
        SensitivityBounds b = sample_bounds(m, s, GridSampling{1});
        REQUIRE(b.sign_stable());
        const OverApprox a = overapprox_sign_stable(m, s, b);
        const OverApprox c = overapprox_bounded(m, s, b);
        CHECK(a.interval == c.interval);
        CHECK(a.phi_evals == c.phi_evals);
        CHECK(c.tight);
    }
}

TEST_CASE("bounded path encloses the linear reachable set") {
    // For x' = Ax + Bp the reachable set is the image of the box under a
    // linear map; its hull comes from the vertices.
    Eigen::Matrix2d A;
    A << -0.3, 0.8, -0.6, -0.2;
    Eigen::MatrixXd B(2, 1);
    B << 0.5, -1.0;
    const SystemModel m = model_linear(A, B);
    ReachSpec s;
    s.T = 2.0;
    s.X0 = IntervalVector{Interval(-1, 1), Interval(0, 2)};
    s.P = IntervalVector{Interval(-1, 1)};
    SensitivityBounds b = sample_bounds(m, s, GridSampling{1});
    // Pad every entry so some straddle zero.
    b.include(b.sx.lower() - Eigen::MatrixXd::Constant(2, 2, 0.3), b.sp.lower() - Eigen::MatrixXd::Constant(2, 1, 0.3));
    const OverApprox r = overapprox_bounded(m, s, b);
    for (int k = 0; k < 8; ++k) {
        Eigen::Vector2d x0((k & 1) ? 1.0 : -1.0, (k & 2) ? 2.0 : 0.0);
        Eigen::VectorXd p = Eigen::VectorXd::Constant(1, (k & 4) ? 1.0 : -1.0);
        CHECK(r.interval.contains(integrate_phi(m, s.t0, s.T, x0, p)));
    }
    for (std::size_t i = 0; i < 2; ++i) CHECK(r.per_dim_slack[static_cast<Eigen::Index>(i)] >= 0.0);
}

TEST_CASE("discrete identity map returns X0") {
    const IntervalVector X0{Interval(-1, 2), Interval(3, 5)};
    const DiscreteMap F = [](double, const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x; };
    const OverApprox r =
        overapprox_discrete(F, IntervalMatrix::identity(2), IntervalMatrix(2, 0), 0.0, X0, IntervalVector{});
    CHECK(r.interval == X0);
    CHECK(r.tight);
}

TEST_CASE("discrete linear map matches vertex enumeration") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 3;
        Eigen::MatrixXd M(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) M(i, j) = u(rng);
        }
        IntervalVector X0(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double a = u(rng);
            X0[static_cast<std::size_t>(i)] = Interval(a, a + 1.0 + u(rng) * 0.25);
        }
        const DiscreteMap F = [M](double, const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::VectorXd {
            return M * x;
        };
        const OverApprox r = overapprox_discrete(F, IntervalMatrix::point(M), IntervalMatrix(static_cast<std::size_t>(n), 0),
                                                 0.0, X0, IntervalVector{});
        Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, INFINITY);
        Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, -INFINITY);
        for (int mask = 0; mask < (1 << n); ++mask) {
            Eigen::VectorXd v(n);
            for (int j = 0; j < n; ++j) {
                const auto& iv = X0[static_cast<std::size_t>(j)];
                v[j] = (mask >> j & 1) ? iv.hi() : iv.lo();
            }
            const Eigen::VectorXd y = M * v;
            lo = lo.cwiseMin(y);
            hi = hi.cwiseMax(y);
        }
        for (int i = 0; i < n; ++i) {
            CHECK(r.interval[static_cast<std::size_t>(i)].lo() == doctest::Approx(lo[i]).epsilon(1e-14));
            CHECK(r.interval[static_cast<std::size_t>(i)].hi() == doctest::Approx(hi[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("flow map as a discrete map reproduces the bounded path") {
    const SystemModel m = model_traffic3();
    const ReachSpec& s = *m.default_spec;
    const SensitivityBounds b = sample_bounds(m, s, GridSampling{2});
    const DiscreteMap F = [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
        return integrate_phi(m, t, s.T, x, p);
    };
    const OverApprox a = overapprox_discrete(F, b.sx, b.sp, s.t0, s.X0, s.P);
    const OverApprox c = overapprox_bounded(m, s, b);
    CHECK(a.interval == c.interval);
    CHECK(a.phi_evals == c.phi_evals);
}

TEST_CASE("traffic3 sign-stable interval is tight") {
    const SystemModel m = model_traffic3();
    const ReachSpec& s = *m.default_spec;
    const SensitivityBounds b = falsify_bounds(m, s, sample_bounds(m, s, GridSampling{2})).bounds;
    const OverApprox r = overapprox_sign_stable(m, s, b);
    CHECK(r.phi_evals <= 6);
    const TightnessReport t = tightness_check(m, s, r);
    CHECK(t.contained_fraction == 1.0);
    CHECK(t.successors.size() == 1000);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        CHECK(t.max_face_gap[k] < 0.05 * r.interval[i].width());
        CHECK(t.max_face_gap[k] == std::max(t.lower_gap[k], t.upper_gap[k]));
    }
}

TEST_CASE("tightness check flags a box that misses successors") {
    const SystemModel m = decay();
    const ReachSpec s = decay_spec(1.0, 2.0);
    OverApprox small;
    small.interval = IntervalVector{Interval(0.5, 0.6)};
    const TightnessReport t = tightness_check(m, s, small, {.samples = 200, .seed = 1});
    CHECK(t.contained_fraction < 1.0);
}
