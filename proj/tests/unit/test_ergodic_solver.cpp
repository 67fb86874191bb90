#include <doctest.h>

#include <cmath>

#include "ergmfg/ergodic_solver.hpp"
#include "test_helpers.hpp"

using namespace ergmfg;

namespace {

GridField cos_potential(const TorusGrid& g) {
    return GridField::sample(g, [](double x, double) { return std::cos(2 * M_PI * x); });
}

ErgodicConfig fast_config() {
    ErgodicConfig cfg;
    cfg.dt_erg = 0.1;
    cfg.tol_lambda = 1e-4;
    cfg.cesaro_window = 50;
    cfg.t_avg = 30.0;
    cfg.tol_outer = 1e-4;
    cfg.max_outer = 60;
    return cfg;
}

} // namespace

TEST_SUITE("ergodic_solver") {

TEST_CASE("flat problem: lambda = 0, u_bar = 0") {
    TorusGrid g(1, 32);
    HamiltonianSpec spec = HamiltonianSpec::quadratic(GridField(g, 0.0));
    WeakKamResult wk = weak_kam_iterate(GridField(g, 0.0), spec, fast_config());
    CHECK(std::abs(wk.lambda) < 1e-10);
    CHECK(field_sup_norm(wk.u_bar) < 1e-10);
}

TEST_CASE("cosine potential: lambda matches the quadratic formula") {
    TorusGrid g(1, 128);
    HamiltonianSpec spec = HamiltonianSpec::quadratic(cos_potential(g));
    WeakKamResult wk = weak_kam_iterate(GridField(g, 0.0), spec, fast_config());
    // lambda = -min V = 1 under the reporting convention.
    CHECK(std::abs(wk.lambda - 1.0) < std::max(1e-2, 2.0 * g.h()));
    CHECK(std::abs(field_mean(wk.u_bar)) < 1e-12);
}

TEST_CASE("arbitrary smooth field with V = 0: lambda = -min f") {
    TorusGrid g(1, 96);
    std::mt19937_64 rng(3);
    HamiltonianSpec spec = HamiltonianSpec::quadratic(GridField(g, 0.0));
    GridField f = test::random_smooth_field(g, rng, 0.8);
    WeakKamResult wk = weak_kam_iterate(f, spec, fast_config());
    const QuadraticOracle oracle = lambda_quadratic_oracle(GridField(g, 0.0), f);
    CHECK(std::abs(wk.lambda - oracle.lambda) < std::max(1e-2, 2.0 * g.h()));
}

TEST_CASE("lambda shifts by exactly a constant source shift") {
    TorusGrid g(1, 64);
    HamiltonianSpec spec = HamiltonianSpec::quadratic(cos_potential(g));
    ErgodicConfig cfg = fast_config();
    WeakKamResult base = weak_kam_iterate(GridField(g, 0.0), spec, cfg);
    WeakKamResult moved = weak_kam_iterate(GridField(g, 0.7), spec, cfg);
    CHECK(std::abs(moved.lambda - (base.lambda - 0.7)) < 2.0 * cfg.tol_lambda);
}

TEST_CASE("quadratic oracle: closed form and argmin cells") {
    TorusGrid g(1, 64);
    QuadraticOracle o = lambda_quadratic_oracle(cos_potential(g), GridField(g, 0.0));
    CHECK(o.lambda == doctest::Approx(1.0));
    REQUIRE(o.argmin_cells.size() == 1);
    CHECK(o.argmin_cells[0] == g.index(32)); // x = 0.5

    QuadraticOracle all = lambda_quadratic_oracle(GridField(g, 0.0), GridField(g, 0.0));
    CHECK(all.lambda == doctest::Approx(0.0));
    CHECK(all.argmin_cells.size() == g.size());

    std::mt19937_64 rng(5);
    GridField V = test::random_field(g, rng);
    GridField f = test::random_field(g, rng);
    QuadraticOracle r = lambda_quadratic_oracle(V, f);
    double lo = 1e300;
    for (std::size_t k = 0; k < g.size(); ++k)
        lo = std::min(lo, V[k] + f[k]);
    CHECK(r.lambda == doctest::Approx(-lo));
}

TEST_CASE("ergodic measure: zero drift keeps the uniform measure") {
    TorusGrid g(1, 32);
    HamiltonianSpec spec = HamiltonianSpec::quadratic(GridField(g, 0.0));
    ErgodicMeasureResult em = ergodic_measure(GridField(g, 0.0), spec, fast_config());
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(em.m_bar[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(em.stationarity_residual < 1e-12);
}

TEST_CASE("quadratic case: the flow measure concentrates near the potential argmin") {
    TorusGrid g(1, 128);
    HamiltonianSpec spec = HamiltonianSpec::quadratic(cos_potential(g));
    ErgodicConfig cfg = fast_config();
    WeakKamResult wk = weak_kam_iterate(GridField(g, 0.0), spec, cfg);
    ErgodicMeasureResult em = ergodic_measure(wk.u_bar, spec, cfg);
    double near = 0.0;
    for (int i = 0; i < g.n(); ++i)
        if (std::abs(g.wrap_displacement(g.coord(i) - 0.5)) <= 2.0 * g.h() + 1e-12)
            near += em.m_bar.at(i) * g.cell_volume();
    CHECK(near >= 0.95);

    // Gradient of u_bar vanishes on the high-mass cells.
    VectorField du = gradient(wk.u_bar, GradientMode::central);
    for (int i = 0; i < g.n(); ++i)
        if (em.m_bar.at(i) >= 1e-3)
            CHECK(std::abs(du.comp(0, g.index(i))) <= 12.0 * g.h());
}

TEST_CASE("stationarity residual decreases when the averaging horizon doubles") {
    TorusGrid g(1, 128);
    HamiltonianSpec spec = HamiltonianSpec::quadratic(cos_potential(g));
    ErgodicConfig cfg = fast_config();
    WeakKamResult wk = weak_kam_iterate(GridField(g, 0.0), spec, cfg);
    ErgodicConfig half = cfg;
    half.t_avg = 10.0;
    ErgodicConfig full = cfg;
    full.t_avg = 20.0;
    ErgodicMeasureResult a = ergodic_measure(wk.u_bar, spec, half);
    ErgodicMeasureResult b = ergodic_measure(wk.u_bar, spec, full);
    CHECK(b.stationarity_residual <= a.stationarity_residual * 1.05);
}

TEST_CASE("coupled solve: reproducible lambda, F profile, residuals") {
    TorusGrid g(1, 128);
    HamiltonianSpec spec = HamiltonianSpec::quadratic(cos_potential(g));
    CouplingSpec coupling = CouplingSpec::linear(MollifierKernel(g, 0.15), 1.0, GridField(g, 0.0));
    ErgodicConfig cfg = fast_config();
    ErgodicSolution a = solve_ergodic(spec, coupling, cfg);

    // Second initialization: point-like start.
    ErgodicSolution b =
        solve_ergodic(spec, coupling, cfg, GridMeasure::point_mass(g, g.index(10)));
    CHECK(std::abs(a.lambda - b.lambda) < 5e-3);
    GridField fa = coupling_eval(coupling, a.m_bar);
    GridField fb = coupling_eval(coupling, b.m_bar);
    CHECK(test::max_abs_diff(fa.values(), fb.values()) < 2.0 * cfg.tol_outer);

    // Damping invariance.
    ErgodicConfig low = cfg;
    low.theta_erg = 0.3;
    ErgodicConfig high = cfg;
    high.theta_erg = 0.7;
    ErgodicSolution c = solve_ergodic(spec, coupling, low);
    ErgodicSolution d = solve_ergodic(spec, coupling, high);
    GridField fc = coupling_eval(coupling, c.m_bar);
    GridField fd = coupling_eval(coupling, d.m_bar);
    CHECK(test::max_abs_diff(fc.values(), fd.values()) < 2.0 * cfg.tol_outer);

    // Oracle agreement on the converged field.
    const QuadraticOracle oracle = lambda_quadratic_oracle(spec.potential, fa);
    CHECK(std::abs(a.lambda - oracle.lambda) < std::max(1e-2, 2.0 * g.h()));

    CHECK(std::abs(field_mean(a.u_bar)) < 1e-12);
    CHECK(a.diagnostics.outer_iterations >= 1);
    CHECK(a.diagnostics.hj_residual_on_support < 0.5);
}

TEST_CASE("hj residual on the support shrinks on refinement") {
    auto residual_at = [&](int n, double dt_erg) {
        TorusGrid g(1, n);
        HamiltonianSpec spec = HamiltonianSpec::quadratic(cos_potential(g));
        ErgodicConfig cfg = fast_config();
        cfg.dt_erg = dt_erg;
        WeakKamResult wk = weak_kam_iterate(GridField(g, 0.0), spec, cfg);
        ErgodicMeasureResult em = ergodic_measure(wk.u_bar, spec, cfg);
        return hj_residual_on_support(wk.lambda, wk.u_bar, em.m_bar, GridField(g, 0.0), spec);
    };
    const double coarse = residual_at(32, 0.2);
    const double fine = residual_at(128, 0.05);
    CHECK(fine < coarse);
}

TEST_CASE("weak-kam non-convergence carries the lambda history") {
    TorusGrid g(1, 32);
    HamiltonianSpec spec = HamiltonianSpec::quadratic(cos_potential(g));
    ErgodicConfig cfg = fast_config();
    cfg.max_kam_iter = 40;
    cfg.tol_lambda = 1e-16;
    CHECK_THROWS_AS(weak_kam_iterate(GridField(g, 0.0), spec, cfg), NonConvergenceError);
}

} // TEST_SUITE
