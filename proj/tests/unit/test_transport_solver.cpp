#include <doctest.h>

#include <cmath>

#include "ergmfg/transport_solver.hpp"
#include "test_helpers.hpp"

using namespace ergmfg;

namespace {

VectorField constant_drift(const TorusGrid& g, double bx, double by = 0.0) {
    VectorField b(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        b.comp(0, k) = bx;
        if (g.dim() == 2)
            b.comp(1, k) = by;
    }
    return b;
}

} // namespace

TEST_SUITE("transport_solver") {

TEST_CASE("zero drift leaves the measure unchanged") {
    TorusGrid g(1, 32);
    std::mt19937_64 rng(3);
    GridMeasure m = test::random_measure(g, rng);
    for (TransportMode mode : {TransportMode::upwind_fv, TransportMode::sl_pushforward}) {
        TransportScheme scheme{mode, 0.9};
        GridMeasure out = transport_step(m, VectorField(g), 0.1, scheme);
        CHECK(test::max_abs_diff(out.density(), m.density()) < 1e-15);
    }
}

TEST_CASE("point mass rides a constant drift") {
    TorusGrid g(1, 40); // h = 0.025
    GridMeasure m = GridMeasure::point_mass(g, 0);
    TransportScheme scheme{TransportMode::sl_pushforward, 0.9};
    GridMeasure out = transport_step(m, constant_drift(g, 0.25), 0.1, scheme);
    // Mass centered at 0.025 = node 1 within one cell; total mass 1.
    CHECK(out.mass() == doctest::Approx(1.0).epsilon(1e-12));
    double center = 0.0;
    for (int i = 0; i < g.n(); ++i)
        center += g.coord(i) * out.at(i) * g.cell_volume();
    CHECK(center == doctest::Approx(0.025).epsilon(1e-10));
    CHECK(out.at(1) == doctest::Approx(1.0 / g.cell_volume()).epsilon(1e-12));
}

TEST_CASE("mass conservation and positivity on random cases") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        const int dim = rep % 2 == 0 ? 1 : 2;
        TorusGrid g(dim, dim == 1 ? 48 : 12);
        GridMeasure m = test::random_measure(g, rng);
        std::uniform_real_distribution<double> ub(-1.0, 1.0);
        VectorField b(g);
        for (int a = 0; a < dim; ++a)
            for (std::size_t k = 0; k < g.size(); ++k)
                b.comp(a, k) = ub(rng);
        const TransportMode mode =
            rep % 4 < 2 ? TransportMode::upwind_fv : TransportMode::sl_pushforward;
        TransportScheme scheme{mode, 0.9};
        const double dt = mode == TransportMode::upwind_fv ? 0.4 * g.h() : 0.05;
        GridMeasure out = transport_step(m, b, dt, scheme, rep);
        CHECK(std::abs(out.mass() - 1.0) < 1e-12);
        for (double v : out.density())
            CHECK(v >= 0.0);
    }
}

TEST_CASE("CFL violation carries the admissible dt") {
    TorusGrid g(1, 32);
    GridMeasure m = GridMeasure::uniform(g);
    TransportScheme scheme{TransportMode::upwind_fv, 0.9};
    try {
        transport_step(m, constant_drift(g, 2.0), 0.5, scheme);
        FAIL("expected CflError");
    } catch (const CflError& e) {
        CHECK(e.admissible_dt == doctest::Approx(0.9 * g.h() / 2.0));
    }
}

TEST_CASE("upwind max principle for constant drift") {
    // Constant drift is divergence free on the grid: donor-cell updates
    // are convex combinations, so the sup never grows.
    TorusGrid g(1, 32);
    std::mt19937_64 rng(11);
    GridMeasure m = test::random_measure(g, rng);
    TransportScheme scheme{TransportMode::upwind_fv, 0.9};
    VectorField b = constant_drift(g, 0.7);
    double sup = m.sup_density();
    for (int s = 0; s < 50; ++s) {
        m = transport_step(m, b, 0.4 * g.h(), scheme, s);
        CHECK(m.sup_density() <= sup * (1.0 + 1e-12));
        sup = m.sup_density();
    }
}

TEST_CASE("forward solve: constant path under zero drift; translation returns home") {
    TorusGrid g(1, 64);
    std::mt19937_64 rng(13);
    GridMeasure m0 = test::random_measure(g, rng);
    TimeGrid tg(1.0, 50);
    std::vector<VectorField> still(tg.steps, VectorField(g));
    TransportScheme scheme{TransportMode::upwind_fv, 0.9};
    MeasurePath path = solve_forward(m0, still, tg, scheme);
    CHECK(path.size() == static_cast<std::size_t>(tg.nodes()));
    CHECK(test::max_abs_diff(path.measures().back().density(), m0.density()) < 1e-14);

    // Constant drift over an integer displacement returns to the start.
    const double c = 0.5;
    TimeGrid loop(2.0, 100); // displacement 1.0
    std::vector<VectorField> drift(loop.steps, constant_drift(g, c));
    long substeps = 0;
    for (TransportMode mode : {TransportMode::upwind_fv, TransportMode::sl_pushforward}) {
        // Smooth initial bump (discontinuous data smears too fast for a tight bound).
        GridMeasure bump = GridMeasure::normalized(
            g, GridField::sample(g, [](double x, double) {
                   return 1.0 + std::cos(2 * M_PI * x);
               }).values());
        MeasurePath p = solve_forward(bump, drift, loop, TransportScheme{mode, 0.9}, &substeps);
        const double err = wasserstein1(p.measures().back(), bump);
        CHECK(err < 8.0 * (g.h() + loop.dt()));
    }
    CHECK(substeps >= loop.steps); // sub-stepping engaged for the CFL
}

TEST_CASE("2d rigid translation over a full period") {
    TorusGrid g(2, 16);
    GridMeasure m0 = GridMeasure::normalized(
        g, GridField::sample(g, [](double x, double y) {
               return 1.0 + 0.8 * std::cos(2 * M_PI * x) * std::sin(2 * M_PI * y);
           }).values());
    TimeGrid tg(4.0, 160); // b = (0.5, 0.25): displacement (2, 1)
    std::vector<VectorField> drift(tg.steps, constant_drift(g, 0.5, 0.25));
    TransportScheme scheme{TransportMode::sl_pushforward, 0.9};
    MeasurePath p = solve_forward(m0, drift, tg, scheme);
    const double err = wasserstein1(p.measures().back(), m0);
    CHECK(err < 8.0 * (g.h() + tg.dt()));
}

TEST_CASE("the two schemes agree on smooth data") {
    TorusGrid g(1, 64);
    GridMeasure m0 = GridMeasure::normalized(
        g, GridField::sample(g, [](double x, double) {
               return 1.0 + 0.5 * std::sin(2 * M_PI * x);
           }).values());
    TimeGrid tg(0.5, 50);
    VectorField b(g);
    for (std::size_t k = 0; k < g.size(); ++k)
        b.comp(0, k) = 0.6 * std::sin(2 * M_PI * g.coord(static_cast<int>(k)));
    std::vector<VectorField> drift(tg.steps, b);
    MeasurePath up = solve_forward(m0, drift, tg, TransportScheme{TransportMode::upwind_fv, 0.9});
    MeasurePath sl =
        solve_forward(m0, drift, tg, TransportScheme{TransportMode::sl_pushforward, 0.9});
    CHECK(wasserstein1(up.measures().back(), sl.measures().back()) < 5.0 * (g.h() + tg.dt()));
}

TEST_CASE("weak continuity: test-function increments bounded by the drift") {
    TorusGrid g(1, 64);
    std::mt19937_64 rng(17);
    GridMeasure m = test::random_measure(g, rng);
    GridField phi = GridField::sample(g, [](double x, double) { return std::cos(2 * M_PI * x); });
    VectorField gphi = gradient(phi, GradientMode::forward);
    double dphi_sup = 0.0;
    for (double v : gphi.component(0))
        dphi_sup = std::max(dphi_sup, std::abs(v));
    const double bval = 0.5, dt = 0.05;
    VectorField b = constant_drift(g, bval);
    TransportScheme scheme{TransportMode::upwind_fv, 0.9};
    double prev = pairing(phi, m);
    for (int s = 0; s < 40; ++s) {
        m = transport_step(m, b, std::min(dt, 0.9 * g.h() / bval), scheme, s);
        const double cur = pairing(phi, m);
        CHECK(std::abs(cur - prev) <= bval * dphi_sup * std::min(dt, 0.9 * g.h() / bval) * 1.1);
        prev = cur;
    }
}

TEST_CASE("d1-lipschitz check: constant path, translation ratio, bound") {
    TorusGrid g(1, 128);
    std::mt19937_64 rng(19);
    GridMeasure m = test::random_measure(g, rng);
    std::vector<double> times;
    std::vector<GridMeasure> ms;
    for (int k = 0; k <= 10; ++k) {
        times.push_back(0.1 * k);
        ms.push_back(m);
    }
    W1LipschitzReport flat = wasserstein_lipschitz_check(MeasurePath(times, ms), 0.0);
    CHECK(flat.max_ratio == doctest::Approx(0.0));
    CHECK(flat.passes);

    // Constant drift: the ratio approaches |c| as the grid refines.
    const double c = 0.4;
    GridMeasure bump = GridMeasure::normalized(
        g, GridField::sample(g, [](double x, double) {
               return 1.0 + std::cos(2 * M_PI * x);
           }).values());
    TimeGrid tg(1.0, 100);
    std::vector<VectorField> drift(tg.steps, constant_drift(g, c));
    MeasurePath path = solve_forward(bump, drift, tg, TransportScheme{TransportMode::upwind_fv, 0.9});
    W1LipschitzReport rep = wasserstein_lipschitz_check(path, c);
    CHECK(rep.passes);
    CHECK(rep.max_ratio == doctest::Approx(c).epsilon(0.10));
}

} // TEST_SUITE
