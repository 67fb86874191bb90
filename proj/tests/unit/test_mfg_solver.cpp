#include <doctest.h>

#include <cmath>

#include "ergmfg/mfg_solver.hpp"
#include "test_helpers.hpp"

using namespace ergmfg;

namespace {

MFGProblem small_problem(int n = 32, double T = 1.0, int steps = 20,
                         CouplingFamily family = CouplingFamily::linear) {
    TorusGrid g(1, n);
    GridField V = GridField::sample(g, [](double x, double) { return std::cos(2 * M_PI * x); });
    MollifierKernel kernel(g, 0.15);
    CouplingSpec coupling = family == CouplingFamily::zero
                                ? CouplingSpec::zero(kernel)
                                : CouplingSpec::linear(kernel, 1.0, GridField(g, 0.0));
    GridMeasure m0 = GridMeasure::normalized(
        g, GridField::sample(g, [](double x, double) {
               return 1.0 + 0.6 * std::cos(2 * M_PI * x);
           }).values());
    return MFGProblem(HamiltonianSpec::quadratic(std::move(V)), std::move(coupling), std::move(m0),
                      GridField(g, 0.0), TimeGrid(T, steps));
}

} // namespace

TEST_SUITE("mfg_solver") {

TEST_CASE("decoupled problem: best response ignores the input path, one-shot convergence") {
    MFGProblem p = small_problem(32, 1.0, 20, CouplingFamily::zero);
    std::mt19937_64 rng(3);
    std::vector<double> times(p.time_grid.nodes());
    for (int k = 0; k < p.time_grid.nodes(); ++k)
        times[k] = p.time_grid.time(k);
    MeasurePath path_a(times, std::vector<GridMeasure>(times.size(), p.m0));
    MeasurePath path_b(times,
                       std::vector<GridMeasure>(times.size(), GridMeasure::uniform(p.grid())));
    BestResponse ra = best_response(p, path_a);
    BestResponse rb = best_response(p, path_b);
    for (std::size_t k = 0; k < ra.path.size(); ++k)
        CHECK(test::max_abs_diff(ra.path.at(k).density(), rb.path.at(k).density()) < 1e-14);

    MFGSolution sol = solve_mfg(p, DampingRule{DampingMode::fixed, 1.0}, 1e-10, 5);
    CHECK(sol.iterations == 1);
}

TEST_CASE("single-step best response matches a hand-rolled evaluation at n = 8") {
    TorusGrid g(1, 8);
    GridField V = GridField::sample(g, [](double x, double) { return std::cos(2 * M_PI * x); });
    MollifierKernel kernel(g, 0.2);
    CouplingSpec coupling = CouplingSpec::linear(kernel, 1.0, GridField(g, 0.0));
    GridMeasure m0 = GridMeasure::normalized(
        g, GridField::sample(g, [](double x, double) { return 1.0 + 0.5 * std::sin(2 * M_PI * x); })
               .values());
    GridField uf = GridField::sample(g, [](double x, double) { return 0.2 * std::cos(2 * M_PI * x); });
    const double dt = 0.1;
    MFGProblem p(HamiltonianSpec::quadratic(V), coupling, m0, uf, TimeGrid(dt, 1));
    p.scheme.mode = TransportMode::sl_pushforward;
    p.v_max = 2.0;
    p.dv = 0.01;

    MeasurePath frozen({0.0, dt}, {m0, m0});
    BestResponse br = best_response(p, frozen);

    // Hand-rolled: source, one dynamic-programming step, one push-forward.
    GridField src = coupling_eval(coupling, m0);
    for (int i = 0; i < g.n(); ++i) {
        double best = 1e300, best_v = 0.0;
        for (int j = -200; j <= 200; ++j) {
            const double v = j * 0.01;
            const double cand = dt * (0.5 * v * v + V.at(i) + src.at(i)) +
                                interpolate(uf, g.coord(i) + dt * v);
            if (cand < best) {
                best = cand;
                best_v = v;
            }
        }
        CHECK(br.hj.u[0].at(i) == doctest::Approx(best).epsilon(1e-10));
        CHECK(br.hj.feedback[0].comp(0, g.index(i)) == doctest::Approx(best_v).epsilon(1e-10));
    }
    std::vector<double> deposited(g.size(), 0.0);
    for (int i = 0; i < g.n(); ++i) {
        const double v = br.hj.feedback[0].comp(0, g.index(i));
        const double y = (i + dt * v / g.h());
        const int j0 = static_cast<int>(std::floor(y));
        const double fr = y - std::floor(y);
        deposited[g.index(j0)] += (1 - fr) * m0.at(i);
        deposited[g.index(j0 + 1)] += fr * m0.at(i);
    }
    CHECK(test::max_abs_diff(br.path.at(1).density(), deposited) < 1e-10);
}

TEST_CASE("iterate paths stay valid probability measures") {
    MFGProblem p = small_problem();
    MFGSolution sol = solve_mfg(p, DampingRule{DampingMode::fixed, 0.5}, 1e-5, 200);
    for (std::size_t k = 0; k < sol.path.size(); ++k) {
        CHECK(std::abs(sol.path.at(k).mass() - 1.0) < 1e-10);
        for (double v : sol.path.at(k).density())
            CHECK(v >= 0.0);
    }
    CHECK(test::max_abs_diff(sol.path.at(0).density(), p.m0.density()) == 0.0);
}

TEST_CASE("post-convergence best response is within the damping-scaled tolerance") {
    MFGProblem p = small_problem();
    const double tol = 1e-5;
    const double theta = 0.5;
    MFGSolution sol = solve_mfg(p, DampingRule{DampingMode::fixed, theta}, tol, 200);
    BestResponse rb = best_response(p, sol.path);
    std::vector<GridField> f_cur = coupling_along_path(p.coupling, sol.path);
    std::vector<GridField> f_br = coupling_along_path(p.coupling, rb.path);
    double gap = 0.0;
    for (std::size_t k = 0; k < f_cur.size(); ++k)
        gap = std::max(gap, test::max_abs_diff(f_cur[k].values(), f_br[k].values()));
    // residual = theta * (BR gap) near the fixed point
    CHECK(gap <= 4.0 * tol / theta);
}

TEST_CASE("uniqueness: two initializations land on the same coupling profile") {
    MFGProblem p = small_problem(32, 1.0, 20);
    const double tol = 1e-7;
    MFGSolution a = solve_mfg(p, DampingRule{DampingMode::fixed, 0.5}, tol, 400);

    // Second run: start the damped iteration from the uniform path by
    // reusing solve_mfg on a problem whose m0-frozen guess differs; the
    // solver always starts from the frozen-m0 path, so emulate the other
    // start by one explicit loop here.
    std::vector<double> times(p.time_grid.nodes());
    for (int k = 0; k < p.time_grid.nodes(); ++k)
        times[k] = p.time_grid.time(k);
    MeasurePath path(times,
                     std::vector<GridMeasure>(times.size(), GridMeasure::uniform(p.grid())));
    std::vector<GridField> f_old = coupling_along_path(p.coupling, path);
    double residual = 1.0;
    for (int it = 1; it <= 400 && residual >= tol; ++it) {
        BestResponse br = best_response(p, path);
        std::vector<GridMeasure> mixed;
        for (std::size_t k = 0; k < path.size(); ++k) {
            std::vector<double> d(p.grid().size());
            for (std::size_t q = 0; q < d.size(); ++q)
                d[q] = 0.5 * path.at(k)[q] + 0.5 * br.path.at(k)[q];
            mixed.emplace_back(p.grid(), std::move(d));
        }
        path = MeasurePath(times, std::move(mixed));
        // Keep the hard constraint path(0) = m0 of the problem data.
        std::vector<GridField> f_new = coupling_along_path(p.coupling, path);
        residual = 0.0;
        for (std::size_t k = 0; k < f_new.size(); ++k)
            residual = std::max(residual, test::max_abs_diff(f_new[k].values(), f_old[k].values()));
        f_old = std::move(f_new);
    }
    REQUIRE(residual < tol);
    std::vector<GridField> fa = coupling_along_path(p.coupling, a.path);
    double gap = 0.0;
    for (std::size_t k = 0; k < fa.size(); ++k)
        gap = std::max(gap, test::max_abs_diff(fa[k].values(), f_old[k].values()));
    CHECK(gap < 10.0 * tol);
}

TEST_CASE("fictitious play residuals are Cesaro-decreasing") {
    MFGProblem p = small_problem(32, 1.0, 20);
    try {
        solve_mfg(p, DampingRule{DampingMode::fictitious_play, 0.0}, 1e-14, 20);
        FAIL("expected NonConvergenceError at this tolerance");
    } catch (const NonConvergenceError& e) {
        REQUIRE(e.residual_history.size() == 20);
        double head = 0.0, tail = 0.0;
        for (int k = 0; k < 5; ++k) {
            head += e.residual_history[k];
            tail += e.residual_history[15 + k];
        }
        CHECK(tail / 5.0 < head / 5.0);
    }
}

TEST_CASE("coupled baseline converges with a decreasing residual tail") {
    MFGProblem p = small_problem(64, 5.0, 100);
    MFGSolution sol = solve_mfg(p, DampingRule{DampingMode::fixed, 0.5}, 1e-6, 400);
    CHECK(sol.iterations < 400);
    const auto& r = sol.residual_history;
    REQUIRE(r.size() >= 6);
    // decreasing after burn-in
    for (std::size_t k = r.size() - 3; k < r.size(); ++k)
        CHECK(r[k] <= r[k - 3]);
}

TEST_CASE("energy pairing: zero against the path's own snapshots, nonnegative otherwise") {
    MFGProblem p = small_problem(32, 1.0, 20);
    MFGSolution sol = solve_mfg(p, DampingRule{DampingMode::fixed, 0.5}, 1e-5, 200);
    // reference = constant path snapshot -> a constant path equal to ref
    // integrates to exactly zero; here test nonnegativity on the real path.
    const double e_self = energy_pairing(sol, sol.path.at(0), p.coupling);
    CHECK(e_self >= -1e-8);
    const double e_unif = energy_pairing(sol, GridMeasure::uniform(p.grid()), p.coupling);
    CHECK(e_unif >= -1e-8);

    // Constant path equal to the reference gives zero.
    MFGSolution frozen = sol;
    std::vector<GridMeasure> same(sol.path.size(), GridMeasure::uniform(p.grid()));
    frozen.path = MeasurePath(sol.path.times(), std::move(same));
    CHECK(energy_pairing(frozen, GridMeasure::uniform(p.grid()), p.coupling) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("non-convergence carries the residual history") {
    MFGProblem p = small_problem();
    try {
        solve_mfg(p, DampingRule{DampingMode::fixed, 0.5}, 1e-13, 3);
        FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
        CHECK(e.residual_history.size() == 3);
    }
}

} // TEST_SUITE
