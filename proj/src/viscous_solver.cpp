#include "ergmfg/viscous_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ergmfg {

namespace {

// Thomas algorithm for a constant-coefficient periodic tridiagonal system
// (1+2c) x_i - c x_{i-1} - c x_{i+1} = r_i, via Sherman-Morrison.
void periodic_tridiag_solve(std::vector<double>& x, const std::vector<double>& r, double c) {
    const int n = static_cast<int>(r.size());
    const double diag = 1.0 + 2.0 * c;
    const double off = -c;
    if (c == 0.0) {
        x = r;
        return;
    }
    // Condensed system: A' = A - u v^T with u = (gamma, 0, ..., off),
    // v = (1, 0, ..., off/gamma); A' is strictly tridiagonal.
    const double gamma = -diag; // any nonzero choice
    std::vector<double> dd(n, diag);
    dd[0] = diag - gamma;
    dd[n - 1] = diag - off * off / gamma;
    auto thomas = [&](const std::vector<double>& rhs, std::vector<double>& out) {
        std::vector<double> cp(n), dp(n);
        cp[0] = off / dd[0];
        dp[0] = rhs[0] / dd[0];
        for (int i = 1; i < n; ++i) {
            const double m = dd[i] - off * cp[i - 1];
            cp[i] = off / m;
            dp[i] = (rhs[i] - off * dp[i - 1]) / m;
        }
        out.resize(n);
        out[n - 1] = dp[n - 1];
        for (int i = n - 2; i >= 0; --i)
            out[i] = dp[i] - cp[i] * out[i + 1];
    };
    std::vector<double> y, z, u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = off;
    thomas(r, y);
    thomas(u, z);
    const double vy = y[0] + (off / gamma) * y[n - 1];
    const double vz = z[0] + (off / gamma) * z[n - 1];
    const double fac = vy / (1.0 + vz);
    x.resize(n);
    for (int i = 0; i < n; ++i)
        x[i] = y[i] - fac * z[i];
}

} // namespace

GridField implicit_diffusion_solve(const GridField& rhs, double c) {
    const TorusGrid& g = rhs.grid();
    const int n = g.n();
    if (c < 0.0)
        throw InvariantError("implicit_diffusion_solve: c must be >= 0");
    if (g.dim() == 1) {
        std::vector<double> out;
        periodic_tridiag_solve(out, rhs.values(), c);
        return GridField(g, std::move(out));
    }
    // Factored per-axis solves (I - c Dxx)(I - c Dyy); first-order
    // consistent with the full operator and unconditionally stable.
    std::vector<double> work = rhs.values();
    std::vector<double> line(n), sol(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i)
            line[i] = work[g.index(i, j)];
        periodic_tridiag_solve(sol, line, c);
        for (int i = 0; i < n; ++i)
            work[g.index(i, j)] = sol[i];
    }
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(work.begin() + i * n, work.begin() + (i + 1) * n);
        periodic_tridiag_solve(sol, row, c);
        for (int j = 0; j < n; ++j)
            work[g.index(i, j)] = sol[j];
    }
    return GridField(g, std::move(work));
}

HJSolution solve_viscous_hj(const GridField& u_f, const std::vector<GridField>& source,
                            const HamiltonianSpec& spec, const TimeGrid& tg, double epsilon,
                            double v_max, double dv) {
    if (static_cast<int>(source.size()) < tg.steps)
        throw InvariantError("solve_viscous_hj: source must be defined at every time step");
    const TorusGrid& g = u_f.grid();
    const double c = epsilon * tg.dt() / (g.h() * g.h());
    HJSolution sol{tg, {}, {}};
    sol.u.assign(tg.nodes(), GridField(g));
    sol.feedback.assign(tg.nodes(), VectorField(g));
    sol.u[tg.steps] = u_f;
    for (int k = tg.steps - 1; k >= 0; --k) {
        LaxOleinikStep step = lax_oleinik_step(sol.u[k + 1], source[k], spec, tg.dt(), v_max, dv);
        sol.u[k] = implicit_diffusion_solve(step.u, c);
        sol.feedback[k] = std::move(step.feedback);
    }
    sol.feedback[tg.steps] = sol.feedback[tg.steps > 0 ? tg.steps - 1 : 0];
    return sol;
}

MeasurePath solve_viscous_fp(const GridMeasure& m0, const std::vector<VectorField>& drift,
                             const TimeGrid& tg, double epsilon, const TransportScheme& scheme) {
    if (static_cast<int>(drift.size()) < tg.steps)
        throw InvariantError("solve_viscous_fp: drift must be defined at every time step");
    const TorusGrid& g = m0.grid();
    const double c = epsilon * tg.dt() / (g.h() * g.h());
    std::vector<double> times(tg.nodes());
    for (int k = 0; k < tg.nodes(); ++k)
        times[k] = tg.time(k);
    std::vector<GridMeasure> out;
    out.reserve(tg.nodes());
    out.push_back(m0);
    int parity = 0;
    for (int k = 0; k < tg.steps; ++k) {
        GridMeasure m = out.back();
        const double bsup = drift[k].sup_norm();
        int sub = 1;
        if (scheme.mode == TransportMode::upwind_fv && bsup > 0.0)
            sub = std::max(1, static_cast<int>(std::ceil(tg.dt() * bsup / (scheme.cfl_safety * g.h()))));
        const double sdt = tg.dt() / sub;
        for (int s = 0; s < sub; ++s)
            m = transport_step(m, drift[k], sdt, scheme, parity++);
        // Implicit diffusion: an M-matrix solve, so positivity and total
        // mass are both preserved.
        GridField diffused = implicit_diffusion_solve(m.as_field(), c);
        std::vector<double> rho = diffused.values();
        for (double& v : rho)
            v = std::max(v, 0.0);
        out.emplace_back(g, std::move(rho));
    }
    return MeasurePath(std::move(times), std::move(out));
}

MFGSolution solve_viscous_mfg(const ViscousProblem& problem, const DampingRule& damping,
                              double tol_fp, int max_iter) {
    const MFGProblem& base = problem.base;
    if (!(tol_fp > 0.0))
        throw InvariantError("solve_viscous_mfg: tol_fp must be > 0");

    std::vector<double> times(base.time_grid.nodes());
    for (int k = 0; k < base.time_grid.nodes(); ++k)
        times[k] = base.time_grid.time(k);
    MeasurePath path(times, std::vector<GridMeasure>(base.time_grid.nodes(), base.m0));
    std::vector<GridField> f_old = coupling_along_path(base.coupling, path);

    double v_max = base.effective_v_max();
    const double dv = base.effective_dv();

    auto viscous_response = [&](const std::vector<GridField>& sources) {
        for (int attempt = 0;; ++attempt) {
            try {
                HJSolution hj = solve_viscous_hj(base.u_f, sources, base.hamiltonian,
                                                 base.time_grid, problem.epsilon, v_max, dv);
                std::vector<VectorField> drift =
                    drift_from_feedback(hj, base.hamiltonian, base.scheme.mode);
                MeasurePath mp = solve_viscous_fp(base.m0, drift, base.time_grid,
                                                  problem.epsilon, base.scheme);
                return BestResponse{std::move(hj), std::move(mp)};
            } catch (const VelocityBoxError&) {
                if (attempt >= 8)
                    throw;
                v_max *= 1.5;
            }
        }
    };

    std::vector<double> history;
    for (int it = 1; it <= max_iter; ++it) {
        BestResponse br = viscous_response(f_old);
        const double theta =
            damping.mode == DampingMode::fictitious_play ? 1.0 / (it + 1.0) : damping.theta;
        std::vector<GridMeasure> mixed;
        mixed.reserve(path.size());
        for (std::size_t k = 0; k < path.size(); ++k) {
            std::vector<double> d(base.grid().size());
            for (std::size_t q = 0; q < d.size(); ++q)
                d[q] = (1.0 - theta) * path.at(k)[q] + theta * br.path.at(k)[q];
            mixed.emplace_back(base.grid(), std::move(d));
        }
        path = MeasurePath(path.times(), std::move(mixed));
        std::vector<GridField> f_new = coupling_along_path(base.coupling, path);
        double residual = 0.0;
        for (std::size_t k = 0; k < f_new.size(); ++k)
            for (std::size_t q = 0; q < base.grid().size(); ++q)
                residual = std::max(residual, std::abs(f_new[k][q] - f_old[k][q]));
        history.push_back(residual);
        f_old = std::move(f_new);
        if (residual < tol_fp) {
            HJSolution hj = solve_viscous_hj(base.u_f, f_old, base.hamiltonian, base.time_grid,
                                             problem.epsilon, v_max, dv);
            return MFGSolution{std::move(hj), std::move(path), std::move(history), it,
                               residual / theta};
        }
    }
    throw NonConvergenceError("solve_viscous_mfg: no convergence within " +
                                  std::to_string(max_iter) + " iterations",
                              history);
}

std::vector<ViscousSweepRow> viscous_mfg_sweep(const MFGProblem& problem,
                                               const std::vector<double>& eps_list,
                                               const DampingRule& damping, double tol_fp,
                                               int max_iter) {
    for (std::size_t k = 0; k + 1 < eps_list.size(); ++k)
        if (!(eps_list[k] > eps_list[k + 1]))
            throw InvariantError("viscous_mfg_sweep: eps_list must be strictly decreasing");
    MFGSolution first_order = solve_mfg(problem, damping, tol_fp, max_iter);
    std::vector<ViscousSweepRow> rows;
    rows.reserve(eps_list.size());
    for (double eps : eps_list) {
        MFGSolution vs = solve_viscous_mfg(ViscousProblem(problem, eps), damping, tol_fp, max_iter);
        ViscousSweepRow row{eps, 0.0, 0.0};
        for (std::size_t q = 0; q < problem.grid().size(); ++q)
            row.sup_gap_u = std::max(row.sup_gap_u, std::abs(vs.hj.u[0][q] - first_order.hj.u[0][q]));
        row.d1_gap_m_at_T =
            wasserstein1(vs.path.measures().back(), first_order.path.measures().back());
        rows.push_back(row);
    }
    return rows;
}

} // namespace ergmfg
