#include "ergmfg/mfg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ergmfg {

MFGProblem::MFGProblem(HamiltonianSpec hamiltonian_, CouplingSpec coupling_, GridMeasure m0_,
                       GridField u_f_, TimeGrid time_grid_)
    : hamiltonian(std::move(hamiltonian_)), coupling(std::move(coupling_)), m0(std::move(m0_)),
      u_f(std::move(u_f_)), time_grid(time_grid_) {
    require_same_grid(hamiltonian.potential.grid(), m0.grid(), "MFGProblem");
    require_same_grid(coupling.grid(), m0.grid(), "MFGProblem");
    require_same_grid(u_f.grid(), m0.grid(), "MFGProblem");
    u_f.check_finite("MFGProblem: u_f");
}

double MFGProblem::effective_v_max() const {
    if (v_max > 0.0)
        return v_max;
    return default_velocity_box(hamiltonian, u_f, coupling.sup_bound());
}

double MFGProblem::effective_dv() const {
    if (dv > 0.0)
        return dv;
    return default_velocity_step(grid().h(), time_grid.dt());
}

std::vector<GridField> coupling_along_path(const CouplingSpec& coupling, const MeasurePath& path) {
    std::vector<GridField> out;
    out.reserve(path.size());
    for (std::size_t k = 0; k < path.size(); ++k)
        out.push_back(coupling_eval(coupling, path.at(k)));
    return out;
}

std::vector<VectorField> drift_from_feedback(const HJSolution& hj, const HamiltonianSpec& spec,
                                             TransportMode mode) {
    const TorusGrid& g = hj.u.front().grid();
    const double h = g.h();
    const int n = g.n();
    std::vector<VectorField> out;
    out.reserve(hj.u.size());
    for (std::size_t k = 0; k < hj.u.size(); ++k) {
        if (mode == TransportMode::sl_pushforward) {
            out.push_back(hj.feedback[k]);
            continue;
        }
        VectorField b(g);
        const GridField& u = hj.u[k];
        auto one_sided = [&](double um, double u0, double up, double vstar) {
            if (vstar > 0.0)
                return (up - u0) / h;
            if (vstar < 0.0)
                return (u0 - um) / h;
            return 0.0;
        };
        if (g.dim() == 1) {
            for (int i = 0; i < n; ++i) {
                const std::size_t q = g.index(i);
                const double du =
                    one_sided(u.at(i - 1), u.at(i), u.at(i + 1), hj.feedback[k].comp(0, q));
                b.comp(0, q) = -spec.stiffness[q] * du;
            }
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const std::size_t q = g.index(i, j);
                    const double dux = one_sided(u.at(i - 1, j), u.at(i, j), u.at(i + 1, j),
                                                 hj.feedback[k].comp(0, q));
                    const double duy = one_sided(u.at(i, j - 1), u.at(i, j), u.at(i, j + 1),
                                                 hj.feedback[k].comp(1, q));
                    b.comp(0, q) = -spec.stiffness[q] * dux;
                    b.comp(1, q) = -spec.stiffness[q] * duy;
                }
        }
        out.push_back(std::move(b));
    }
    return out;
}

namespace {

BestResponse best_response_with_sources(const MFGProblem& problem,
                                        const std::vector<GridField>& sources) {
    double v_max = problem.effective_v_max();
    const double dv = problem.effective_dv();
    for (int attempt = 0;; ++attempt) {
        try {
            HJSolution hj =
                solve_backward(problem.u_f, sources, problem.hamiltonian, problem.time_grid, v_max, dv);
            std::vector<VectorField> drift =
                drift_from_feedback(hj, problem.hamiltonian, problem.scheme.mode);
            MeasurePath path =
                solve_forward(problem.m0, drift, problem.time_grid, problem.scheme);
            return BestResponse{std::move(hj), std::move(path)};
        } catch (const VelocityBoxError&) {
            if (attempt >= 8)
                throw;
            v_max *= 1.5;
        }
    }
}

MeasurePath mix_paths(const MeasurePath& a, const MeasurePath& b, double theta) {
    std::vector<GridMeasure> mixed;
    mixed.reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        std::vector<double> d(a.grid().size());
        for (std::size_t q = 0; q < d.size(); ++q)
            d[q] = (1.0 - theta) * a.at(k)[q] + theta * b.at(k)[q];
        mixed.emplace_back(a.grid(), std::move(d));
    }
    return MeasurePath(a.times(), std::move(mixed));
}

double sup_gap(const std::vector<GridField>& a, const std::vector<GridField>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t q = 0; q < a[k].grid().size(); ++q)
            s = std::max(s, std::abs(a[k][q] - b[k][q]));
    return s;
}

} // namespace

BestResponse best_response(const MFGProblem& problem, const MeasurePath& m_path) {
    require_same_grid(problem.grid(), m_path.grid(), "best_response");
    std::vector<GridField> sources = coupling_along_path(problem.coupling, m_path);
    return best_response_with_sources(problem, sources);
}

MFGSolution solve_mfg(const MFGProblem& problem, const DampingRule& damping, double tol_fp,
                      int max_iter) {
    if (!(tol_fp > 0.0))
        throw InvariantError("solve_mfg: tol_fp must be > 0");
    if (damping.mode == DampingMode::fixed && !(damping.theta > 0.0 && damping.theta <= 1.0))
        throw InvariantError("solve_mfg: fixed damping theta must lie in (0, 1]");

    // Initial guess: m0 frozen in time.
    std::vector<double> times(problem.time_grid.nodes());
    for (int k = 0; k < problem.time_grid.nodes(); ++k)
        times[k] = problem.time_grid.time(k);
    MeasurePath path(times, std::vector<GridMeasure>(problem.time_grid.nodes(), problem.m0));
    std::vector<GridField> f_old = coupling_along_path(problem.coupling, path);

    std::vector<double> history;
    for (int it = 1; it <= max_iter; ++it) {
        BestResponse br = best_response_with_sources(problem, f_old);
        const double theta =
            damping.mode == DampingMode::fictitious_play ? 1.0 / (it + 1.0) : damping.theta;
        path = mix_paths(path, br.path, theta);
        std::vector<GridField> f_new = coupling_along_path(problem.coupling, path);
        const double residual = sup_gap(f_new, f_old);
        history.push_back(residual);
        f_old = std::move(f_new);
        if (residual < tol_fp) {
            BestResponse final_pass = best_response_with_sources(problem, f_old);
            MFGSolution sol{std::move(final_pass.hj), std::move(path), std::move(history), it,
                            residual / theta};
            return sol;
        }
    }
    throw NonConvergenceError("solve_mfg: no convergence within " + std::to_string(max_iter) +
                                  " iterations (last residual " +
                                  std::to_string(history.back()) + ")",
                              history);
}

double energy_pairing(const MFGSolution& sol, const GridMeasure& reference,
                      const CouplingSpec& coupling) {
    require_same_grid(sol.path.grid(), reference.grid(), "energy_pairing");
    const GridField f_ref = coupling_eval(coupling, reference);
    const auto& times = sol.path.times();
    double total = 0.0;
    for (std::size_t k = 0; k < sol.path.size(); ++k) {
        GridField fk = coupling_eval(coupling, sol.path.at(k));
        double gk = 0.0;
        const TorusGrid& g = sol.path.grid();
        for (std::size_t q = 0; q < g.size(); ++q)
            gk += (fk[q] - f_ref[q]) * (sol.path.at(k)[q] - reference[q]);
        gk *= g.cell_volume();
        double wgt = 0.0;
        if (k > 0)
            wgt += 0.5 * (times[k] - times[k - 1]);
        if (k + 1 < sol.path.size())
            wgt += 0.5 * (times[k + 1] - times[k]);
        total += wgt * gk;
    }
    return total;
}

} // namespace ergmfg
