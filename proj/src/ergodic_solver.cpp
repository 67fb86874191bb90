#include "ergmfg/ergodic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace ergmfg {

void ErgodicConfig::validate() const {
    if (!(dt_erg > 0.0) || !(tol_lambda > 0.0) || cesaro_window < 1 || !(t_avg > 0.0) ||
        !(theta_erg > 0.0 && theta_erg <= 1.0) || !(tol_outer > 0.0) || max_outer < 1 ||
        max_kam_iter < 1)
        throw InvariantError("ErgodicConfig: all parameters must be positive, theta_erg in (0,1]");
}

WeakKamResult weak_kam_iterate(const GridField& f, const HamiltonianSpec& spec,
                               const ErgodicConfig& cfg) {
    cfg.validate();
    require_same_grid(f.grid(), spec.potential.grid(), "weak_kam_iterate");
    const TorusGrid& g = f.grid();
    const int M = cfg.cesaro_window;

    double v_max = cfg.v_max > 0.0
                       ? cfg.v_max
                       : default_velocity_box(spec, GridField(g, 0.0), field_sup_norm(f));
    const double dv = cfg.dv > 0.0 ? cfg.dv : default_velocity_step(g.h(), cfg.dt_erg);

    GridField w(g, 0.0);
    std::deque<double> deltas;           // trailing mean shifts
    std::deque<std::vector<double>> ws;  // trailing normalized iterates
    std::vector<double> cesaro_history;

    WeakKamResult res{0.0, GridField(g, 0.0), {}, 0};
    for (long it = 1; it <= cfg.max_kam_iter; ++it) {
        LaxOleinikStep step = [&]() {
            for (int attempt = 0;; ++attempt) {
                try {
                    return lax_oleinik_step(w, f, spec, cfg.dt_erg, v_max, dv);
                } catch (const VelocityBoxError&) {
                    if (attempt >= 8)
                        throw;
                    v_max *= 1.5;
                }
            }
        }();
        const double shift = field_mean(step.u); // w had mean zero
        const double delta = -shift / cfg.dt_erg;
        for (double& v : step.u.mutable_values())
            v -= shift;
        w = std::move(step.u);

        deltas.push_back(delta);
        if (static_cast<int>(deltas.size()) > M)
            deltas.pop_front();
        ws.push_back(w.values());
        if (static_cast<int>(ws.size()) > M)
            ws.pop_front();

        if (static_cast<int>(deltas.size()) == M) {
            double ces = 0.0;
            for (double d : deltas)
                ces += d;
            ces /= M;
            cesaro_history.push_back(ces);
            if (static_cast<int>(cesaro_history.size()) >= M) {
                double lo = ces, hi = ces;
                for (std::size_t q = cesaro_history.size() - M; q < cesaro_history.size(); ++q) {
                    lo = std::min(lo, cesaro_history[q]);
                    hi = std::max(hi, cesaro_history[q]);
                }
                if (hi - lo < cfg.tol_lambda) {
                    res.lambda = ces;
                    res.iterations = it;
                    res.lambda_history = std::move(cesaro_history);
                    std::vector<double> avg(g.size(), 0.0);
                    for (const auto& wk : ws)
                        for (std::size_t q = 0; q < avg.size(); ++q)
                            avg[q] += wk[q];
                    for (double& v : avg)
                        v /= static_cast<double>(ws.size());
                    GridField ub(g, std::move(avg));
                    const double mean = field_mean(ub);
                    for (double& v : ub.mutable_values())
                        v -= mean;
                    res.u_bar = std::move(ub);
                    return res;
                }
            }
        }
    }
    throw NonConvergenceError("weak_kam_iterate: Cesaro lambda did not stabilize within " +
                                  std::to_string(cfg.max_kam_iter) + " iterations",
                              cesaro_history);
}

namespace {

std::vector<GridField> stationarity_dictionary(const TorusGrid& g) {
    std::vector<GridField> dict;
    const double two_pi = 2.0 * M_PI;
    if (g.dim() == 1) {
        for (int k = 1; k <= 4; ++k) {
            dict.push_back(GridField::sample(g, [&](double x, double) { return std::cos(two_pi * k * x); }));
            dict.push_back(GridField::sample(g, [&](double x, double) { return std::sin(two_pi * k * x); }));
        }
    } else {
        for (int kx = 0; kx <= 4; ++kx)
            for (int ky = 0; ky <= 4; ++ky) {
                if (kx == 0 && ky == 0)
                    continue;
                dict.push_back(GridField::sample(g, [&](double x, double y) {
                    return std::cos(two_pi * (kx * x + ky * y));
                }));
                dict.push_back(GridField::sample(g, [&](double x, double y) {
                    return std::sin(two_pi * (kx * x + ky * y));
                }));
            }
    }
    return dict;
}

// Analytic gradients of the dictionary entries are not needed: the weak
// form is evaluated with central differences of the sampled fields, which
// matches the discrete transport operator's own resolution.
double stationarity_residual(const GridField& u_bar, const HamiltonianSpec& spec,
                             const GridMeasure& m_bar) {
    const TorusGrid& g = u_bar.grid();
    VectorField du = gradient(u_bar, GradientMode::central);
    double worst = 0.0;
    for (const GridField& phi : stationarity_dictionary(g)) {
        VectorField dphi = gradient(phi, GradientMode::central);
        double acc = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            double dot = 0.0;
            for (int a = 0; a < g.dim(); ++a)
                dot += spec.stiffness[k] * du.comp(a, k) * dphi.comp(a, k);
            acc += dot * m_bar[k];
        }
        worst = std::max(worst, std::abs(acc * g.cell_volume()));
    }
    return worst;
}

} // namespace

ErgodicMeasureResult ergodic_measure(const GridField& u_bar, const HamiltonianSpec& spec,
                                     const ErgodicConfig& cfg) {
    cfg.validate();
    const TorusGrid& g = u_bar.grid();
    VectorField du = gradient(u_bar, GradientMode::central);
    VectorField b(g);
    for (std::size_t k = 0; k < g.size(); ++k)
        for (int a = 0; a < g.dim(); ++a)
            b.comp(a, k) = -spec.stiffness[k] * du.comp(a, k);

    const int steps = std::max(2, static_cast<int>(std::ceil(cfg.t_avg / cfg.dt_erg)));
    TimeGrid tg(cfg.t_avg, steps);
    std::vector<VectorField> drift(steps, b);
    long substeps = 0;
    MeasurePath path = solve_forward(GridMeasure::uniform(g), drift, tg, cfg.scheme, &substeps);
    GridMeasure m_bar = time_average(path, 0.5 * cfg.t_avg, cfg.t_avg);
    ErgodicMeasureResult res{std::move(m_bar), 0.0, substeps};
    res.stationarity_residual = stationarity_residual(u_bar, spec, res.m_bar);
    return res;
}

double hj_residual_on_support(double lambda, const GridField& u_bar, const GridMeasure& m_bar,
                              const GridField& f, const HamiltonianSpec& spec) {
    const TorusGrid& g = u_bar.grid();
    VectorField du = gradient(u_bar, GradientMode::central);
    // The reported lambda is the negative of the constant in the
    // stationary equation; see WeakKamResult.
    const double lam_pde = -lambda;
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (m_bar[k] < 1e-3)
            continue;
        std::array<double, 2> p{du.comp(0, k), g.dim() == 2 ? du.comp(1, k) : 0.0};
        worst = std::max(worst, std::abs(lam_pde + hamiltonian_eval(spec, k, p) - f[k]));
    }
    return worst;
}

ErgodicSolution solve_ergodic(const HamiltonianSpec& hamiltonian, const CouplingSpec& coupling,
                              const ErgodicConfig& cfg, std::optional<GridMeasure> initial) {
    cfg.validate();
    require_same_grid(hamiltonian.potential.grid(), coupling.grid(), "solve_ergodic");
    const TorusGrid& g = hamiltonian.potential.grid();
    GridMeasure m_bar = initial.value_or(GridMeasure::uniform(g));
    require_same_grid(m_bar.grid(), g, "solve_ergodic");

    GridField f_old = coupling_eval(coupling, m_bar);
    std::vector<double> outer_residuals;
    int outer_done = 0;
    for (int j = 1; j <= cfg.max_outer; ++j) {
        WeakKamResult wk = weak_kam_iterate(f_old, hamiltonian, cfg);
        ErgodicMeasureResult em = ergodic_measure(wk.u_bar, hamiltonian, cfg);
        std::vector<double> mixed(g.size());
        for (std::size_t k = 0; k < g.size(); ++k)
            mixed[k] = (1.0 - cfg.theta_erg) * m_bar[k] + cfg.theta_erg * em.m_bar[k];
        m_bar = GridMeasure(g, std::move(mixed));
        GridField f_new = coupling_eval(coupling, m_bar);
        double residual = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            residual = std::max(residual, std::abs(f_new[k] - f_old[k]));
        outer_residuals.push_back(residual);
        f_old = std::move(f_new);
        outer_done = j;
        if (residual < cfg.tol_outer)
            break;
        if (j == cfg.max_outer)
            throw NonConvergenceError("solve_ergodic: outer loop did not converge within " +
                                          std::to_string(cfg.max_outer) + " iterations",
                                      outer_residuals);
    }

    WeakKamResult wk = weak_kam_iterate(f_old, hamiltonian, cfg);
    ErgodicSolution sol{wk.lambda, wk.u_bar, m_bar, {}};
    sol.diagnostics.lambda_history = std::move(wk.lambda_history);
    sol.diagnostics.outer_residuals = std::move(outer_residuals);
    sol.diagnostics.outer_iterations = outer_done;
    sol.diagnostics.hj_residual_on_support =
        hj_residual_on_support(sol.lambda, sol.u_bar, sol.m_bar, f_old, hamiltonian);
    sol.diagnostics.stationarity_residual =
        stationarity_residual(sol.u_bar, hamiltonian, sol.m_bar);
    return sol;
}

QuadraticOracle lambda_quadratic_oracle(const GridField& V, const GridField& f) {
    require_same_grid(V.grid(), f.grid(), "lambda_quadratic_oracle");
    double lo = 1e300;
    for (std::size_t k = 0; k < V.grid().size(); ++k)
        lo = std::min(lo, V[k] + f[k]);
    QuadraticOracle out{-lo, {}};
    for (std::size_t k = 0; k < V.grid().size(); ++k)
        if (V[k] + f[k] <= lo + 1e-9)
            out.argmin_cells.push_back(k);
    return out;
}

} // namespace ergmfg
