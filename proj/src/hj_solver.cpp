#include "ergmfg/hj_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ergmfg {

namespace {

struct FootPoint {
    int shift;   // integer cell offset of the foot point
    double frac; // fractional part in [0,1)
};

FootPoint split_offset(double offset_cells) {
    FootPoint fp;
    const double fl = std::floor(offset_cells);
    fp.shift = static_cast<int>(fl);
    fp.frac = offset_cells - fl;
    return fp;
}

} // namespace

double default_velocity_box(const HamiltonianSpec& spec, const GridField& u_f, double f_sup) {
    VectorField g = gradient(u_f, GradientMode::forward);
    double du_sup = 0.0;
    for (int a = 0; a < u_f.grid().dim(); ++a)
        for (double v : g.component(a))
            du_sup = std::max(du_sup, std::abs(v));
    const double osc = field_max(spec.potential) - field_min(spec.potential);
    return spec.c_bar * (du_sup + 2.0 * std::sqrt(f_sup * spec.c_bar + osc) + 1.0);
}

double default_velocity_step(double h, double dt) {
    return std::min(h / (2.0 * dt), 0.05);
}

LaxOleinikStep lax_oleinik_step(const GridField& u_next, const GridField& f_now,
                                const HamiltonianSpec& spec, double dt, double v_max,
                                double dv) {
    require_same_grid(u_next.grid(), f_now.grid(), "lax_oleinik_step");
    require_same_grid(u_next.grid(), spec.potential.grid(), "lax_oleinik_step");
    if (!(dt > 0.0))
        throw InvariantError("lax_oleinik_step: dt must be > 0");
    const TorusGrid& g = u_next.grid();
    const int n = g.n();
    const double h = g.h();

    const bool frozen = v_max == 0.0; // diagnostic mode: v = 0 only
    if (!frozen && !(dv > 0.0 && v_max > 0.0))
        throw InvariantError("lax_oleinik_step: need v_max > 0 and dv > 0");
    const int m = frozen ? 0 : static_cast<int>(std::ceil(v_max / dv));

    LaxOleinikStep out{GridField(g), VectorField(g)};
    std::vector<double> best(g.size(), 1e300);
    std::vector<int> argx(g.size(), 0), argy(g.size(), 0);

    if (g.dim() == 1) {
        const auto& un = u_next.values();
        for (int jv = -m; jv <= m; ++jv) {
            const double v = jv * dv;
            const FootPoint fp = split_offset(dt * v / h);
            const double kin = 0.5 * v * v;
            for (int i = 0; i < n; ++i) {
                const std::size_t k = g.index(i);
                const double interp = (1.0 - fp.frac) * un[g.index(i + fp.shift)] +
                                      fp.frac * un[g.index(i + fp.shift + 1)];
                const double cand =
                    dt * (kin / spec.stiffness[k] + spec.potential[k] + f_now[k]) + interp;
                if (cand < best[k]) {
                    best[k] = cand;
                    argx[k] = jv;
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            const std::size_t k = g.index(i);
            if (!frozen && std::abs(argx[k]) == m)
                throw VelocityBoxError("lax_oleinik_step: velocity box exhausted at node " +
                                           std::to_string(i),
                                       v_max);
            out.u[k] = best[k];
            out.feedback.comp(0, k) = argx[k] * dv;
        }
    } else {
        for (int jx = -m; jx <= m; ++jx)
            for (int jy = -m; jy <= m; ++jy) {
                const double vx = jx * dv, vy = jy * dv;
                const FootPoint fx = split_offset(dt * vx / h);
                const FootPoint fy = split_offset(dt * vy / h);
                const double kin = 0.5 * (vx * vx + vy * vy);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const std::size_t k = g.index(i, j);
                        const double u00 = u_next.at(i + fx.shift, j + fy.shift);
                        const double u01 = u_next.at(i + fx.shift, j + fy.shift + 1);
                        const double u10 = u_next.at(i + fx.shift + 1, j + fy.shift);
                        const double u11 = u_next.at(i + fx.shift + 1, j + fy.shift + 1);
                        const double interp = (1.0 - fx.frac) * ((1.0 - fy.frac) * u00 + fy.frac * u01) +
                                              fx.frac * ((1.0 - fy.frac) * u10 + fy.frac * u11);
                        const double cand =
                            dt * (kin / spec.stiffness[k] + spec.potential[k] + f_now[k]) + interp;
                        if (cand < best[k]) {
                            best[k] = cand;
                            argx[k] = jx;
                            argy[k] = jy;
                        }
                    }
            }
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!frozen && (std::abs(argx[k]) == m || std::abs(argy[k]) == m))
                throw VelocityBoxError("lax_oleinik_step: velocity box exhausted at node " +
                                           std::to_string(k),
                                       v_max);
            out.u[k] = best[k];
            out.feedback.comp(0, k) = argx[k] * dv;
            out.feedback.comp(1, k) = argy[k] * dv;
        }
    }
    return out;
}

HJSolution solve_backward(const GridField& u_f, const std::vector<GridField>& source,
                          const HamiltonianSpec& spec, const TimeGrid& tg, double v_max,
                          double dv) {
    if (static_cast<int>(source.size()) < tg.steps)
        throw InvariantError("solve_backward: source must be defined at every time step (" +
                             std::to_string(tg.steps) + " needed, " +
                             std::to_string(source.size()) + " given)");
    HJSolution sol{tg, {}, {}};
    sol.u.assign(tg.nodes(), GridField(u_f.grid()));
    sol.feedback.assign(tg.nodes(), VectorField(u_f.grid()));
    sol.u[tg.steps] = u_f;
    for (int k = tg.steps - 1; k >= 0; --k) {
        try {
            LaxOleinikStep step = lax_oleinik_step(sol.u[k + 1], source[k], spec, tg.dt(), v_max, dv);
            sol.u[k] = std::move(step.u);
            sol.feedback[k] = std::move(step.feedback);
        } catch (const VelocityBoxError& e) {
            throw VelocityBoxError(std::string(e.what()) + " (time index " + std::to_string(k) + ")",
                                   e.v_max);
        }
    }
    // No step is taken at the terminal node; carry the last feedback.
    sol.feedback[tg.steps] = sol.feedback[tg.steps > 0 ? tg.steps - 1 : 0];
    return sol;
}

LipschitzReport lipschitz_report(const HJSolution& sol) {
    LipschitzReport rep{0.0, 0.0, 0.0};
    const TorusGrid& g = sol.u.front().grid();
    const double h = g.h();
    const int n = g.n();
    for (const GridField& u : sol.u) {
        if (g.dim() == 1) {
            for (int i = 0; i < n; ++i) {
                rep.lip_x = std::max(rep.lip_x, std::abs(u.at(i + 1) - u.at(i)) / h);
                rep.max_second_diff = std::max(
                    rep.max_second_diff,
                    std::abs(u.at(i + 1) - 2.0 * u.at(i) + u.at(i - 1)) / (h * h));
            }
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    rep.lip_x = std::max(rep.lip_x, std::abs(u.at(i + 1, j) - u.at(i, j)) / h);
                    rep.lip_x = std::max(rep.lip_x, std::abs(u.at(i, j + 1) - u.at(i, j)) / h);
                    rep.max_second_diff = std::max(
                        rep.max_second_diff,
                        std::abs(u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) / (h * h));
                    rep.max_second_diff = std::max(
                        rep.max_second_diff,
                        std::abs(u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) / (h * h));
                }
        }
    }
    const double dt = sol.time_grid.dt();
    for (std::size_t k = 0; k + 1 < sol.u.size(); ++k)
        for (std::size_t q = 0; q < g.size(); ++q)
            rep.lip_t = std::max(rep.lip_t, std::abs(sol.u[k + 1][q] - sol.u[k][q]) / dt);
    return rep;
}

} // namespace ergmfg
