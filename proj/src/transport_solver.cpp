#include "ergmfg/transport_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ergmfg {

namespace {

// Donor-cell pass along one axis on raw densities. `stride_axis` selects
// the axis in 2D; data is a flat copy that is updated in place.
void upwind_pass_1d(std::vector<double>& rho, const std::vector<double>& b, int n, double lam) {
    std::vector<double> flux(n); // flux through face i+1/2, in density units
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        const double bf = 0.5 * (b[i] + b[ip]);
        flux[i] = bf >= 0.0 ? bf * rho[i] : bf * rho[ip];
    }
    for (int i = 0; i < n; ++i) {
        const int im = (i + n - 1) % n;
        rho[i] -= lam * (flux[i] - flux[im]);
    }
}

double upwind_cfl_quantity_1d(const std::vector<double>& b, const std::vector<double>&, int n,
                              int stride, int offset) {
    // Worst-case outflow rate per cell: pos(face right) + neg(face left).
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double br = 0.5 * (b[offset + stride * i] + b[offset + stride * ((i + 1) % n)]);
        const double bl = 0.5 * (b[offset + stride * ((i + n - 1) % n)] + b[offset + stride * i]);
        worst = std::max(worst, std::max(br, 0.0) - std::min(bl, 0.0));
    }
    return worst;
}

} // namespace

GridMeasure transport_step(const GridMeasure& m, const VectorField& b, double dt,
                           const TransportScheme& scheme, int step_parity) {
    require_same_grid(m.grid(), b.grid(), "transport_step");
    if (!(dt > 0.0))
        throw InvariantError("transport_step: dt must be > 0");
    if (!(scheme.cfl_safety > 0.0 && scheme.cfl_safety <= 1.0))
        throw InvariantError("transport_step: cfl_safety must lie in (0, 1]");
    const TorusGrid& g = m.grid();
    const int n = g.n();
    const double h = g.h();

    if (scheme.mode == TransportMode::upwind_fv) {
        // CFL audit over every axis before touching the data.
        double worst = 0.0;
        if (g.dim() == 1) {
            worst = upwind_cfl_quantity_1d(b.component(0), m.density(), n, 1, 0);
        } else {
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, upwind_cfl_quantity_1d(b.component(0), m.density(), n, n, j));
            for (int i = 0; i < n; ++i)
                worst = std::max(worst, upwind_cfl_quantity_1d(b.component(1), m.density(), n, 1, i * n));
        }
        if (dt * worst > scheme.cfl_safety * h) {
            const double admissible = worst > 0.0 ? scheme.cfl_safety * h / worst : dt;
            throw CflError("transport_step: CFL violated (dt " + std::to_string(dt) +
                               " > admissible " + std::to_string(admissible) + ")",
                           admissible);
        }
        std::vector<double> rho = m.density();
        const double lam = dt / h;
        if (g.dim() == 1) {
            upwind_pass_1d(rho, b.component(0), n, lam);
        } else {
            auto pass_x = [&]() {
                std::vector<double> line(n), bline(n);
                for (int j = 0; j < n; ++j) {
                    for (int i = 0; i < n; ++i) {
                        line[i] = rho[g.index(i, j)];
                        bline[i] = b.comp(0, g.index(i, j));
                    }
                    upwind_pass_1d(line, bline, n, lam);
                    for (int i = 0; i < n; ++i)
                        rho[g.index(i, j)] = line[i];
                }
            };
            auto pass_y = [&]() {
                std::vector<double> line(n), bline(n);
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        line[j] = rho[g.index(i, j)];
                        bline[j] = b.comp(1, g.index(i, j));
                    }
                    upwind_pass_1d(line, bline, n, lam);
                    for (int j = 0; j < n; ++j)
                        rho[g.index(i, j)] = line[j];
                }
            };
            if (step_parity % 2 == 0) {
                pass_x();
                pass_y();
            } else {
                pass_y();
                pass_x();
            }
        }
        return GridMeasure(g, std::move(rho));
    }

    // sl_pushforward: move each cell's mass to the foot point and deposit
    // with multilinear weights. Unconditionally conservative and positive.
    std::vector<double> out(g.size(), 0.0);
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            const std::size_t k = g.index(i);
            const double y = (i + dt * b.comp(0, k) / h);
            const double fl = std::floor(y);
            const int j0 = static_cast<int>(fl);
            const double fr = y - fl;
            out[g.index(j0)] += (1.0 - fr) * m[k];
            out[g.index(j0 + 1)] += fr * m[k];
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const std::size_t k = g.index(i, j);
                const double yx = i + dt * b.comp(0, k) / h;
                const double yy = j + dt * b.comp(1, k) / h;
                const double flx = std::floor(yx), fly = std::floor(yy);
                const int i0 = static_cast<int>(flx), j0 = static_cast<int>(fly);
                const double fx = yx - flx, fy = yy - fly;
                out[g.index(i0, j0)] += (1.0 - fx) * (1.0 - fy) * m[k];
                out[g.index(i0, j0 + 1)] += (1.0 - fx) * fy * m[k];
                out[g.index(i0 + 1, j0)] += fx * (1.0 - fy) * m[k];
                out[g.index(i0 + 1, j0 + 1)] += fx * fy * m[k];
            }
    }
    return GridMeasure(g, std::move(out));
}

MeasurePath solve_forward(const GridMeasure& m0, const std::vector<VectorField>& drift,
                          const TimeGrid& tg, const TransportScheme& scheme,
                          long* substeps_used) {
    if (static_cast<int>(drift.size()) < tg.steps)
        throw InvariantError("solve_forward: drift must be defined at every time step (" +
                             std::to_string(tg.steps) + " needed, " +
                             std::to_string(drift.size()) + " given)");
    std::vector<double> times(tg.nodes());
    for (int k = 0; k < tg.nodes(); ++k)
        times[k] = tg.time(k);
    std::vector<GridMeasure> out;
    out.reserve(tg.nodes());
    out.push_back(m0);
    long substeps = 0;
    int parity = 0;
    for (int k = 0; k < tg.steps; ++k) {
        GridMeasure m = out.back();
        // Integer sub-step refinement keeps the prescribed time grid while
        // honoring the CFL bound of the explicit scheme.
        const double bsup = drift[k].sup_norm();
        int sub = 1;
        if (scheme.mode == TransportMode::upwind_fv && bsup > 0.0) {
            sub = static_cast<int>(std::ceil(tg.dt() * bsup / (scheme.cfl_safety * m0.grid().h())));
            sub = std::max(sub, 1);
        }
        const double sdt = tg.dt() / sub;
        try {
            for (int s = 0; s < sub; ++s) {
                m = transport_step(m, drift[k], sdt, scheme, parity++);
                ++substeps;
            }
        } catch (const Error& e) {
            throw Error(std::string(e.what()) + " (time index " + std::to_string(k) + ")");
        }
        out.push_back(std::move(m));
    }
    if (substeps_used)
        *substeps_used = substeps;
    return MeasurePath(std::move(times), std::move(out));
}

W1LipschitzReport wasserstein_lipschitz_check(const MeasurePath& path, double b_sup) {
    if (path.grid().dim() != 1)
        throw InvariantError("wasserstein_lipschitz_check: exact d1 path requires d = 1");
    W1LipschitzReport rep{0.0, 0.0, 0.0, false};
    double min_gap = 1e300;
    for (std::size_t k = 0; k + 1 < path.size(); ++k)
        min_gap = std::min(min_gap, path.times()[k + 1] - path.times()[k]);
    for (std::size_t k = 0; k < path.size(); ++k)
        for (std::size_t l = k + 1; l < path.size(); ++l) {
            const double dtt = path.times()[l] - path.times()[k];
            rep.max_ratio = std::max(rep.max_ratio, wasserstein1(path.at(k), path.at(l)) / dtt);
        }
    rep.slack = 0.5 * path.grid().h() / min_gap;
    rep.bound = b_sup * 1.1 + rep.slack;
    rep.passes = rep.max_ratio <= rep.bound;
    return rep;
}

} // namespace ergmfg
