#include "ergmfg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace ergmfg {

RescaledSolution rescale(const MFGSolution& sol) {
    RescaledSolution rs;
    rs.horizon = sol.hj.time_grid.horizon;
    rs.s_nodes.resize(sol.hj.time_grid.nodes());
    for (int k = 0; k < sol.hj.time_grid.nodes(); ++k)
        rs.s_nodes[k] = sol.hj.time_grid.time(k) / rs.horizon;
    rs.v = &sol.hj.u;
    rs.nu = &sol.path.measures();
    return rs;
}

LongTimeErrors long_time_errors(const MFGSolution& sol, const ErgodicSolution& erg,
                                const CouplingSpec& coupling) {
    require_same_grid(sol.path.grid(), erg.m_bar.grid(), "long_time_errors");
    const RescaledSolution rs = rescale(sol);
    const double T = rs.horizon;
    // The value function drifts at -lambda_reported per unit time.
    const double lambda_drift = -erg.lambda;

    LongTimeErrors out{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < rs.s_nodes.size(); ++k) {
        const double target = lambda_drift * (1.0 - rs.s_nodes[k]);
        double gap = 0.0;
        const GridField& u = (*rs.v)[k];
        for (std::size_t q = 0; q < u.grid().size(); ++q)
            gap = std::max(gap, std::abs(u[q] / T - target));
        out.e_u = std::max(out.e_u, gap);
    }

    const GridField f_bar = coupling_eval(coupling, erg.m_bar);
    std::vector<double> fgap(rs.s_nodes.size());
    for (std::size_t k = 0; k < rs.s_nodes.size(); ++k) {
        GridField fk = coupling_eval(coupling, (*rs.nu)[k]);
        double gap = 0.0;
        for (std::size_t q = 0; q < fk.grid().size(); ++q)
            gap = std::max(gap, std::abs(fk[q] - f_bar[q]));
        fgap[k] = gap;
    }
    for (std::size_t k = 0; k + 1 < rs.s_nodes.size(); ++k)
        out.e_F += 0.5 * (fgap[k] + fgap[k + 1]) * (rs.s_nodes[k + 1] - rs.s_nodes[k]);

    out.energy = energy_pairing(sol, erg.m_bar, coupling);
    return out;
}

double fit_loglog_slope(const std::vector<double>& T, const std::vector<double>& e) {
    if (T.size() != e.size() || T.size() < 2)
        throw InvariantError("fit_loglog_slope: need at least two samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(T.size());
    for (std::size_t k = 0; k < T.size(); ++k) {
        const double x = std::log(T[k]);
        const double y = std::log(std::max(e[k], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int resolve_thread_count(int requested, int tasks) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap <= 0)
        cap = 1;
    if (const char* env = std::getenv("ERGOMFG_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0)
            cap = std::min(cap, parsed);
    }
    int t = requested > 0 ? requested : cap;
    return std::max(1, std::min({t, cap, tasks}));
}

RateReport run_sweep(const MFGProblem& problem_template, const std::vector<double>& T_list,
                     double dt, const ErgodicSolution& erg, const DampingRule& damping,
                     double tol_fp, int max_iter, int threads) {
    if (T_list.size() < 3)
        throw InvariantError("run_sweep: need at least 3 horizons for slope fitting, got " +
                             std::to_string(T_list.size()));
    for (std::size_t k = 0; k + 1 < T_list.size(); ++k)
        if (!(T_list[k] < T_list[k + 1]))
            throw InvariantError("run_sweep: T_list must be strictly increasing");

    const std::size_t m = T_list.size();
    std::vector<RateRow> rows(m);
    std::vector<std::string> failures(m);

    // Per-T solves are independent; schedule the longest horizons first.
    std::vector<std::size_t> order(m);
    for (std::size_t k = 0; k < m; ++k)
        order[k] = m - 1 - k;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t q = next.fetch_add(1);
            if (q >= m)
                return;
            const std::size_t idx = order[q];
            const double T = T_list[idx];
            try {
                MFGProblem p = problem_template;
                p.time_grid = TimeGrid(T, std::max(1, static_cast<int>(std::lround(T / dt))));
                MFGSolution sol = solve_mfg(p, damping, tol_fp, max_iter);
                LongTimeErrors err = long_time_errors(sol, erg, p.coupling);
                LipschitzReport lip = lipschitz_report(sol.hj);
                rows[idx] = RateRow{T, err.e_u, err.e_F, err.energy, lip.lip_x, lip.lip_t,
                                    sol.iterations};
            } catch (const std::exception& e) {
                failures[idx] = e.what();
            }
        }
    };
    const int nw = resolve_thread_count(threads, static_cast<int>(m));
    if (nw <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    for (std::size_t k = 0; k < m; ++k)
        if (!failures[k].empty())
            throw Error("run_sweep: solve at T = " + std::to_string(T_list[k]) +
                        " failed: " + failures[k]);

    RateReport rep{};
    rep.rows = rows;
    std::vector<double> eu(m), ef(m);
    for (std::size_t k = 0; k < m; ++k) {
        eu[k] = rows[k].e_u;
        ef[k] = rows[k].e_F;
    }
    std::vector<double> T(T_list);
    rep.fitted_slope_u = fit_loglog_slope(T, eu);
    rep.fitted_slope_F = fit_loglog_slope(T, ef);

    auto sqrtT_ratio_ok = [&](const std::vector<double>& e) {
        double lo = 1e300, hi = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double v = e[k] * std::sqrt(T[k]);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi <= 2.0 * lo;
    };
    rep.verdicts.slope_u_ok = rep.fitted_slope_u <= -0.4;
    rep.verdicts.slope_F_ok = rep.fitted_slope_F <= -0.4;
    rep.verdicts.ratio_u_ok = sqrtT_ratio_ok(eu);
    rep.verdicts.ratio_F_ok = sqrtT_ratio_ok(ef);

    std::vector<double> energy(m);
    for (std::size_t k = 0; k < m; ++k)
        energy[k] = rows[k].energy;
    std::vector<double> sorted(energy);
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[m / 2];
    const double emax = sorted.back();
    bool energy_ok = emax <= 2.0 * median;
    for (double v : energy)
        if (v < -1e-8)
            energy_ok = false;
    rep.verdicts.energy_ok = energy_ok;

    double lip_lo = 1e300, lip_hi = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        lip_lo = std::min(lip_lo, rows[k].lip_x);
        lip_hi = std::max(lip_hi, rows[k].lip_x);
    }
    rep.verdicts.lipschitz_ok = lip_lo > 0.0 && (lip_hi - lip_lo) / lip_lo < 0.20;
    return rep;
}

} // namespace ergmfg
