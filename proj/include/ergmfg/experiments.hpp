#pragma once

#include <vector>

#include "ergmfg/ergodic_solver.hpp"
#include "ergmfg/mfg_solver.hpp"

namespace ergmfg {

/// Rescaled view of a finite-horizon solution: s = t/T on [0,1], no
/// interpolation (s-nodes are the time nodes divided by T).
struct RescaledSolution {
    std::vector<double> s_nodes;
    const std::vector<GridField>* v;    // value snapshots, v(s_k) = u(t_k)
    const std::vector<GridMeasure>* nu; // measure snapshots
    double horizon;
};

RescaledSolution rescale(const MFGSolution& sol);

struct LongTimeErrors {
    double e_u;    // sup_s |v(s,.)/T - lambda_drift (1-s)|_inf
    double e_F;    // integral_0^1 |F(.,nu(s)) - F(.,m_bar)|_inf ds
    double energy; // energy_pairing against m_bar (real-time integral)
};

/// Distance of a finite-horizon solution from the ergodic regime. The
/// value-function drift rate is the negative of the reported ergodic
/// constant (see WeakKamResult).
LongTimeErrors long_time_errors(const MFGSolution& sol, const ErgodicSolution& erg,
                                const CouplingSpec& coupling);

struct RateRow {
    double T;
    double e_u;
    double e_F;
    double energy;
    double lip_x;
    double lip_t;
    int iterations;
};

struct RateVerdicts {
    bool slope_u_ok;    // fitted log-log slope of e_u <= -0.4
    bool ratio_u_ok;    // max e_u sqrt(T) <= 2 min e_u sqrt(T)
    bool slope_F_ok;
    bool ratio_F_ok;
    bool energy_ok;     // max <= 2 median and every entry >= -1e-8
    bool lipschitz_ok;  // lip_x relative spread < 20%
    bool all() const {
        return slope_u_ok && ratio_u_ok && slope_F_ok && ratio_F_ok && energy_ok && lipschitz_ok;
    }
};

struct RateReport {
    std::vector<RateRow> rows;
    double fitted_slope_u;
    double fitted_slope_F;
    RateVerdicts verdicts;
};

/// Least-squares slope of log(e) against log(T).
double fit_loglog_slope(const std::vector<double>& T, const std::vector<double>& e);

/// Horizon sweep: per T, solve the coupled system on the template problem
/// (same data, N_t = T/dt), compare against the ergodic solution, fit the
/// decay slopes, and evaluate the verdicts. Per-T solves run concurrently
/// up to `threads` workers (<=0 picks a default capped by ERGOMFG_THREADS).
RateReport run_sweep(const MFGProblem& problem_template, const std::vector<double>& T_list,
                     double dt, const ErgodicSolution& erg, const DampingRule& damping,
                     double tol_fp, int max_iter, int threads = 0);

/// Worker-count default: hardware concurrency capped by the
/// ERGOMFG_THREADS environment variable (when set) and by `tasks`.
int resolve_thread_count(int requested, int tasks);

} // namespace ergmfg
