#pragma once

#include <vector>

#include "ergmfg/hj_solver.hpp"
#include "ergmfg/measures.hpp"
#include "ergmfg/model.hpp"
#include "ergmfg/transport_solver.hpp"

namespace ergmfg {

/// Finite-horizon coupled problem data: the Hamiltonian, the coupling,
/// the initial density m0, the terminal value u_f, and the time grid.
struct MFGProblem {
    MFGProblem(HamiltonianSpec hamiltonian_, CouplingSpec coupling_, GridMeasure m0_,
               GridField u_f_, TimeGrid time_grid_);

    HamiltonianSpec hamiltonian;
    CouplingSpec coupling;
    GridMeasure m0;
    GridField u_f;
    TimeGrid time_grid;

    TransportScheme scheme{};
    /// 0 = derive from default_velocity_box / default_velocity_step.
    double v_max = 0.0;
    double dv = 0.0;

    const TorusGrid& grid() const { return m0.grid(); }
    double effective_v_max() const;
    double effective_dv() const;
};

struct MFGSolution {
    HJSolution hj;
    MeasurePath path;
    std::vector<double> residual_history;
    int iterations = 0;
    /// sup_t |F(., BR(m))(t) - F(., m)(t)| at the last iterate, scaled
    /// residual bound for the unmixed best response.
    double final_residual = 0.0;
};

struct BestResponse {
    HJSolution hj;
    MeasurePath path;
};

/// Freeze the coupling along m_path, solve the backward equation, then
/// re-transport m0 forward with the resulting feedback drift.
BestResponse best_response(const MFGProblem& problem, const MeasurePath& m_path);

enum class DampingMode { fictitious_play, fixed };

struct DampingRule {
    DampingMode mode = DampingMode::fictitious_play;
    double theta = 0.5; // used by DampingMode::fixed; must lie in (0, 1]
};

/// Damped fixed point m^{k+1} = (1-theta_k) m^k + theta_k BR(m^k) with
/// theta_k = 1/(k+1) (fictitious play) or fixed theta. Terminates when
///   sup_t |F(., m^{k+1}(t)) - F(., m^k(t))|_inf < tol_fp,
/// then re-solves the backward equation once against the converged path.
/// Throws NonConvergenceError (with the residual history) at max_iter.
MFGSolution solve_mfg(const MFGProblem& problem, const DampingRule& damping, double tol_fp,
                      int max_iter);

/// Time integral (trapezoid, real time) of
///   integral (F(., m(t)) - F(., ref)) d(m(t) - ref).
/// Nonnegative up to roundoff for monotone couplings.
double energy_pairing(const MFGSolution& sol, const GridMeasure& reference,
                      const CouplingSpec& coupling);

/// Coupling field along a path: out[k] = F(., m(t_k)).
std::vector<GridField> coupling_along_path(const CouplingSpec& coupling, const MeasurePath& path);

/// Transport drift from an HJ solution per the scheme convention:
/// upwind_fv uses b = -a(x) D_num u with the one-sided gradient selected
/// by the feedback direction; sl_pushforward uses the argmin velocity
/// itself (they agree up to O(h + dv)).
std::vector<VectorField> drift_from_feedback(const HJSolution& hj, const HamiltonianSpec& spec,
                                             TransportMode mode);

} // namespace ergmfg
