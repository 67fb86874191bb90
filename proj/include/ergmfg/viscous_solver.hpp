#pragma once

#include <vector>

#include "ergmfg/mfg_solver.hpp"

namespace ergmfg {

struct ViscousProblem {
    ViscousProblem(MFGProblem base_, double epsilon_) : base(std::move(base_)), epsilon(epsilon_) {
        if (!(epsilon > 0.0))
            throw InvariantError("ViscousProblem: epsilon must be > 0");
    }
    MFGProblem base;
    double epsilon;
};

/// Backward IMEX sweep for -du/dt - eps Lap u + H(x,Du) = f: the
/// Hamiltonian part is the same explicit semi-Lagrangian step, the
/// diffusion is an implicit periodic solve (unconditional stability, so
/// one time grid serves every eps). Constant commutation still holds.
HJSolution solve_viscous_hj(const GridField& u_f, const std::vector<GridField>& source,
                            const HamiltonianSpec& spec, const TimeGrid& tg, double epsilon,
                            double v_max, double dv);

/// Forward IMEX sweep for dm/dt - eps Lap m + div(m b) = 0: explicit
/// conservative upwind drift (CFL by sub-stepping) followed by the
/// implicit diffusion solve. Conserves mass exactly and keeps m >= 0.
MeasurePath solve_viscous_fp(const GridMeasure& m0, const std::vector<VectorField>& drift,
                             const TimeGrid& tg, double epsilon, const TransportScheme& scheme);

/// Coupled solve with the same fixed-point loop as solve_mfg, with the
/// viscous sub-solvers substituted.
MFGSolution solve_viscous_mfg(const ViscousProblem& problem, const DampingRule& damping,
                              double tol_fp, int max_iter);

struct ViscousSweepRow {
    double epsilon;
    double sup_gap_u;     // sup_x |u_eps(0,.) - u(0,.)|
    double d1_gap_m_at_T; // d1(m_eps(T), m(T))
};

/// Solves the coupled viscous system per epsilon and reports the gaps
/// against the first-order solution of the same problem.
std::vector<ViscousSweepRow> viscous_mfg_sweep(const MFGProblem& problem,
                                               const std::vector<double>& eps_list,
                                               const DampingRule& damping, double tol_fp,
                                               int max_iter);

/// Solves (I - c Lap_h) u = rhs on the periodic grid (Sherman-Morrison
/// tridiagonal in 1D, factored per-axis solves in 2D). Exposed for the
/// diffusion unit tests.
GridField implicit_diffusion_solve(const GridField& rhs, double c);

} // namespace ergmfg
