#pragma once

#include <vector>

#include "ergmfg/model.hpp"
#include "ergmfg/torus.hpp"

namespace ergmfg {

/// Uniform time grid on [0, horizon] with `steps` intervals.
struct TimeGrid {
    TimeGrid(double horizon_, int steps_) : horizon(horizon_), steps(steps_) {
        if (!(horizon > 0.0) || steps < 1)
            throw InvariantError("TimeGrid: need horizon > 0 and steps >= 1");
    }
    double horizon;
    int steps;
    double dt() const { return horizon / steps; }
    double time(int k) const { return k * dt(); }
    int nodes() const { return steps + 1; }
};

struct LaxOleinikStep {
    GridField u;          // value at the earlier time
    VectorField feedback; // minimizing velocity per node
};

/// One backward dynamic-programming step for -du/dt + H(x,Du) = f:
///   u_now(x) = min_v { dt (L(x,v) + f(x)) + Interp[u_next](x + dt v) },
/// v running over the uniform grid of step dv inside [-v_max, v_max]^d.
/// Monotone in u_next and commutes with adding constants. Throws
/// VelocityBoxError if any argmin lands on the box boundary (the a-priori
/// Lipschitz bound was under-estimated). v_max == 0 freezes v = 0, a
/// diagnostic mode used by the diffusion tests.
LaxOleinikStep lax_oleinik_step(const GridField& u_next, const GridField& f_now,
                                const HamiltonianSpec& spec, double dt, double v_max,
                                double dv);

struct HJSolution {
    TimeGrid time_grid;
    std::vector<GridField> u;           // one per time node, u[steps] = terminal data
    std::vector<VectorField> feedback;  // argmin velocity; feedback[steps] copies steps-1
};

/// Backward sweep from u(T) = u_f with source f(t_k, .) evaluated at the
/// earlier node of each step (rectangle rule).
HJSolution solve_backward(const GridField& u_f, const std::vector<GridField>& source,
                          const HamiltonianSpec& spec, const TimeGrid& tg, double v_max,
                          double dv);

struct LipschitzReport {
    double lip_x;            // max one-sided space difference quotient over all times
    double lip_t;            // max time difference quotient over all nodes
    double max_second_diff;  // semiconcavity diagnostic: max |second difference|/h^2
};

LipschitzReport lipschitz_report(const HJSolution& sol);

/// Default velocity box half-width:
///   C_bar (|Du_f|_inf + 2 sqrt(f_sup C_bar + osc V) + 1).
double default_velocity_box(const HamiltonianSpec& spec, const GridField& u_f, double f_sup);

/// Default velocity grid step: h/(2 dt) capped at 0.05.
double default_velocity_step(double h, double dt);

} // namespace ergmfg
