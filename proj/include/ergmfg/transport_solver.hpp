#pragma once

#include <vector>

#include "ergmfg/hj_solver.hpp"
#include "ergmfg/measures.hpp"

namespace ergmfg {

enum class TransportMode { upwind_fv, sl_pushforward };

struct TransportScheme {
    TransportMode mode = TransportMode::upwind_fv;
    double cfl_safety = 0.9; // in (0, 1]
};

/// One conservative step of the continuity equation dm/dt + div(m b) = 0.
/// upwind_fv: donor-cell fluxes with face velocities averaged from the
/// nodes, dimension-split in 2D (x then y, order swapped on odd steps).
/// sl_pushforward: each cell's mass moves to x + dt b(x) and is deposited
/// with multilinear weights. Both conserve mass exactly and keep m >= 0;
/// upwind_fv requires the CFL condition and throws CflError (carrying the
/// admissible dt) when violated.
GridMeasure transport_step(const GridMeasure& m, const VectorField& b, double dt,
                           const TransportScheme& scheme, int step_parity = 0);

/// Forward sweep m(0) = m0 with the drift at the earlier node of each step.
/// CFL violations are handled by integer sub-stepping, not by erroring; the
/// total sub-step count is reported through `substeps_used` when non-null.
MeasurePath solve_forward(const GridMeasure& m0, const std::vector<VectorField>& drift,
                          const TimeGrid& tg, const TransportScheme& scheme,
                          long* substeps_used = nullptr);

struct W1LipschitzReport {
    double max_ratio; // max over snapshot pairs of d1(m(t1), m(t2)) / |t2 - t1|
    double bound;     // b_sup * 1.1 + slack
    double slack;     // scheme consistency slack, 0.5 h / dt
    bool passes;
};

/// Checks the d1-Lipschitz property of a 1D path against |b|_inf. The
/// slack term 0.5 h/dt covers the per-step deposit/face-average smearing
/// of both schemes.
W1LipschitzReport wasserstein_lipschitz_check(const MeasurePath& path, double b_sup);

} // namespace ergmfg
