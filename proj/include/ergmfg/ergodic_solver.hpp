#pragma once

#include <optional>
#include <vector>

#include "ergmfg/mfg_solver.hpp"

namespace ergmfg {

struct ErgodicConfig {
    double dt_erg = 0.1;      // step of the normalized value iteration
    double tol_lambda = 1e-4; // Cesaro-lambda stabilization tolerance
    int cesaro_window = 64;   // M
    double t_avg = 40.0;      // flow-averaging horizon for the measure
    double theta_erg = 0.5;   // outer damping, in (0, 1]
    double tol_outer = 1e-4;  // sup-norm tolerance on F(., m_bar)
    int max_outer = 60;
    long max_kam_iter = 200000;
    double v_max = 0.0; // 0 = auto
    double dv = 0.0;    // 0 = auto
    TransportScheme scheme{};

    void validate() const;
};

struct WeakKamResult {
    /// Ergodic constant, reported with the quadratic-formula sign
    /// convention lambda = -min(V + f) (the negative of the mean drift
    /// rate of the normalized value iteration -- the stationary equation
    /// reads -lambda + H(x, Du) = f with this convention).
    double lambda = 0.0;
    GridField u_bar;
    std::vector<double> lambda_history; // Cesaro lambda per iteration
    long iterations = 0;
};

/// Normalized Lax-Oleinik value iteration for the cell problem with a
/// frozen coupling field f: iterate w <- step(w, f), record the mean
/// shift, renormalize to mean zero, and Cesaro-average both the shifts
/// (lambda) and the iterates (u_bar) over the trailing window.
WeakKamResult weak_kam_iterate(const GridField& f, const HamiltonianSpec& spec,
                               const ErgodicConfig& cfg);

struct ErgodicMeasureResult {
    GridMeasure m_bar;
    double stationarity_residual; // weak-form residual on a Fourier dictionary
    long substeps = 0;
};

/// Long-run flow average: transport the uniform measure with the drift
/// -D_pH(., D u_bar) over [0, t_avg] and average over [t_avg/2, t_avg].
ErgodicMeasureResult ergodic_measure(const GridField& u_bar, const HamiltonianSpec& spec,
                                     const ErgodicConfig& cfg);

struct ErgodicDiagnostics {
    double hj_residual_on_support = 0.0;
    double stationarity_residual = 0.0;
    std::vector<double> lambda_history;
    std::vector<double> outer_residuals;
    int outer_iterations = 0;
};

struct ErgodicSolution {
    double lambda = 0.0; // same sign convention as WeakKamResult
    GridField u_bar;
    GridMeasure m_bar;
    ErgodicDiagnostics diagnostics;
};

/// Outer damped fixed point on the coupling field:
///   m^{j+1} = (1-theta) m^j + theta flow_average(weak_kam(F(., m^j)).u_bar),
/// stopping when |F(., m^{j+1}) - F(., m^j)|_inf < tol_outer; the final
/// (lambda, u_bar) comes from one more weak-KAM pass on the converged field.
ErgodicSolution solve_ergodic(const HamiltonianSpec& hamiltonian, const CouplingSpec& coupling,
                              const ErgodicConfig& cfg,
                              std::optional<GridMeasure> initial = std::nullopt);

struct QuadraticOracle {
    double lambda; // -min over nodes of (V + f)
    std::vector<std::size_t> argmin_cells;
};

/// Closed form for unit stiffness: lambda = -min_x (V(x) + f(x)) and the
/// argmin set (nodes within 1e-9 of the minimum).
QuadraticOracle lambda_quadratic_oracle(const GridField& V, const GridField& f);

/// Max over cells holding at least 1e-3 h^d mass of
/// |(-lambda) + H(x, D_num u_bar) - f(x)| (central differences).
double hj_residual_on_support(double lambda, const GridField& u_bar, const GridMeasure& m_bar,
                              const GridField& f, const HamiltonianSpec& spec);

} // namespace ergmfg
