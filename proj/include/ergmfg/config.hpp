#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ergmfg/ergodic_solver.hpp"
#include "ergmfg/mfg_solver.hpp"

namespace ergmfg {

/// Finite Fourier sum: const + sum_k A_k cos(2 pi k . x + phi_k).
/// Terms are [A, k, phi] in 1D and [A, kx, ky, phi] in 2D; the wave
/// numbers are integers so the rendered field is exactly periodic.
struct FourierSpec {
    struct Term {
        double amplitude;
        int kx;
        int ky; // ignored in 1D
        double phase;
    };
    double constant = 0.0;
    std::vector<Term> terms;

    GridField render(const TorusGrid& grid) const;
    bool empty() const { return terms.empty() && constant == 0.0; }
};

/// Parsed, validated run configuration (sectioned key = value file,
/// TOML-compatible syntax). Unknown keys are rejected at parse time.
struct RunConfig {
    // [grid]
    int dim = 1;
    int n = 128;
    // [time]
    double T = 5.0;
    std::vector<double> T_list; // optional; used by long-time
    double dt = 0.01;
    // [hamiltonian]
    FourierSpec V;
    FourierSpec a; // constant defaults to 1 when left empty
    double C_bar = 1.0;
    // [coupling]
    std::string coupling_family = "linear";
    double kappa = 1.0;
    double sigma = 0.25;
    std::optional<double> c; // absent = derive from the family
    double kernel_radius = 0.15;
    FourierSpec g;
    FourierSpec w;
    // [data]
    FourierSpec m0; // rendered, validated >= 0, then renormalized
    FourierSpec u_f;
    // [solver]
    double tol_fp = 1e-6;
    double tol_lambda = 1e-4;
    double tol_outer = 1e-4;
    int max_iter = 500;
    std::string damping = "fictitious_play"; // or "fixed"
    double theta = 0.5;
    std::string scheme = "upwind_fv"; // or "sl_pushforward"
    double cfl_safety = 0.9;
    double dt_erg = 0.1;
    int cesaro_window = 64;
    double t_avg = 40.0;
    double theta_erg = 0.5;
    int max_outer = 60;
    // top level
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    // Hash of the raw config file bytes, echoed into every output file.
    std::string config_hash;

    TorusGrid build_grid() const;
    HamiltonianSpec build_hamiltonian() const;
    CouplingSpec build_coupling() const;
    /// kernel_radius override used by the multi-radius audits.
    CouplingSpec build_coupling_with_radius(double radius) const;
    GridMeasure build_m0() const;
    GridField build_u_f() const;
    MFGProblem build_problem() const;
    MFGProblem build_problem_with_horizon(double horizon) const;
    ErgodicConfig build_ergodic_config() const;
    DampingRule build_damping() const;
    TransportScheme build_scheme() const;
};

/// Parse and validate; throws ConfigError naming the offending key and
/// constraint (with the line number for syntax errors).
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

} // namespace ergmfg
