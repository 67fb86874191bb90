// Command-line front end: finite-horizon and ergodic solves, the
// long-time-average experiment, the coercivity audit, and the
// vanishing-viscosity comparison. Exit codes: 0 success, 1 usage/config
// error, 2 solver non-convergence, 3 failed verdicts/audit.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ergmfg/config.hpp"
#include "ergmfg/io.hpp"

namespace fs = std::filesystem;
using namespace ergmfg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitVerdictFailed = 3;

fs::path ensure_output_dir(const RunConfig& cfg) {
    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    return dir;
}

GridMeasure random_measure(const TorusGrid& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.05, 1.0);
    std::vector<double> raw(grid.size());
    for (double& v : raw)
        v = uni(rng);
    return GridMeasure::normalized(grid, std::move(raw));
}

int cmd_solve_mfg(const RunConfig& cfg) {
    const fs::path dir = ensure_output_dir(cfg);
    MFGProblem problem = cfg.build_problem();
    try {
        MFGSolution sol = solve_mfg(problem, cfg.build_damping(), cfg.tol_fp, cfg.max_iter);
        write_text_file((dir / "mfg_solution.json").string(),
                        mfg_solution_json(sol, cfg.config_hash));
        write_residuals_csv((dir / "mfg_residuals.csv").string(), sol.residual_history,
                            cfg.config_hash);
        write_hj_csv((dir / "mfg_value.csv").string(), sol.hj, cfg.config_hash);
        write_path_csv((dir / "mfg_measure_path.csv").string(), sol.path, cfg.config_hash);
        std::cout << "converged in " << sol.iterations << " iterations; final residual "
                  << sol.residual_history.back() << "\n";
        return kExitOk;
    } catch (const NonConvergenceError& e) {
        write_residuals_csv((dir / "mfg_residuals.csv").string(), e.residual_history,
                            cfg.config_hash);
        std::cerr << error_json("non_convergence", e.what());
        return kExitNoConvergence;
    }
}

int cmd_solve_ergodic(const RunConfig& cfg) {
    const fs::path dir = ensure_output_dir(cfg);
    HamiltonianSpec ham = cfg.build_hamiltonian();
    CouplingSpec coupling = cfg.build_coupling();
    try {
        ErgodicSolution sol = solve_ergodic(ham, coupling, cfg.build_ergodic_config());
        const GridField f_bar = coupling_eval(coupling, sol.m_bar);
        const QuadraticOracle oracle = lambda_quadratic_oracle(ham.potential, f_bar);
        write_text_file((dir / "ergodic_solution.json").string(),
                        ergodic_solution_json(sol, oracle.lambda, cfg.config_hash));
        write_measure_csv((dir / "ergodic_measure.csv").string(), sol.m_bar, cfg.config_hash);
        std::cout << "lambda = " << sol.lambda << "\n";
        if (ham.is_unit_stiffness())
            std::cout << "quadratic oracle -min(V+F) = " << oracle.lambda << ", |gap| = "
                      << std::abs(sol.lambda - oracle.lambda) << "\n";
        return kExitOk;
    } catch (const NonConvergenceError& e) {
        std::cerr << error_json("non_convergence", e.what());
        return kExitNoConvergence;
    }
}

int cmd_long_time(const RunConfig& cfg) {
    const fs::path dir = ensure_output_dir(cfg);
    if (cfg.T_list.size() < 3) {
        std::cerr << error_json("config", "long-time requires time.T_list with at least 3 horizons");
        return kExitUsage;
    }
    HamiltonianSpec ham = cfg.build_hamiltonian();
    CouplingSpec coupling = cfg.build_coupling();
    try {
        ErgodicSolution erg = solve_ergodic(ham, coupling, cfg.build_ergodic_config());
        MFGProblem tmpl = cfg.build_problem();
        RateReport rep = run_sweep(tmpl, cfg.T_list, cfg.dt, erg, cfg.build_damping(), cfg.tol_fp,
                                   cfg.max_iter);
        write_rate_report_csv((dir / "rate_report.csv").string(), rep, cfg.config_hash);
        write_text_file((dir / "rate_report.json").string(),
                        rate_report_json(rep, cfg.config_hash));
        std::vector<double> T, eu, ef;
        for (const RateRow& r : rep.rows) {
            T.push_back(r.T);
            eu.push_back(r.e_u);
            ef.push_back(r.e_F);
        }
        write_gnuplot_loglog((dir / "rate_u.dat").string(), T, eu, cfg.config_hash);
        write_gnuplot_loglog((dir / "rate_F.dat").string(), T, ef, cfg.config_hash);
        std::cout << "slope_u = " << rep.fitted_slope_u << ", slope_F = " << rep.fitted_slope_F
                  << ", verdicts " << (rep.verdicts.all() ? "all true" : "FAILED") << "\n";
        return rep.verdicts.all() ? kExitOk : kExitVerdictFailed;
    } catch (const NonConvergenceError& e) {
        std::cerr << error_json("non_convergence", e.what());
        return kExitNoConvergence;
    }
}

int cmd_check_coercivity(const RunConfig& cfg, int samples) {
    CouplingSpec coupling = cfg.build_coupling();
    if (coupling.is_zero()) {
        std::cerr << error_json("config", "check-coercivity needs a non-zero coupling family");
        return kExitUsage;
    }
    const TorusGrid grid = cfg.build_grid();
    std::mt19937_64 rng(cfg.seed);
    const double cbar = coupling.coercivity_constant();
    double min_ratio = std::numeric_limits<double>::infinity();
    double min_lhs = std::numeric_limits<double>::infinity();
    bool all_pass = true;
    for (int s = 0; s < samples; ++s) {
        GridMeasure m1 = random_measure(grid, rng);
        GridMeasure m2 = random_measure(grid, rng);
        CoercivityReport rep = coercivity_check(coupling, m1, m2);
        min_lhs = std::min(min_lhs, rep.lhs);
        if (rep.rhs_l2sq > 1e-12)
            min_ratio = std::min(min_ratio, rep.ratio);
        all_pass = all_pass && rep.passes && rep.lhs >= -1e-10;
    }
    std::cout << "samples = " << samples << ", c_bar = " << cbar << ", min ratio = " << min_ratio
              << ", min lhs = " << min_lhs << (all_pass ? " (all pass)" : " (FAILED)") << "\n";
    return all_pass ? kExitOk : kExitVerdictFailed;
}

int cmd_viscous_compare(const RunConfig& cfg, const std::vector<double>& eps_list) {
    const fs::path dir = ensure_output_dir(cfg);
    MFGProblem problem = cfg.build_problem();
    try {
        std::vector<ViscousSweepRow> rows =
            viscous_mfg_sweep(problem, eps_list, cfg.build_damping(), cfg.tol_fp, cfg.max_iter);
        write_viscous_csv((dir / "viscous_sweep.csv").string(), rows, cfg.config_hash);
        bool monotone = true;
        for (std::size_t k = 0; k + 1 < rows.size(); ++k)
            if (rows[k + 1].sup_gap_u > rows[k].sup_gap_u * 1.1)
                monotone = false;
        for (const ViscousSweepRow& r : rows)
            std::cout << "eps = " << r.epsilon << ": sup_gap_u = " << r.sup_gap_u
                      << ", d1_gap_m = " << r.d1_gap_m_at_T << "\n";
        std::cout << (monotone ? "gaps monotone within slack" : "gap monotonicity FAILED") << "\n";
        return monotone ? kExitOk : kExitVerdictFailed;
    } catch (const NonConvergenceError& e) {
        std::cerr << error_json("non_convergence", e.what());
        return kExitNoConvergence;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"First-order mean field game solver suite on the flat torus"};
    app.require_subcommand(1);

    std::string config_path;
    int samples = 200;
    std::string eps_csv = "0.1,0.05,0.025,0.0125";

    auto* solve_mfg_cmd = app.add_subcommand("solve-mfg", "Finite-horizon coupled solve");
    solve_mfg_cmd->add_option("config", config_path, "config file")->required();
    auto* solve_erg_cmd = app.add_subcommand("solve-ergodic", "Ergodic system solve");
    solve_erg_cmd->add_option("config", config_path, "config file")->required();
    auto* long_time_cmd = app.add_subcommand("long-time", "Horizon sweep and rate report");
    long_time_cmd->add_option("config", config_path, "config file")->required();
    auto* coer_cmd = app.add_subcommand("check-coercivity", "Randomized coercivity audit");
    coer_cmd->add_option("config", config_path, "config file")->required();
    coer_cmd->add_option("--samples", samples, "number of random measure pairs")
        ->check(CLI::PositiveNumber);
    auto* visc_cmd = app.add_subcommand("viscous-compare", "Vanishing-viscosity sweep");
    visc_cmd->add_option("config", config_path, "config file")->required();
    visc_cmd->add_option("--eps", eps_csv, "comma-separated decreasing diffusion list");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e); // prints usage; nonzero on bad flags
    }

    try {
        RunConfig cfg = parse_config(config_path);
        if (solve_mfg_cmd->parsed())
            return cmd_solve_mfg(cfg);
        if (solve_erg_cmd->parsed())
            return cmd_solve_ergodic(cfg);
        if (long_time_cmd->parsed())
            return cmd_long_time(cfg);
        if (coer_cmd->parsed())
            return cmd_check_coercivity(cfg, samples);
        if (visc_cmd->parsed()) {
            std::vector<double> eps_list;
            std::stringstream ss(eps_csv);
            std::string tok;
            while (std::getline(ss, tok, ','))
                eps_list.push_back(std::stod(tok));
            return cmd_viscous_compare(cfg, eps_list);
        }
    } catch (const ConfigError& e) {
        std::cerr << error_json("config", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << error_json("runtime", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
