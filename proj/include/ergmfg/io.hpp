#pragma once

#include <string>
#include <vector>

#include "ergmfg/ergodic_solver.hpp"
#include "ergmfg/experiments.hpp"
#include "ergmfg/mfg_solver.hpp"
#include "ergmfg/viscous_solver.hpp"

namespace ergmfg {

/// All CSV files are RFC-4180 with '.' decimals and open with a comment
/// line `# config_hash=<hex>`; JSON files carry the hash as a field and
/// keep insertion key order. Numbers print with %.17g so identical runs
/// produce byte-identical files.

void write_measure_csv(const std::string& path, const GridMeasure& m, const std::string& hash);
void write_path_csv(const std::string& path, const MeasurePath& mp, const std::string& hash);
void write_hj_csv(const std::string& path, const HJSolution& hj, const std::string& hash);
void write_residuals_csv(const std::string& path, const std::vector<double>& residuals,
                         const std::string& hash);
void write_rate_report_csv(const std::string& path, const RateReport& rep, const std::string& hash);
void write_gnuplot_loglog(const std::string& path, const std::vector<double>& T,
                          const std::vector<double>& e, const std::string& hash);
void write_viscous_csv(const std::string& path, const std::vector<ViscousSweepRow>& rows,
                       const std::string& hash);

std::string ergodic_solution_json(const ErgodicSolution& sol, double oracle_lambda,
                                  const std::string& hash);
std::string mfg_solution_json(const MFGSolution& sol, const std::string& hash);
std::string rate_report_json(const RateReport& rep, const std::string& hash);

void write_text_file(const std::string& path, const std::string& content);

/// Machine-readable error blob for stderr.
std::string error_json(const std::string& kind, const std::string& message);

std::string format_double(double v);

} // namespace ergmfg
