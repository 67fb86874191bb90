#include "ergmfg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace ergmfg {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open output file: " + path);
    return out;
}

void node_coords(const TorusGrid& g, std::size_t k, std::string& out) {
    if (g.dim() == 1) {
        out = format_double(g.coord(static_cast<int>(k)));
    } else {
        out = format_double(g.coord(static_cast<int>(k) / g.n())) + "," +
              format_double(g.coord(static_cast<int>(k) % g.n()));
    }
}

} // namespace

void write_measure_csv(const std::string& path, const GridMeasure& m, const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash=" << hash << "\n";
    out << (m.grid().dim() == 1 ? "node,x,density\n" : "node,x,y,density\n");
    std::string coords;
    for (std::size_t k = 0; k < m.grid().size(); ++k) {
        node_coords(m.grid(), k, coords);
        out << k << "," << coords << "," << format_double(m[k]) << "\n";
    }
}

void write_path_csv(const std::string& path, const MeasurePath& mp, const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash=" << hash << "\n";
    out << "time,node,density\n";
    for (std::size_t t = 0; t < mp.size(); ++t)
        for (std::size_t k = 0; k < mp.grid().size(); ++k)
            out << format_double(mp.times()[t]) << "," << k << ","
                << format_double(mp.at(t)[k]) << "\n";
}

void write_hj_csv(const std::string& path, const HJSolution& hj, const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash=" << hash << "\n";
    const TorusGrid& g = hj.u.front().grid();
    out << (g.dim() == 1 ? "time,node,u,v\n" : "time,node,u,vx,vy\n");
    for (int t = 0; t < hj.time_grid.nodes(); ++t)
        for (std::size_t k = 0; k < g.size(); ++k) {
            out << format_double(hj.time_grid.time(t)) << "," << k << ","
                << format_double(hj.u[t][k]) << "," << format_double(hj.feedback[t].comp(0, k));
            if (g.dim() == 2)
                out << "," << format_double(hj.feedback[t].comp(1, k));
            out << "\n";
        }
}

void write_residuals_csv(const std::string& path, const std::vector<double>& residuals,
                         const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash=" << hash << "\n";
    out << "iteration,residual\n";
    for (std::size_t k = 0; k < residuals.size(); ++k)
        out << (k + 1) << "," << format_double(residuals[k]) << "\n";
}

void write_rate_report_csv(const std::string& path, const RateReport& rep,
                           const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash=" << hash << "\n";
    out << "T,e_u,e_F,energy,lip_x,lip_t,iterations\n";
    for (const RateRow& r : rep.rows)
        out << format_double(r.T) << "," << format_double(r.e_u) << "," << format_double(r.e_F)
            << "," << format_double(r.energy) << "," << format_double(r.lip_x) << ","
            << format_double(r.lip_t) << "," << r.iterations << "\n";
}

void write_gnuplot_loglog(const std::string& path, const std::vector<double>& T,
                          const std::vector<double>& e, const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash=" << hash << "\n";
    for (std::size_t k = 0; k < T.size(); ++k)
        out << format_double(std::log(T[k])) << " " << format_double(std::log(e[k])) << "\n";
}

void write_viscous_csv(const std::string& path, const std::vector<ViscousSweepRow>& rows,
                       const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash=" << hash << "\n";
    out << "epsilon,sup_gap_u,d1_gap_m\n";
    for (const ViscousSweepRow& r : rows)
        out << format_double(r.epsilon) << "," << format_double(r.sup_gap_u) << ","
            << format_double(r.d1_gap_m_at_T) << "\n";
}

std::string ergodic_solution_json(const ErgodicSolution& sol, double oracle_lambda,
                                  const std::string& hash) {
    ordered_json j;
    j["config_hash"] = hash;
    j["kind"] = "ergodic_solution";
    j["lambda"] = sol.lambda;
    j["oracle_lambda"] = oracle_lambda;
    j["oracle_gap"] = std::abs(sol.lambda - oracle_lambda);
    j["u_bar"] = sol.u_bar.values();
    j["m_bar"] = sol.m_bar.density();
    j["diagnostics"] = {
        {"hj_residual_on_support", sol.diagnostics.hj_residual_on_support},
        {"stationarity_residual", sol.diagnostics.stationarity_residual},
        {"outer_iterations", sol.diagnostics.outer_iterations},
        {"outer_residuals", sol.diagnostics.outer_residuals},
        {"lambda_history_tail",
         std::vector<double>(
             sol.diagnostics.lambda_history.end() -
                 std::min<std::size_t>(16, sol.diagnostics.lambda_history.size()),
             sol.diagnostics.lambda_history.end())},
    };
    return j.dump(2) + "\n";
}

std::string mfg_solution_json(const MFGSolution& sol, const std::string& hash) {
    ordered_json j;
    j["config_hash"] = hash;
    j["kind"] = "mfg_solution";
    j["iterations"] = sol.iterations;
    j["final_residual"] = sol.residual_history.empty() ? 0.0 : sol.residual_history.back();
    j["horizon"] = sol.hj.time_grid.horizon;
    j["time_steps"] = sol.hj.time_grid.steps;
    j["u0"] = sol.hj.u.front().values();
    j["m_final"] = sol.path.measures().back().density();
    j["residual_history"] = sol.residual_history;
    return j.dump(2) + "\n";
}

std::string rate_report_json(const RateReport& rep, const std::string& hash) {
    ordered_json j;
    j["config_hash"] = hash;
    j["kind"] = "rate_report";
    j["fitted_slope_u"] = rep.fitted_slope_u;
    j["fitted_slope_F"] = rep.fitted_slope_F;
    ordered_json rows = ordered_json::array();
    for (const RateRow& r : rep.rows)
        rows.push_back({{"T", r.T},
                        {"e_u", r.e_u},
                        {"e_F", r.e_F},
                        {"energy", r.energy},
                        {"lip_x", r.lip_x},
                        {"lip_t", r.lip_t},
                        {"iterations", r.iterations}});
    j["rows"] = rows;
    j["verdicts"] = {{"slope_u_ok", rep.verdicts.slope_u_ok},
                     {"ratio_u_ok", rep.verdicts.ratio_u_ok},
                     {"slope_F_ok", rep.verdicts.slope_F_ok},
                     {"ratio_F_ok", rep.verdicts.ratio_F_ok},
                     {"energy_ok", rep.verdicts.energy_ok},
                     {"lipschitz_ok", rep.verdicts.lipschitz_ok},
                     {"all", rep.verdicts.all()}};
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
}

std::string error_json(const std::string& kind, const std::string& message) {
    ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    return j.dump() + "\n";
}

} // namespace ergmfg
