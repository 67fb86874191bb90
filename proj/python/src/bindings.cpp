// Python surface: grids, fields, measures, the coupling, both transport
// distances, and the four solver entry points. Arrays cross the boundary
// as flat numpy float64 vectors in node order.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ergmfg/config.hpp"
#include "ergmfg/experiments.hpp"
#include "ergmfg/io.hpp"
#include "ergmfg/viscous_solver.hpp"

namespace py = pybind11;
using namespace ergmfg;

namespace {

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    std::vector<double> out(static_cast<std::size_t>(a.size()));
    std::copy(a.data(), a.data() + a.size(), out.begin());
    return out;
}

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

GridField field_from(const TorusGrid& g, const py::array_t<double>& a) {
    return GridField(g, from_array(a));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Solvers for first-order mean field games on the flat torus";

    py::register_exception<Error>(m, "SolverError");
    py::register_exception<ConfigError>(m, "ConfigurationError");

    py::class_<TorusGrid>(m, "TorusGrid")
        .def(py::init<int, int>(), py::arg("dim"), py::arg("n"))
        .def_property_readonly("dim", &TorusGrid::dim)
        .def_property_readonly("n", &TorusGrid::n)
        .def_property_readonly("h", &TorusGrid::h)
        .def_property_readonly("size", &TorusGrid::size)
        .def("coord", &TorusGrid::coord);

    py::class_<GridField>(m, "GridField")
        .def(py::init([](const TorusGrid& g, py::array_t<double> values) {
                 return field_from(g, values);
             }),
             py::arg("grid"), py::arg("values"))
        .def_static("constant",
                    [](const TorusGrid& g, double value) { return GridField(g, value); })
        .def_property_readonly("grid", &GridField::grid)
        .def("values", [](const GridField& f) { return to_array(f.values()); });

    py::class_<GridMeasure>(m, "GridMeasure")
        .def(py::init([](const TorusGrid& g, py::array_t<double> density) {
                 return GridMeasure(g, from_array(density));
             }),
             py::arg("grid"), py::arg("density"))
        .def_static("uniform", &GridMeasure::uniform)
        .def_static("point_mass", &GridMeasure::point_mass)
        .def_static("normalized",
                    [](const TorusGrid& g, py::array_t<double> raw) {
                        return GridMeasure::normalized(g, from_array(raw));
                    })
        .def_property_readonly("grid", &GridMeasure::grid)
        .def("density", [](const GridMeasure& m) { return to_array(m.density()); })
        .def("mass", &GridMeasure::mass)
        .def("sup_density", &GridMeasure::sup_density);

    py::class_<MollifierKernel>(m, "MollifierKernel")
        .def(py::init<const TorusGrid&, double>(), py::arg("grid"), py::arg("radius"))
        .def_property_readonly("radius", &MollifierKernel::radius)
        .def_property_readonly("l2_norm_sq", &MollifierKernel::l2_norm_sq)
        .def("weights", [](const MollifierKernel& k) { return to_array(k.weights().values()); });

    m.def("convolve", &convolve, py::arg("field"), py::arg("kernel"));
    m.def("interpolate",
          [](const GridField& f, double x, double y) {
              return interpolate(f, std::array<double, 2>{x, y});
          },
          py::arg("field"), py::arg("x"), py::arg("y") = 0.0);
    m.def("wasserstein1", &wasserstein1, py::arg("mu"), py::arg("nu"));
    m.def("wasserstein1_lp", &wasserstein1_lp, py::arg("mu"), py::arg("nu"));
    m.def("pairing", &pairing, py::arg("field"), py::arg("measure"));

    py::class_<HamiltonianSpec>(m, "HamiltonianSpec")
        .def(py::init<GridField, GridField, double>(), py::arg("potential"), py::arg("stiffness"),
             py::arg("c_bar"))
        .def_static("quadratic", &HamiltonianSpec::quadratic, py::arg("potential"),
                    py::arg("c_bar") = 1.0)
        .def_readonly("potential", &HamiltonianSpec::potential)
        .def_readonly("c_bar", &HamiltonianSpec::c_bar);

    py::class_<CouplingSpec>(m, "CouplingSpec")
        .def_static("linear", &CouplingSpec::linear, py::arg("kernel"), py::arg("kappa"),
                    py::arg("g"), py::arg("c") = std::nullopt)
        .def_static("smooth_sine", &CouplingSpec::smooth_sine, py::arg("kernel"), py::arg("sigma"),
                    py::arg("w"), py::arg("c") = std::nullopt)
        .def_static("zero", &CouplingSpec::zero, py::arg("kernel"))
        .def_property_readonly("c", &CouplingSpec::c)
        .def("coercivity_constant", &CouplingSpec::coercivity_constant)
        .def("lipschitz_constant", &CouplingSpec::lipschitz_constant);

    m.def("coupling_eval", &coupling_eval, py::arg("spec"), py::arg("measure"));

    py::class_<CoercivityReport>(m, "CoercivityReport")
        .def_readonly("lhs", &CoercivityReport::lhs)
        .def_readonly("rhs_l2sq", &CoercivityReport::rhs_l2sq)
        .def_readonly("ratio", &CoercivityReport::ratio)
        .def_readonly("passes", &CoercivityReport::passes);
    m.def("coercivity_check", &coercivity_check, py::arg("spec"), py::arg("m1"), py::arg("m2"));

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, int>(), py::arg("horizon"), py::arg("steps"))
        .def_readonly("horizon", &TimeGrid::horizon)
        .def_readonly("steps", &TimeGrid::steps)
        .def_property_readonly("dt", &TimeGrid::dt);

    py::class_<HJSolution>(m, "HJSolution")
        .def_property_readonly("times",
                               [](const HJSolution& s) {
                                   std::vector<double> t(s.time_grid.nodes());
                                   for (int k = 0; k < s.time_grid.nodes(); ++k)
                                       t[k] = s.time_grid.time(k);
                                   return to_array(t);
                               })
        .def("u", [](const HJSolution& s, int k) { return to_array(s.u.at(k).values()); })
        .def("feedback",
             [](const HJSolution& s, int k, int axis) {
                 return to_array(s.feedback.at(k).component(axis));
             },
             py::arg("k"), py::arg("axis") = 0);

    py::class_<MeasurePath>(m, "MeasurePath")
        .def_property_readonly("times", [](const MeasurePath& p) { return to_array(p.times()); })
        .def("measure", [](const MeasurePath& p, std::size_t k) { return p.at(k); })
        .def("__len__", &MeasurePath::size);

    m.def(
        "solve_backward",
        [](const GridField& u_f, const std::vector<GridField>& source, const HamiltonianSpec& spec,
           const TimeGrid& tg, double v_max, double dv) {
            if (v_max <= 0.0)
                v_max = default_velocity_box(spec, u_f, 0.0);
            if (dv <= 0.0)
                dv = default_velocity_step(u_f.grid().h(), tg.dt());
            return solve_backward(u_f, source, spec, tg, v_max, dv);
        },
        py::arg("u_f"), py::arg("source"), py::arg("spec"), py::arg("time_grid"),
        py::arg("v_max") = 0.0, py::arg("dv") = 0.0);

    py::class_<TransportScheme>(m, "TransportScheme")
        .def(py::init([](const std::string& mode, double cfl) {
                 TransportScheme s;
                 s.mode = mode == "sl_pushforward" ? TransportMode::sl_pushforward
                                                   : TransportMode::upwind_fv;
                 s.cfl_safety = cfl;
                 return s;
             }),
             py::arg("mode") = "upwind_fv", py::arg("cfl_safety") = 0.9);

    m.def(
        "solve_forward",
        [](const GridMeasure& m0, const std::vector<VectorField>& drift, const TimeGrid& tg,
           const TransportScheme& scheme) { return solve_forward(m0, drift, tg, scheme); },
        py::arg("m0"), py::arg("drift"), py::arg("time_grid"), py::arg("scheme") = TransportScheme{});

    py::class_<VectorField>(m, "VectorField")
        .def(py::init([](const TorusGrid& g, py::array_t<double> vx) {
                 VectorField b(g);
                 b.component(0) = from_array(vx);
                 return b;
             }),
             py::arg("grid"), py::arg("vx"))
        .def("component",
             [](const VectorField& b, int axis) { return to_array(b.component(axis)); });

    py::class_<MFGProblem>(m, "MFGProblem")
        .def(py::init<HamiltonianSpec, CouplingSpec, GridMeasure, GridField, TimeGrid>(),
             py::arg("hamiltonian"), py::arg("coupling"), py::arg("m0"), py::arg("u_f"),
             py::arg("time_grid"));

    py::class_<MFGSolution>(m, "MFGSolution")
        .def_readonly("iterations", &MFGSolution::iterations)
        .def_readonly("residual_history", &MFGSolution::residual_history)
        .def_property_readonly("hj", [](const MFGSolution& s) { return s.hj; })
        .def_property_readonly("path", [](const MFGSolution& s) { return s.path; });

    m.def(
        "solve_mfg",
        [](const MFGProblem& p, const std::string& damping, double theta, double tol_fp,
           int max_iter) {
            DampingRule rule{damping == "fixed" ? DampingMode::fixed : DampingMode::fictitious_play,
                             theta};
            return solve_mfg(p, rule, tol_fp, max_iter);
        },
        py::arg("problem"), py::arg("damping") = "fictitious_play", py::arg("theta") = 0.5,
        py::arg("tol_fp") = 1e-6, py::arg("max_iter") = 500);

    py::class_<ErgodicConfig>(m, "ErgodicConfig")
        .def(py::init<>())
        .def_readwrite("dt_erg", &ErgodicConfig::dt_erg)
        .def_readwrite("tol_lambda", &ErgodicConfig::tol_lambda)
        .def_readwrite("cesaro_window", &ErgodicConfig::cesaro_window)
        .def_readwrite("t_avg", &ErgodicConfig::t_avg)
        .def_readwrite("theta_erg", &ErgodicConfig::theta_erg)
        .def_readwrite("tol_outer", &ErgodicConfig::tol_outer)
        .def_readwrite("max_outer", &ErgodicConfig::max_outer);

    py::class_<ErgodicSolution>(m, "ErgodicSolution")
        .def_readonly("lambda_", &ErgodicSolution::lambda)
        .def_property_readonly("u_bar", [](const ErgodicSolution& s) { return s.u_bar; })
        .def_property_readonly("m_bar", [](const ErgodicSolution& s) { return s.m_bar; })
        .def_property_readonly("hj_residual_on_support",
                               [](const ErgodicSolution& s) {
                                   return s.diagnostics.hj_residual_on_support;
                               })
        .def_property_readonly("stationarity_residual", [](const ErgodicSolution& s) {
            return s.diagnostics.stationarity_residual;
        });

    m.def(
        "solve_ergodic",
        [](const HamiltonianSpec& h, const CouplingSpec& c, const ErgodicConfig& cfg) {
            return solve_ergodic(h, c, cfg);
        },
        py::arg("hamiltonian"), py::arg("coupling"), py::arg("config") = ErgodicConfig{});

    m.def("lambda_quadratic_oracle",
          [](const GridField& V, const GridField& f) {
              QuadraticOracle o = lambda_quadratic_oracle(V, f);
              return py::make_tuple(o.lambda, o.argmin_cells);
          },
          py::arg("V"), py::arg("f"));

    py::class_<RateRow>(m, "RateRow")
        .def_readonly("T", &RateRow::T)
        .def_readonly("e_u", &RateRow::e_u)
        .def_readonly("e_F", &RateRow::e_F)
        .def_readonly("energy", &RateRow::energy)
        .def_readonly("lip_x", &RateRow::lip_x);

    py::class_<RateReport>(m, "RateReport")
        .def_readonly("rows", &RateReport::rows)
        .def_readonly("fitted_slope_u", &RateReport::fitted_slope_u)
        .def_readonly("fitted_slope_F", &RateReport::fitted_slope_F)
        .def_property_readonly("all_verdicts", [](const RateReport& r) { return r.verdicts.all(); });

    m.def(
        "run_sweep",
        [](const MFGProblem& tmpl, const std::vector<double>& T_list, double dt,
           const ErgodicSolution& erg, const std::string& damping, double theta, double tol_fp,
           int max_iter, int threads) {
            DampingRule rule{damping == "fixed" ? DampingMode::fixed : DampingMode::fictitious_play,
                             theta};
            return run_sweep(tmpl, T_list, dt, erg, rule, tol_fp, max_iter, threads);
        },
        py::arg("problem"), py::arg("T_list"), py::arg("dt"), py::arg("ergodic"),
        py::arg("damping") = "fictitious_play", py::arg("theta") = 0.5, py::arg("tol_fp") = 1e-6,
        py::arg("max_iter") = 500, py::arg("threads") = 0);

    m.def("parse_config", &parse_config, py::arg("path"));
    py::class_<RunConfig>(m, "RunConfig")
        .def_readonly("dim", &RunConfig::dim)
        .def_readonly("n", &RunConfig::n)
        .def_readonly("config_hash", &RunConfig::config_hash)
        .def("build_problem", &RunConfig::build_problem)
        .def("build_hamiltonian", &RunConfig::build_hamiltonian)
        .def("build_coupling", &RunConfig::build_coupling)
        .def("build_ergodic_config", &RunConfig::build_ergodic_config);
}
