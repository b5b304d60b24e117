#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hvac/bench.hpp"
#include "hvac/config.hpp"
#include "hvac/forecast.hpp"
#include "hvac/lp.hpp"
#include "hvac/mpc.hpp"
#include "hvac/simulate.hpp"

namespace py = pybind11;
using namespace hvac;

namespace {

nlohmann::json to_nlohmann(const py::object& o) {
    if (o.is_none()) return nlohmann::json::object();
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

AppConfig make_config(const py::object& config) {
    AppConfig cfg = config_from_json(to_nlohmann(config));
    cfg.finalize();
    return cfg;
}

lp::Sense sense_from(const std::string& s) {
    if (s == "<=") return lp::Sense::LE;
    if (s == ">=") return lp::Sense::GE;
    if (s == "==" || s == "=") return lp::Sense::EQ;
    throw std::invalid_argument("row sense must be <=, >= or ==");
}

}  // namespace

PYBIND11_MODULE(hvacmpc, m) {
    m.doc() = "Deterministic, stochastic and perfect-information MPC for a central HVAC plant";

    py::class_<PlantConfig>(m, "PlantConfig")
        .def(py::init<>())
#define FIELD(name) .def_readwrite(#name, &PlantConfig::name)
        FIELD(alpha_e_cs) FIELD(alpha_e_hrc) FIELD(alpha_e_hwg) FIELD(alpha_e_ct) FIELD(alpha_w_ct)
        FIELD(alpha_ng_hwg) FIELD(alpha_cond_cs) FIELD(alpha_h_hrc) FIELD(cap_cw) FIELD(cap_hw) FIELD(pmax_cs)
        FIELD(pmax_hrc) FIELD(pmax_hwg) FIELD(pmax_ct) FIELD(pmax_hx) FIELD(pmax_cw) FIELD(pmax_hw)
        FIELD(price_water) FIELD(price_gas) FIELD(price_demand) FIELD(rho_cw) FIELD(rho_hw) FIELD(buffer)
#undef FIELD
        .def("validate", &PlantConfig::validate)
        .def("to_dict", [](const PlantConfig& c) { return to_python(nlohmann::json(c)); });

    py::class_<Disturbance>(m, "Disturbance")
        .def(py::init<double, double, double, double>(), py::arg("load_elec") = 0.0, py::arg("load_cw") = 0.0,
             py::arg("load_hw") = 0.0, py::arg("price_elec") = 0.0)
        .def_readwrite("load_elec", &Disturbance::load_elec)
        .def_readwrite("load_cw", &Disturbance::load_cw)
        .def_readwrite("load_hw", &Disturbance::load_hw)
        .def_readwrite("price_elec", &Disturbance::price_elec);

    py::class_<ControlAction>(m, "ControlAction")
        .def(py::init<>())
        .def_readwrite("p_cs", &ControlAction::p_cs)
        .def_readwrite("p_hrc", &ControlAction::p_hrc)
        .def_readwrite("p_hwg", &ControlAction::p_hwg)
        .def_readwrite("p_ct", &ControlAction::p_ct)
        .def_readwrite("p_hx", &ControlAction::p_hx)
        .def_readwrite("p_cw", &ControlAction::p_cw)
        .def_readwrite("p_hw", &ControlAction::p_hw);

    m.def(
        "residual_demands",
        [](const PlantConfig& c, const ControlAction& a, double load_elec) {
            const auto r = residual_demands(c, a, load_elec);
            return py::make_tuple(r.r_e, r.r_w, r.r_ng);
        },
        py::arg("config"), py::arg("action"), py::arg("load_elec"), "(r_e kW, r_w gal/h, r_ng kW)");
    m.def("stage_cost", &stage_cost, py::arg("config"), py::arg("action"), py::arg("disturbance"));
    m.def("demand_discount", &demand_discount, py::arg("hours_to_month_end"), py::arg("horizon"));

    m.def(
        "generate_data",
        [](std::uint64_t seed, int days, const std::string& profile) {
            return generate_synthetic_campus(seed, days, profile_by_name(profile));
        },
        py::arg("seed"), py::arg("days"), py::arg("profile") = "campus");
    m.def("read_data", py::overload_cast<const std::string&>(&read_trajectory_csv), py::arg("path"));

    m.def(
        "solve_lp",
        [](const std::vector<double>& c, const std::vector<double>& lb, const std::vector<double>& ub,
           const std::vector<std::tuple<std::string, double, std::map<int, double>>>& rows,
           const std::string& backend) {
            lp::LinearProgram prog;
            if (lb.size() != c.size() || ub.size() != c.size())
                throw std::invalid_argument("c, lb and ub must have equal length");
            for (std::size_t j = 0; j < c.size(); ++j) prog.add_col(c[j], lb[j], ub[j]);
            for (const auto& [s, rhs, coefs] : rows) {
                const int r = prog.add_row(sense_from(s), rhs);
                for (const auto& [col, v] : coefs) prog.add_coef(r, col, v);
            }
            prog.validate();
            const auto sol = lp::solve_with(prog, lp::backend_from_name(backend));
            py::dict d;
            d["status"] = lp::status_name(sol.status);
            d["objective"] = sol.objective;
            d["x"] = sol.primal;
            d["iterations"] = sol.iterations;
            return d;
        },
        py::arg("c"), py::arg("lb"), py::arg("ub"), py::arg("rows"), py::arg("backend") = "simplex",
        "rows: list of (sense, rhs, {column: coefficient}) with sense one of <=, >=, ==");

    m.def(
        "run",
        [](const std::string& controller, const Trajectory& truth, const py::object& config) {
            const AppConfig cfg = make_config(config);
            RunSpec spec = cfg.run;
            spec.controller = ControllerSpec::parse(controller, cfg.scenarios);
            ClosedLoopTrace tr;
            {
                py::gil_scoped_release release;
                tr = run_closed_loop(cfg.plant, spec, truth);
            }
            return to_python(trace_summary(cfg.plant, tr, truth, spec.history));
        },
        py::arg("controller"), py::arg("truth"), py::arg("config") = py::none(),
        "Closed-loop run; config uses the same JSON layout as the command-line tool. Returns the summary dict.");

    m.def(
        "benchmark",
        [](const std::vector<std::string>& controllers, const Trajectory& truth, const py::object& config) {
            const AppConfig cfg = make_config(config);
            std::vector<ControllerSpec> specs;
            for (const auto& c : controllers) specs.push_back(ControllerSpec::parse(c, cfg.scenarios));
            BenchmarkReport rep;
            {
                py::gil_scoped_release release;
                rep = run_benchmark(cfg.plant, cfg.bench, specs, truth);
            }
            return to_python(nlohmann::json(rep));
        },
        py::arg("controllers"), py::arg("truth"), py::arg("config") = py::none());

    py::register_exception<SolveError>(m, "SolveError");
}
