#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nmqsd/commands.hpp"
#include "nmqsd/config.hpp"
#include "nmqsd/deterministic.hpp"
#include "nmqsd/ensemble.hpp"
#include "nmqsd/metrics.hpp"

namespace py = pybind11;
using namespace nmqsd;

namespace {

// JSON crosses the boundary as text; the Python side wraps it with the json module.
nlohmann::json parse(const std::string& s) { return nlohmann::json::parse(s); }

py::dict series_dict(const std::vector<double>& t, const std::vector<DensityMatrix4>& rho) {
  py::dict d;
  d["t"] = t;
  d["rho"] = rho;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two qubits in a common Lorentzian bath: stochastic and deterministic solvers";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<double, double, double, double>(), py::arg("omega_s"), py::arg("lam"), py::arg("gamma"),
           py::arg("Omega"))
      .def_static("from_detuning", &ModelParams::from_detuning, py::arg("omega_s"), py::arg("lam"),
                  py::arg("gamma"), py::arg("delta"))
      .def_property_readonly("omega_s", &ModelParams::omega_s)
      .def_property_readonly("lam", &ModelParams::lambda)
      .def_property_readonly("gamma", &ModelParams::gamma)
      .def_property_readonly("Omega", &ModelParams::Omega)
      .def_property_readonly("delta", &ModelParams::delta)
      .def("__repr__", [](const ModelParams& p) { return "ModelParams(" + p.to_json().dump() + ")"; });

  m.def("preset_state", &preset_state, py::arg("name"));
  m.def("concurrence", [](const DensityMatrix4& r) { return wootters_concurrence(r).value; }, py::arg("rho"));
  m.def("fidelity", [](const DensityMatrix4& a, const DensityMatrix4& b) { return fidelity(a, b).value; },
        py::arg("rho_a"), py::arg("rho_b"));
  m.def("analytic_rdm", &analytic_rdm, py::arg("rho0"), py::arg("t"), py::arg("params"));
  m.def("analytic_concurrence", &analytic_concurrence, py::arg("rho0"), py::arg("t"), py::arg("params"));

  m.def(
      "integrate_master",
      [](const DensityMatrix4& rho0, const ModelParams& p, double dt, double T, std::size_t stride) {
        const MasterResult r = integrate_master(rho0, p, dt, T, stride);
        return series_dict(r.series.t, r.series.rho);
      },
      py::arg("rho0"), py::arg("params"), py::arg("dt") = 0.005, py::arg("T") = 10.0, py::arg("stride") = 10);

  m.def(
      "steady_state",
      [](const DensityMatrix4& rho0, const ModelParams& p, double t_ref) {
        return steady_state(rho0, p, t_ref).to_json().dump();
      },
      py::arg("rho0"), py::arg("params"), py::arg("t_ref") = 0.0);

  m.def(
      "run_ensemble",
      [](const PureState4& psi0, const ModelParams& p, const std::string& model, std::size_t n_traj, double dt,
         double T, std::size_t stride, std::uint64_t seed, bool linear, unsigned threads) {
        EnsembleOptions opt;
        opt.n_traj = n_traj;
        opt.dt = dt;
        opt.T = T;
        opt.stride = stride;
        opt.seed = seed;
        opt.threads = threads;
        opt.unraveling = linear ? Unraveling::linear : Unraveling::nonlinear;
        EnsembleEstimate est;
        {
          py::gil_scoped_release release;
          est = run_ensemble(psi0, p, parse_model_kind(model), opt);
        }
        py::dict d = series_dict(est.t, est.rho);
        d["stderr"] = est.stderr_;
        d["n_traj"] = est.n_traj;
        d["n_aborted"] = est.n_aborted;
        return d;
      },
      py::arg("psi0"), py::arg("params"), py::arg("model") = "exact", py::arg("n_traj") = 1000,
      py::arg("dt") = 0.005, py::arg("T") = 10.0, py::arg("stride") = 10, py::arg("seed") = 1,
      py::arg("linear") = false, py::arg("threads") = 0);

  m.def(
      "run_command",
      [](const std::string& command, const std::string& config, const std::string& output, unsigned threads) {
        std::ostringstream log;
        CommandContext ctx;
        ctx.output = output;
        ctx.threads = threads;
        ctx.log = &log;
        int code;
        {
          py::gil_scoped_release release;
          code = run_command(command, parse(config), ctx);
        }
        return py::make_tuple(code, log.str());
      },
      py::arg("command"), py::arg("config"), py::arg("output") = "", py::arg("threads") = 0);
}
