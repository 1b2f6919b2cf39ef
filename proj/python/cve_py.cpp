#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cve/decoherence.hpp"
#include "cve/errors.hpp"
#include "cve/gaussian.hpp"
#include "cve/grid.hpp"
#include "cve/mode_filter.hpp"
#include "cve/montecarlo.hpp"
#include "cve/wiener_hopf.hpp"

namespace py = pybind11;
using namespace cve;

PYBIND11_MODULE(cve_py, m) {
  m.doc() = "Continuous-variable entanglement between an oscillator and its output field";

  static py::exception<Error> error(m, "Error");
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<ConvergenceError> convergence_error(m, "ConvergenceError", error.ptr());
  static py::exception<ValidationError> validation_error(m, "ValidationError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    } catch (const ConvergenceError& e) {
      PyErr_SetString(convergence_error.ptr(), e.what());
    } catch (const ValidationError& e) {
      PyErr_SetString(validation_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<SystemParams>(m, "SystemParams")
      .def_readonly("omega_m", &SystemParams::omega_m)
      .def_readonly("gamma_m", &SystemParams::gamma_m)
      .def_readonly("omega_q", &SystemParams::omega_q)
      .def_readonly("omega_f", &SystemParams::omega_f)
      .def_readonly("n_th", &SystemParams::n_th)
      .def_property_readonly("q_m", &SystemParams::q_m)
      .def("__repr__", [](const SystemParams& p) {
        return "SystemParams(q_m=" + std::to_string(p.q_m()) + ", omega_q=" + std::to_string(p.omega_q) +
               ", omega_f=" + std::to_string(p.omega_f) + ")";
      });
  m.def("build_params", &build_params, py::arg("omega_m") = 1.0, py::arg("q_m") = 1e3, py::arg("omega_q") = 0.0,
        py::arg("omega_f") = py::none(), py::arg("n_th") = py::none());

  py::class_<EntanglementResult>(m, "EntanglementResult")
      .def_readonly("e_n", &EntanglementResult::e_n)
      .def_readonly("symplectic_spectrum", &EntanglementResult::symplectic_spectrum)
      .def_readonly("below_unity_count", &EntanglementResult::below_unity_count)
      .def_readonly("lambda_min", &EntanglementResult::lambda_min)
      .def_property_readonly("converged", [](const EntanglementResult& r) { return r.info.converged; })
      .def_property_readonly("method", [](const EntanglementResult& r) { return r.info.method; });

  m.def("symplectic_eigenvalues", &symplectic_eigenvalues, py::arg("cov"));
  m.def("partial_transpose", &partial_transpose, py::arg("cov"), py::arg("modes"));
  m.def(
      "log_negativity", [](const Mat& v, const std::vector<int>& part) { return log_negativity(v, part); },
      py::arg("cov"), py::arg("partition"));
  m.def("entanglement_grid", [](const SystemParams& p) { return entanglement_grid(p); }, py::arg("params"));
  m.def("solve_lambda", [](const SystemParams& p) { return solve_lambda(p); }, py::arg("params"));

  py::class_<SurvivalResult>(m, "SurvivalResult")
      .def_readonly("theta_s", &SurvivalResult::theta_s)
      .def_readonly("tau_s", &SurvivalResult::tau_s)
      .def_readonly("method", &SurvivalResult::method);
  m.def(
      "survival_time",
      [](const SystemParams& p, const std::string& method) {
        SurvivalOptions o;
        if (method == "wiener-hopf")
          o.method = SurvivalMethod::WienerHopf;
        else if (method != "grid")
          throw InvalidParameter("method must be grid or wiener-hopf");
        return survival_time(p, o);
      },
      py::arg("params"), py::arg("method") = "grid");
  m.def("survival_time_transcendental", &survival_time_transcendental, py::arg("params"));
  m.def("survival_time_closed_form", &survival_time_closed_form, py::arg("params"));

  py::class_<ModeWeight>(m, "ModeWeight")
      .def_readonly("omega_g", &ModeWeight::omega_g)
      .def_readonly("gamma_g", &ModeWeight::gamma_g)
      .def_readonly("zeta", &ModeWeight::zeta);
  m.def("make_mode", &make_mode, py::arg("params"), py::arg("omega_g"), py::arg("zeta"));
  m.def("mode_norm", &mode_norm, py::arg("mode"));
  m.def("mode_negativity", &mode_negativity, py::arg("params"), py::arg("mode"));
  m.def("subsystem_covariance", py::overload_cast<const SystemParams&, const ModeWeight&>(&subsystem_covariance),
        py::arg("params"), py::arg("mode"));
  py::class_<ModeOptimum>(m, "ModeOptimum")
      .def_readonly("mode", &ModeOptimum::mode)
      .def_readonly("e_n_sub", &ModeOptimum::e_n_sub);
  m.def("optimize_mode", [](const SystemParams& p) { return optimize_mode(p); }, py::arg("params"));

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("fraction", &ValidationReport::fraction)
      .def_readonly("scaling_ratio", &ValidationReport::scaling_ratio)
      .def_readonly("passed", &ValidationReport::passed);
  m.def(
      "validate",
      [](const SystemParams& p, int n_traj, double window, std::uint64_t seed, double kernel_scale) {
        SimConfig c;
        c.n_traj = n_traj;
        c.window = window;
        c.seed = seed;
        return validate(p, c, kernel_scale);
      },
      py::arg("params"), py::arg("n_traj") = 10000, py::arg("window") = 5.0, py::arg("seed") = 1,
      py::arg("kernel_scale") = 1.0);
}
