#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "vssea/commands.hpp"
#include "vssea/config.hpp"
#include "vssea/numkit.hpp"
#include "vssea/observer.hpp"
#include "vssea/validation.hpp"

namespace py = pybind11;
using namespace vssea;

namespace {

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["rms_error"] = m.rms_error;
  d["max_abs_error"] = m.max_abs_error;
  d["settling_time_2pct"] = m.settling_time_2pct;
  d["settled"] = m.settled;
  d["steady_state_error"] = m.steady_state_error;
  d["window_error"] = m.window_error;
  d["estimation_error"] = m.estimation_error;
  d["stiffness_error"] = m.stiffness_error;
  return d;
}

py::dict trace_dict(const SimTrace& tr) {
  const auto n = static_cast<py::ssize_t>(tr.rows.size());
  const char* names[] = {"t",           "ref",         "theta_l",    "dtheta_l",   "theta_e",    "dtheta_e",
                         "u",           "dist_l_true", "dist_e_true", "dist_l_est", "dist_e_est", "sigma",
                         "e1",          "e2",          "e3",          "e4",         "theta_ms",   "u_ms"};
  constexpr std::size_t ncol = std::size(names);
  std::vector<py::array_t<double>> cols;
  for (std::size_t c = 0; c < ncol; ++c) cols.emplace_back(n);
  std::vector<double*> ptr;
  for (auto& c : cols) ptr.push_back(c.mutable_data());
  for (py::ssize_t i = 0; i < n; ++i) {
    const TraceRow& r = tr.rows[static_cast<std::size_t>(i)];
    const double v[] = {r.t,         r.ref,       r.x.theta_l,        r.x.dtheta_l,      r.x.theta_e,
                        r.x.dtheta_e, r.u,        r.dist_true.link,   r.dist_true.motor, r.dist_est.link,
                        r.dist_est.motor, r.sigma, r.e.e1,            r.e.e2,            r.e.e3,
                        r.e.e4,      r.stiffness.theta_ms, r.u_ms};
    for (std::size_t c = 0; c < ncol; ++c) ptr[c][i] = v[c];
  }
  py::dict d;
  for (std::size_t c = 0; c < ncol; ++c) d[names[c]] = cols[c];
  return d;
}

}  // namespace

PYBIND11_MODULE(_vssea, m) {
  m.doc() = "Variable-stiffness series elastic actuator: robust control simulation and synthesis.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SynthesisError>(m, "SynthesisError", PyExc_RuntimeError);
  py::register_exception<SimulationDivergence>(m, "SimulationDivergence", PyExc_RuntimeError);

  m.def("config_keys", &config_keys);
  m.def("default_config", &default_config_text);
  m.def(
      "check_config",
      [](const std::string& text, const std::vector<std::string>& overrides) { parse_config(text, overrides); },
      py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{},
      "Raises ConfigError if the text plus overrides is not a valid configuration.");

  m.def(
      "simulate",
      [](const std::string& text, const std::vector<std::string>& overrides) {
        const ScenarioConfig cfg = parse_config(text, overrides);
        RunOutcome res;
        {
          py::gil_scoped_release release;
          res = simulate(cfg);
        }
        py::dict out;
        out["trace"] = trace_dict(res.trace);
        if (res.failure) {
          out["failure"] = py::make_tuple(res.failure->step, res.failure->diagnostic);
          out["metrics"] = py::none();
        } else {
          out["failure"] = py::none();
          out["metrics"] = metrics_dict(compute_metrics(res.trace));
        }
        return out;
      },
      py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{},
      "Runs one scenario. Returns {'trace': {column: array}, 'metrics': dict or None, "
      "'failure': (step, diagnostic) or None}.");

  m.def(
      "simulate_csv",
      [](const std::string& text, const std::vector<std::string>& overrides) {
        const RunOutcome res = simulate(parse_config(text, overrides));
        std::ostringstream os;
        write_csv(os, res.trace, res.failure);
        return os.str();
      },
      py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "synthesis_report",
      [](const std::string& text, const std::vector<std::string>& overrides) {
        return synthesis_report(parse_config(text, overrides));
      },
      py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "sweep",
      [](const std::string& text, const std::vector<std::string>& overrides, const std::string& spec_text) {
        const SweepSpec spec = parse_sweep(spec_text);
        parse_config(text, overrides);
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_sweep(text, overrides, spec);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["value"] = r.value;
          d["metrics"] = r.metrics ? py::object(metrics_dict(*r.metrics)) : py::object(py::none());
          d["error"] = r.error;
          out.append(d);
        }
        return out;
      },
      py::arg("text"), py::arg("overrides"), py::arg("spec"));

  m.def(
      "validate",
      [] {
        std::vector<CheckResult> results;
        {
          py::gil_scoped_release release;
          results = run_validation();
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["module"] = r.module;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      "Runs every module check; returns a list of {module, name, passed, detail}.");

  m.def(
      "pole_place_chain",
      [](const std::vector<std::complex<double>>& poles) -> Eigen::Vector4d {
        if (poles.size() != 4) throw py::value_error("pole_place_chain: expected 4 poles");
        try {
          return pole_place_chain(poles);
        } catch (const std::invalid_argument& e) {
          throw SynthesisError(e.what());
        }
      },
      py::arg("poles"), "Gains K = [k1..k4] with s^4 + k4 s^3 + k3 s^2 + k2 s + k1 = prod (s - p).");

  m.def(
      "solve_care",
      [](const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
        const CareSolution s = solve_care(a, b, q, r);
        return py::make_tuple(s.P, s.K, s.iterations, s.relative_residual);
      },
      py::arg("a"), py::arg("b"), py::arg("q"), py::arg("r"), "Returns (P, K, iterations, relative residual).");

  m.def("solve_lyapunov", &solve_lyapunov, py::arg("a"), py::arg("q"), "P with A^T P + P A + Q = 0.");
  m.def("controllability_rank", &controllability_rank, py::arg("a"), py::arg("b"));
  m.def(
      "routh_hurwitz", [](const std::vector<double>& ascending) { return routh_hurwitz(Polynomial(ascending)); },
      py::arg("coeffs"), "Coefficients in ascending order of power.");

  m.def(
      "design_gains",
      [](double bandwidth) {
        const DobGains g = design_gains(bandwidth);
        return py::make_tuple(g.g0, g.g1, g.g2);
      },
      py::arg("bandwidth"), "Observer gains (g0, g1, g2) for a triple pole at -bandwidth.");
}
