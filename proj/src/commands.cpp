#include "vssea/commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <iterator>
#include <ostream>
#include <sstream>
#include <thread>

#include "vssea/config.hpp"

namespace vssea {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string csv_header() {
  return "t,ref,theta_l,dtheta_l,theta_e,dtheta_e,u,dist_l_true,dist_e_true,dist_l_est,dist_e_est,sigma,e1,e2,e3,e4";
}

void write_csv(std::ostream& os, const SimTrace& trace, const std::optional<Divergence>& failure) {
  os << csv_header() << '\n';
  for (const TraceRow& r : trace.rows) {
    const double fields[] = {r.t,         r.ref,       r.x.theta_l,   r.x.dtheta_l,   r.x.theta_e, r.x.dtheta_e,
                             r.u,         r.dist_true.link, r.dist_true.motor, r.dist_est.link, r.dist_est.motor,
                             r.sigma,     r.e.e1,      r.e.e2,        r.e.e3,         r.e.e4};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) os << ',';
      os << format_double(fields[i]);
    }
    os << '\n';
  }
  if (failure) {
    os << "# truncated at step " << failure->step << ": " << failure->diagnostic << '\n';
  }
}

std::string format_metrics(const Metrics& m) {
  std::ostringstream os;
  os << "rms_error: " << format_double(m.rms_error) << '\n'
     << "max_abs_error: " << format_double(m.max_abs_error) << '\n'
     << "settling_time_2pct: " << format_double(m.settling_time_2pct) << '\n'
     << "settled: " << (m.settled ? "true" : "false") << '\n'
     << "steady_state_error: " << format_double(m.steady_state_error) << '\n'
     << "window_error: " << format_double(m.window_error) << '\n'
     << "estimation_error: " << format_double(m.estimation_error) << '\n'
     << "stiffness_error: " << format_double(m.stiffness_error) << '\n';
  return os.str();
}

namespace {

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string vector_text(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s + "]";
}

std::string polynomial_text(const Polynomial& p) {
  std::string s;
  for (int i = p.degree(); i >= 0; --i) {
    const double c = p.coeffs[static_cast<std::size_t>(i)];
    if (!s.empty()) s += " + ";
    s += format_double(c);
    if (i > 0) s += " s^" + std::to_string(i);
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::string> effective_overrides(const CommandLine& cmd) {
  std::vector<std::string> ov = cmd.overrides;
  if (cmd.seed) ov.push_back("sim.seed=" + std::to_string(*cmd.seed));
  return ov;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string synthesis_report(const ScenarioConfig& config) {
  std::ostringstream os;
  const auto chain = gamma_model(config.plant.j_e);
  const int rank = controllability_rank(chain.A, chain.B);
  const LinearModel plant = linear_matrices(config.plant);
  os << "controllability rank: " << rank << '\n';
  os << "plant controllability rank: " << controllability_rank(plant.A, plant.B) << '\n';
  if (rank != 4) throw SynthesisError("error chain is not controllable");

  const ResolvedController rc = synthesize(config);
  const SfbSynthesis& s = rc.sfb;
  os << "method: " << s.method << '\n';
  if (s.method == "lqr") {
    os << "lqr q: " << vector_text(config.controller.lqr_q) << '\n';
    os << "lqr r: " << format_double(config.controller.lqr_r) << '\n';
    os << "care iterations: " << s.care_iterations << '\n';
    os << "care relative residual: " << format_double(s.care_residual) << '\n';
  } else {
    os << "requested poles:";
    for (const auto& p : config.controller.poles) {
      os << ' ' << format_double(p.real());
      if (p.imag() != 0.0) os << (p.imag() > 0 ? "+" : "") << format_double(p.imag()) << 'i';
    }
    os << '\n';
  }
  os << "closed-loop polynomial: " << polynomial_text(s.closed_loop) << '\n';
  os << "K: " << vector_text(s.gains.k) << '\n';
  os << "closed loop hurwitz: " << yes_no(s.gains.hurwitz()) << '\n';
  if (config.controller.kind == ControllerKind::kSmc) {
    os << "sliding surface: " << vector_text(config.controller.smc.surface()) << '\n';
    os << "sliding surface hurwitz: " << yes_no(config.controller.smc.valid()) << '\n';
    os << "smc rho: " << format_double(config.controller.smc.rho) << '\n';
    os << "smc epsilon: " << format_double(config.controller.smc.epsilon) << '\n';
  }

  const DobGains& g = rc.observer_gains;
  os << "observer gains: [" << format_double(g.g0) << ", " << format_double(g.g1) << ", " << format_double(g.g2)
     << "]\n";
  os << "observer hurwitz: " << yes_no(g.hurwitz()) << '\n';

  const LyapunovCertificate& cert = s.certificate;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cert.p);
  os << "lyapunov residual: " << format_double(cert.residual) << '\n';
  os << "lyapunov P eigenvalues: " << vector_text(eig.eigenvalues()) << '\n';
  os << "lyapunov P positive definite: " << yes_no(cert.positive_definite) << '\n';
  if (!(cert.residual <= 1e-9) || !cert.positive_definite) throw SynthesisError("Lyapunov certificate failed");
  return os.str();
}

SweepSpec parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("sweep: expected key=v1,v2,...");
  SweepSpec spec;
  spec.key = trim(text.substr(0, eq));
  const auto keys = config_keys();
  if (std::find(keys.begin(), keys.end(), spec.key) == keys.end()) {
    throw ConfigError("sweep: " + spec.key + ": unknown key");
  }
  std::string_view rest = text.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string v = trim(rest.substr(0, comma));
    if (v.empty()) throw ConfigError("sweep: " + spec.key + ": empty value in list");
    spec.values.push_back(std::move(v));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
    if (rest.empty()) throw ConfigError("sweep: " + spec.key + ": empty value in list");
  }
  if (spec.values.empty()) throw ConfigError("sweep: " + spec.key + ": empty value list");
  return spec;
}

std::vector<SweepRow> run_sweep(std::string_view config_text, const std::vector<std::string>& overrides,
                                const SweepSpec& spec) {
  for (const auto& ov : overrides) {
    if (trim(ov.substr(0, ov.find('='))) == spec.key) {
      throw ConfigError("sweep: " + spec.key + ": also set by an override");
    }
  }
  const std::string text(config_text);
  auto run_one = [&](const std::string& value) {
    SweepRow row;
    row.value = value;
    try {
      std::vector<std::string> ov = overrides;
      ov.push_back(spec.key + "=" + value);
      const ScenarioConfig cfg = parse_config(text, ov);
      RunOutcome res = simulate(cfg);
      if (res.failure) {
        row.error = "divergence at step " + std::to_string(res.failure->step) + ": " + res.failure->diagnostic;
      } else {
        row.metrics = compute_metrics(res.trace);
      }
    } catch (const ConfigError& e) {
      row.error = std::string("config: ") + e.what();
    } catch (const SynthesisError& e) {
      row.error = std::string("synthesis: ") + e.what();
    }
    return row;
  };

  std::vector<SweepRow> rows(spec.values.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(spec.values.size(), std::thread::hardware_concurrency()));
  for (std::size_t begin = 0; begin < rows.size(); begin += workers) {
    std::vector<std::future<SweepRow>> batch;
    const std::size_t end = std::min(rows.size(), begin + workers);
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, run_one, std::cref(spec.values[i])));
    }
    for (std::size_t i = begin; i < end; ++i) rows[i] = batch[i - begin].get();
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  os << spec.key
     << ",rms_error,max_abs_error,settling_time_2pct,settled,steady_state_error,window_error,estimation_error,"
        "stiffness_error,error\n";
  for (const SweepRow& r : rows) {
    os << r.value;
    if (r.metrics) {
      const Metrics& m = *r.metrics;
      os << ',' << format_double(m.rms_error) << ',' << format_double(m.max_abs_error) << ','
         << format_double(m.settling_time_2pct) << ',' << (m.settled ? 1 : 0) << ','
         << format_double(m.steady_state_error) << ',' << format_double(m.window_error) << ','
         << format_double(m.estimation_error) << ',' << format_double(m.stiffness_error) << ',';
    } else {
      os << ",,,,,,,,,";
      std::string e = r.error;
      std::replace(e.begin(), e.end(), ',', ';');
      std::replace(e.begin(), e.end(), '\n', ' ');
      os << '"' << e << '"';
    }
    os << '\n';
  }
}

ExitStatus run_command(const CommandLine& cmd, std::ostream& out, std::ostream& err) {
  try {
    if (cmd.verb == "validate") {
      const auto results = run_validation(cmd.fault);
      out << format_validation(results);
      const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
      return ok ? ExitStatus::kOk : ExitStatus::kValidationFailed;
    }
    if (cmd.verb != "simulate" && cmd.verb != "synthesize" && cmd.verb != "sweep") {
      throw ConfigError("unknown verb '" + cmd.verb + "'");
    }
    const std::string text = cmd.config_path ? read_file(*cmd.config_path) : std::string();
    const std::vector<std::string> overrides = effective_overrides(cmd);

    std::ofstream file;
    std::ostream* data = &out;
    std::ostream* summary = &err;
    if (cmd.out_path) {
      file.open(*cmd.out_path, std::ios::binary | std::ios::trunc);
      if (!file) throw ConfigError("cannot open output file '" + *cmd.out_path + "'");
      data = &file;
      summary = &out;
    }

    if (cmd.verb == "sweep") {
      if (!cmd.sweep) throw ConfigError("sweep: --sweep key=v1,v2,... is required");
      const SweepSpec spec = parse_sweep(*cmd.sweep);
      parse_config(text, overrides);  // the base configuration must be valid on its own
      const auto rows = run_sweep(text, overrides, spec);
      write_sweep_csv(*data, spec, rows);
      return ExitStatus::kOk;
    }

    const ScenarioConfig cfg = parse_config(text, overrides);
    if (cmd.verb == "synthesize") {
      *data << synthesis_report(cfg);
      return ExitStatus::kOk;
    }

    const RunOutcome res = simulate(cfg);
    write_csv(*data, res.trace, res.failure);
    data->flush();
    if (res.failure) {
      err << "error: simulation diverged at step " << res.failure->step << ": " << res.failure->diagnostic << '\n';
      return ExitStatus::kDivergence;
    }
    *summary << format_metrics(compute_metrics(res.trace));
    return ExitStatus::kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitStatus::kConfigError;
  } catch (const SynthesisError& e) {
    err << "synthesis error: " << e.what() << '\n';
    return ExitStatus::kSynthesisError;
  } catch (const SimulationDivergence& e) {
    err << "error: simulation diverged at step " << e.step() << ": " << e.what() << '\n';
    return ExitStatus::kDivergence;
  }
}

}  // namespace vssea
