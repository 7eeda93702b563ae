#include "vssea/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace vssea {

namespace {

enum class ValueType { kNumber, kInteger, kBool, kEnum };

struct Value {
  double number = 0.0;
  bool boolean = false;
  std::string text;
};

using Setter = std::function<void(ScenarioConfig&, const Value&)>;

struct KeyDef {
  std::string name;
  ValueType type;
  std::string default_text;  // empty: derived when absent
  std::vector<std::string> choices;
  Setter apply;
};

struct Assignment {
  std::string value;
  std::string where;  // "line N" or "override"
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (!quoted && (line[i] == '#' || line[i] == ';')) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

Setter number(double ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, const Value& v) { c.*field = v.number; };
}

template <class F>
Setter with(F f) {
  return Setter(std::move(f));
}

std::complex<double>& pole(ScenarioConfig& c, int i) { return c.controller.poles[static_cast<std::size_t>(i)]; }

const std::vector<KeyDef>& registry() {
  static const std::vector<KeyDef> keys = [] {
    std::vector<KeyDef> k;
    auto num = [&](std::string name, std::string def, Setter s) {
      k.push_back({std::move(name), ValueType::kNumber, std::move(def), {}, std::move(s)});
    };
    auto integer = [&](std::string name, std::string def, Setter s) {
      k.push_back({std::move(name), ValueType::kInteger, std::move(def), {}, std::move(s)});
    };
    auto boolean = [&](std::string name, std::string def, Setter s) {
      k.push_back({std::move(name), ValueType::kBool, std::move(def), {}, std::move(s)});
    };
    auto choice = [&](std::string name, std::string def, std::vector<std::string> choices, Setter s) {
      k.push_back({std::move(name), ValueType::kEnum, std::move(def), std::move(choices), std::move(s)});
    };

    // [plant]
    choice("plant.spring", "linear", {"linear", "nonlinear"}, with([](ScenarioConfig& c, const Value& v) {
             c.plant.spring = v.text == "linear" ? SpringModel::kLinear : SpringModel::kNonlinear;
           }));
    boolean("plant.spring_consistency", "true", with([](ScenarioConfig&, const Value&) {}));
    num("plant.j_l", "0.05", with([](ScenarioConfig& c, const Value& v) { c.plant.j_l = v.number; }));
    num("plant.b_l", "0.02", with([](ScenarioConfig& c, const Value& v) { c.plant.b_l = v.number; }));
    num("plant.j_e", "0.5", with([](ScenarioConfig& c, const Value& v) { c.plant.j_e = v.number; }));
    num("plant.b_e", "0.1", with([](ScenarioConfig& c, const Value& v) { c.plant.b_e = v.number; }));
    num("plant.k", "100", with([](ScenarioConfig& c, const Value& v) { c.plant.k = v.number; }));
    num("plant.gear_ratio", "100", with([](ScenarioConfig& c, const Value& v) { c.plant.gear_ratio = v.number; }));
    num("plant.j_ms", "0.01", with([](ScenarioConfig& c, const Value& v) { c.plant.j_ms = v.number; }));
    num("plant.b_ms", "0.005", with([](ScenarioConfig& c, const Value& v) { c.plant.b_ms = v.number; }));
    num("plant.theta_ms_min", "0.02",
        with([](ScenarioConfig& c, const Value& v) { c.plant.theta_ms_min = v.number; }));
    num("plant.theta_ms_nominal", "0.1", number(&ScenarioConfig::theta_ms_nominal));
    num("plant.upsilon_tau", "", with([](ScenarioConfig& c, const Value& v) { c.plant.upsilon_tau = v.number; }));
    num("plant.upsilon_k", "", with([](ScenarioConfig& c, const Value& v) { c.plant.upsilon_k = v.number; }));

    // [controller]
    choice("controller.kind", "pp+dob", {"open_loop", "pp", "pp+dob", "lqr", "lqr+dob", "smc", "smc+dob"},
           with([](ScenarioConfig& c, const Value& v) {
             const std::string& s = v.text;
             c.controller.use_dob = s.ends_with("+dob");
             if (s == "open_loop") c.controller.kind = ControllerKind::kOpenLoop;
             else if (s.starts_with("pp")) c.controller.kind = ControllerKind::kPolePlacement;
             else if (s.starts_with("lqr")) c.controller.kind = ControllerKind::kLqr;
             else c.controller.kind = ControllerKind::kSmc;
           }));
    choice("controller.estimates", "observer", {"observer", "exact"}, with([](ScenarioConfig& c, const Value& v) {
             c.controller.estimates = v.text == "exact" ? EstimateSource::kExact : EstimateSource::kObserver;
           }));
    for (int i = 0; i < 4; ++i) {
      const std::string idx = std::to_string(i + 1);
      num("controller.pole_" + idx, "-8", with([i](ScenarioConfig& c, const Value& v) {
            pole(c, i) = {v.number, pole(c, i).imag()};
          }));
      num("controller.pole_" + idx + "_im", "0", with([i](ScenarioConfig& c, const Value& v) {
            pole(c, i) = {pole(c, i).real(), v.number};
          }));
    }
    const char* q_defaults[] = {"1", "0.1", "0.01", "0.001"};
    for (int i = 0; i < 4; ++i) {
      num("controller.lqr_q" + std::to_string(i + 1), q_defaults[i],
          with([i](ScenarioConfig& c, const Value& v) { c.controller.lqr_q[i] = v.number; }));
    }
    num("controller.lqr_r", "1", with([](ScenarioConfig& c, const Value& v) { c.controller.lqr_r = v.number; }));
    const char* s_defaults[] = {"512", "192", "24"};
    for (int i = 0; i < 3; ++i) {
      num("controller.smc_s" + std::to_string(i + 1), s_defaults[i],
          with([i](ScenarioConfig& c, const Value& v) { c.controller.smc.s[i] = v.number; }));
    }
    num("controller.smc_rho", "500", with([](ScenarioConfig& c, const Value& v) { c.controller.smc.rho = v.number; }));
    num("controller.smc_epsilon", "1",
        with([](ScenarioConfig& c, const Value& v) { c.controller.smc.epsilon = v.number; }));
    num("controller.stiffness_kp", "20",
        with([](ScenarioConfig& c, const Value& v) { c.controller.stiffness.kp = v.number; }));
    num("controller.stiffness_kd", "1",
        with([](ScenarioConfig& c, const Value& v) { c.controller.stiffness.kd = v.number; }));
    boolean("controller.stiffness_dob", "true",
            with([](ScenarioConfig& c, const Value& v) { c.controller.stiffness_dob = v.boolean; }));
    num("controller.stiffness_dob_bandwidth", "50",
        with([](ScenarioConfig& c, const Value& v) { c.controller.stiffness.g_ms = v.number; }));

    // [observer]
    num("observer.bandwidth", "100", with([](ScenarioConfig& c, const Value& v) { c.observer.bandwidth = v.number; }));
    num("observer.g0", "", with([](ScenarioConfig& c, const Value& v) {
          c.observer.gains = c.observer.gains.value_or(DobGains{});
          c.observer.gains->g0 = v.number;
        }));
    num("observer.g1", "", with([](ScenarioConfig& c, const Value& v) {
          c.observer.gains = c.observer.gains.value_or(DobGains{});
          c.observer.gains->g1 = v.number;
        }));
    num("observer.g2", "", with([](ScenarioConfig& c, const Value& v) {
          c.observer.gains = c.observer.gains.value_or(DobGains{});
          c.observer.gains->g2 = v.number;
        }));
    boolean("observer.projection", "true",
            with([](ScenarioConfig& c, const Value& v) { c.observer.projection = v.boolean; }));

    // [reference]
    choice("reference.kind", "step", {"zero", "step", "sinusoid", "quintic"},
           with([](ScenarioConfig& c, const Value& v) {
             if (v.text == "zero") c.reference.kind = ReferenceKind::kZero;
             else if (v.text == "step") c.reference.kind = ReferenceKind::kStep;
             else if (v.text == "sinusoid") c.reference.kind = ReferenceKind::kSinusoid;
             else c.reference.kind = ReferenceKind::kQuintic;
           }));
    num("reference.amplitude", "1", with([](ScenarioConfig& c, const Value& v) { c.reference.amplitude = v.number; }));
    num("reference.start_s", "0", with([](ScenarioConfig& c, const Value& v) { c.reference.start_s = v.number; }));
    num("reference.frequency", "1", with([](ScenarioConfig& c, const Value& v) { c.reference.frequency = v.number; }));
    num("reference.duration_s", "2",
        with([](ScenarioConfig& c, const Value& v) { c.reference.duration_s = v.number; }));

    // [disturbance]
    struct ChannelDefaults {
      const char* name;
      ChannelProfile DisturbanceProfile::*member;
      const char *bias, *amplitude, *frequency;
    };
    const ChannelDefaults channels[] = {
        {"link", &DisturbanceProfile::link, "0.5", "0.3", "3.141592653589793"},
        {"motor", &DisturbanceProfile::motor, "0", "0.2", "6.283185307179586"},
        {"stiffness", &DisturbanceProfile::stiffness, "0", "0", "0"},
    };
    for (const auto& ch : channels) {
      const std::string base = std::string("disturbance.") + ch.name;
      auto member = ch.member;
      num(base + "_bias", ch.bias,
          with([member](ScenarioConfig& c, const Value& v) { (c.disturbance.*member).bias = v.number; }));
      num(base + "_amplitude", ch.amplitude,
          with([member](ScenarioConfig& c, const Value& v) { (c.disturbance.*member).amplitude = v.number; }));
      num(base + "_frequency", ch.frequency,
          with([member](ScenarioConfig& c, const Value& v) { (c.disturbance.*member).frequency = v.number; }));
      num(base + "_t_on", "3",
          with([member](ScenarioConfig& c, const Value& v) { (c.disturbance.*member).t_on = v.number; }));
      num(base + "_t_off", "10",
          with([member](ScenarioConfig& c, const Value& v) { (c.disturbance.*member).t_off = v.number; }));
    }

    // [sim]
    num("sim.duration_s", "12", with([](ScenarioConfig& c, const Value& v) { c.sim.duration_s = v.number; }));
    num("sim.step_s", "0.001", with([](ScenarioConfig& c, const Value& v) { c.sim.step_s = v.number; }));
    integer("sim.decimation", "10",
            with([](ScenarioConfig& c, const Value& v) { c.sim.decimation = static_cast<int>(v.number); }));
    choice("sim.control_hold", "zoh", {"zoh", "continuous"}, with([](ScenarioConfig& c, const Value& v) {
             c.sim.hold = v.text == "zoh" ? ControlHold::kZeroOrderHold : ControlHold::kContinuous;
           }));
    num("sim.theta_l0", "0", with([](ScenarioConfig& c, const Value& v) { c.sim.initial.theta_l = v.number; }));
    num("sim.dtheta_l0", "0", with([](ScenarioConfig& c, const Value& v) { c.sim.initial.dtheta_l = v.number; }));
    num("sim.theta_e0", "0", with([](ScenarioConfig& c, const Value& v) { c.sim.initial.theta_e = v.number; }));
    num("sim.dtheta_e0", "0", with([](ScenarioConfig& c, const Value& v) { c.sim.initial.dtheta_e = v.number; }));
    num("sim.theta_ms0", "", with([](ScenarioConfig& c, const Value& v) { c.sim.initial_theta_ms = v.number; }));
    num("sim.dtheta_ms0", "0", with([](ScenarioConfig& c, const Value& v) { c.sim.initial_dtheta_ms = v.number; }));
    num("sim.noise_std", "0", with([](ScenarioConfig& c, const Value& v) { c.sim.noise_std = v.number; }));
    integer("sim.seed", "0",
            with([](ScenarioConfig& c, const Value& v) { c.sim.seed = static_cast<std::uint64_t>(v.number); }));
    return k;
  }();
  return keys;
}

const KeyDef* find_key(const std::string& name) {
  const auto& keys = registry();
  auto it = std::find_if(keys.begin(), keys.end(), [&](const KeyDef& d) { return d.name == name; });
  return it == keys.end() ? nullptr : &*it;
}

Value convert(const KeyDef& def, const std::string& raw, const std::string& where) {
  auto fail = [&](const std::string& what) -> ConfigError {
    return ConfigError(where + ": " + def.name + ": " + what + " (got '" + raw + "')");
  };
  Value v;
  const std::string s = unquote(raw);
  switch (def.type) {
    case ValueType::kNumber:
    case ValueType::kInteger: {
      if (raw.empty() || raw.front() == '"') throw fail("expected a number");
      const char* begin = s.data();
      const char* end = s.data() + s.size();
      if (*begin == '+') ++begin;
      const auto res = std::from_chars(begin, end, v.number);
      if (res.ec != std::errc() || res.ptr != end) throw fail("expected a number");
      if (def.type == ValueType::kInteger && (v.number != std::floor(v.number) || v.number < 0.0)) {
        throw fail("expected a nonnegative integer");
      }
      break;
    }
    case ValueType::kBool:
      if (s == "true") v.boolean = true;
      else if (s == "false") v.boolean = false;
      else throw fail("expected true or false");
      break;
    case ValueType::kEnum:
      if (std::find(def.choices.begin(), def.choices.end(), s) == def.choices.end()) {
        std::string allowed;
        for (const auto& c : def.choices) allowed += (allowed.empty() ? "" : ", ") + c;
        throw fail("expected one of {" + allowed + "}");
      }
      v.text = s;
      break;
  }
  return v;
}

std::map<std::string, Assignment> read_file(std::string_view text) {
  static const std::set<std::string> sections = {"plant", "controller", "observer", "reference", "disturbance", "sim"};
  std::map<std::string, Assignment> out;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + ": malformed section header '" + body + "'");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      if (!sections.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside of any section");
    const std::string dotted = section + "." + key;
    if (!find_key(dotted)) throw ConfigError(where + ": " + dotted + ": unknown key");
    if (out.count(dotted)) throw ConfigError(where + ": " + dotted + ": duplicate key (first set on " + out[dotted].where + ")");
    out[dotted] = {value, where};
  }
  return out;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

ScenarioConfig parse_config(std::string_view text, std::span<const std::string> overrides) {
  std::map<std::string, Assignment> assigned = read_file(text);

  std::map<std::string, std::string> override_values;
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + ov + "': expected key=value");
    const std::string key = trim(std::string_view(ov).substr(0, eq));
    const std::string value = trim(std::string_view(ov).substr(eq + 1));
    if (!find_key(key)) throw ConfigError("override: " + key + ": unknown key");
    auto [it, inserted] = override_values.emplace(key, value);
    if (!inserted && it->second != value) {
      throw ConfigError("override: " + key + ": conflicting values '" + it->second + "' and '" + value + "'");
    }
  }
  for (const auto& [key, value] : override_values) assigned[key] = {value, "override"};

  ScenarioConfig cfg;
  std::map<std::string, Value> values;
  for (const KeyDef& def : registry()) {
    auto it = assigned.find(def.name);
    if (it != assigned.end()) {
      values[def.name] = convert(def, it->second.value, it->second.where);
      def.apply(cfg, values[def.name]);
    } else if (!def.default_text.empty()) {
      def.apply(cfg, convert(def, def.default_text, "default"));
    }
  }

  // Derived plant constants: the torque constant defaults to the value that
  // reproduces the linear stiffness k at the nominal stiffness position.
  if (!values.count("plant.upsilon_tau")) {
    const double t3 = cfg.theta_ms_nominal * cfg.theta_ms_nominal * cfg.theta_ms_nominal;
    cfg.plant.upsilon_tau = 2.0 * cfg.plant.k * t3;
  }
  const bool consistent = !values.count("plant.spring_consistency") || values["plant.spring_consistency"].boolean;
  if (values.count("plant.upsilon_k")) {
    if (consistent && !close(cfg.plant.upsilon_k, 0.5 * cfg.plant.upsilon_tau)) {
      throw ConfigError("plant.upsilon_k: must equal upsilon_tau / 2 while plant.spring_consistency = true");
    }
  } else {
    cfg.plant.upsilon_k = 0.5 * cfg.plant.upsilon_tau;
  }

  const int explicit_gains = static_cast<int>(values.count("observer.g0") + values.count("observer.g1") +
                                              values.count("observer.g2"));
  if (explicit_gains != 0 && explicit_gains != 3) {
    throw ConfigError("observer.g0: observer.g0, observer.g1 and observer.g2 must be given together");
  }

  cfg.validate();
  return cfg;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& def : registry()) out.push_back(def.name);
  return out;
}

std::string default_config_text() {
  std::ostringstream os;
  std::string section;
  for (const auto& def : registry()) {
    const auto dot = def.name.find('.');
    const std::string sec = def.name.substr(0, dot);
    if (sec != section) {
      os << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
      section = sec;
    }
    if (def.default_text.empty()) {
      os << "# " << def.name.substr(dot + 1) << " = (derived)\n";
    } else {
      os << def.name.substr(dot + 1) << " = " << def.default_text << "\n";
    }
  }
  return os.str();
}

}  // namespace vssea
