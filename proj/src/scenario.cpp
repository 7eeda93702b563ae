#include "vssea/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace vssea {

// -- references -----------------------------------------------------------

ReferencePoint reference_eval(const ReferenceTrajectory& traj, double t) {
  ReferencePoint p;
  const double a = traj.amplitude;
  switch (traj.kind) {
    case ReferenceKind::kZero:
      break;
    case ReferenceKind::kStep:
      p.r = t >= traj.start_s ? a : 0.0;
      break;
    case ReferenceKind::kSinusoid: {
      const double w = traj.frequency;
      const double ph = w * (t - traj.start_s);
      const double s = std::sin(ph), c = std::cos(ph);
      p.r = a * s;
      p.dr = a * w * c;
      p.ddr = -a * w * w * s;
      p.dddr = -a * w * w * w * c;
      p.ddddr = a * w * w * w * w * s;
      break;
    }
    case ReferenceKind::kQuintic: {
      const double T = traj.duration_s;
      const double tau = (t - traj.start_s) / T;
      if (tau <= 0.0) break;
      if (tau >= 1.0) {
        p.r = a;
        break;
      }
      const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau, t5 = t4 * tau;
      p.r = a * (10.0 * t3 - 15.0 * t4 + 6.0 * t5);
      p.dr = a / T * (30.0 * t2 - 60.0 * t3 + 30.0 * t4);
      p.ddr = a / (T * T) * (60.0 * tau - 180.0 * t2 + 120.0 * t3);
      p.dddr = a / (T * T * T) * (60.0 - 360.0 * tau + 360.0 * t2);
      p.ddddr = a / (T * T * T * T) * (-360.0 + 720.0 * tau);
      break;
    }
  }
  return p;
}

// -- disturbances ---------------------------------------------------------

DisturbanceProfile DisturbanceProfile::standard() {
  DisturbanceProfile d;
  d.link = {0.5, 0.3, std::numbers::pi, 3.0, 10.0};
  d.motor = {0.0, 0.2, 2.0 * std::numbers::pi, 3.0, 10.0};
  d.stiffness = {0.0, 0.0, 0.0, 3.0, 10.0};
  return d;
}

DisturbanceProfile DisturbanceProfile::none() {
  DisturbanceProfile d = standard();
  d.link.bias = d.link.amplitude = 0.0;
  d.motor.bias = d.motor.amplitude = 0.0;
  return d;
}

namespace {

double channel_value(const ChannelProfile& c, double t, int order) {
  if (!c.active(t)) return 0.0;
  const double w = c.frequency;
  const double ph = w * t;
  switch (order) {
    case 0: return c.bias + c.amplitude * std::sin(ph);
    case 1: return c.amplitude * w * std::cos(ph);
    case 2: return -c.amplitude * w * w * std::sin(ph);
    default: throw std::invalid_argument("disturbance derivative order must be 0, 1 or 2");
  }
}

}  // namespace

DisturbanceSample disturbance_eval(const DisturbanceProfile& profile, double t) {
  return disturbance_derivative(profile, t, 0);
}

DisturbanceSample disturbance_derivative(const DisturbanceProfile& profile, double t, int order) {
  return {channel_value(profile.link, t, order), channel_value(profile.motor, t, order),
          channel_value(profile.stiffness, t, order)};
}

// -- configuration --------------------------------------------------------

namespace {

void require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) throw ConfigError(key + ": " + rule);
}

void validate_channel(const ChannelProfile& c, const std::string& name) {
  const std::string base = "disturbance." + name;
  require(std::isfinite(c.bias), base + "_bias", "must be finite");
  require(std::isfinite(c.amplitude), base + "_amplitude", "must be finite");
  require(std::isfinite(c.frequency), base + "_frequency", "must be finite");
  require(std::isfinite(c.t_on) && std::isfinite(c.t_off) && c.t_on < c.t_off, base + "_t_off",
          "activation window requires t_on < t_off");
}

}  // namespace

void ScenarioConfig::validate() const {
  plant.validate();
  require(std::isfinite(theta_ms_nominal) && theta_ms_nominal >= plant.theta_ms_min, "plant.theta_ms_nominal",
          "must be >= plant.theta_ms_min");
  require(std::isfinite(sim.step_s) && sim.step_s > 0.0, "sim.step_s", "must be > 0");
  require(std::isfinite(sim.duration_s) && sim.duration_s >= sim.step_s, "sim.duration_s",
          "must be >= sim.step_s");
  require(sim.decimation >= 1, "sim.decimation", "must be >= 1");
  require(std::isfinite(sim.noise_std) && sim.noise_std >= 0.0, "sim.noise_std", "must be >= 0");
  require(sim.initial.vec().allFinite(), "sim.theta_l0", "initial state must be finite");
  if (sim.initial_theta_ms) {
    require(*sim.initial_theta_ms >= plant.theta_ms_min, "sim.theta_ms0", "must be >= plant.theta_ms_min");
  }
  require(std::isfinite(observer.bandwidth) && observer.bandwidth > 0.0, "observer.bandwidth", "must be > 0");
  require(controller.lqr_r > 0.0, "controller.lqr_r", "must be > 0");
  require((controller.lqr_q.array() >= 0.0).all(), "controller.lqr_q1", "state weights must be >= 0");
  require(controller.smc.rho > 0.0, "controller.smc_rho", "must be > 0");
  require(controller.smc.epsilon >= 0.0, "controller.smc_epsilon", "must be >= 0");
  require(controller.stiffness.kp > 0.0, "controller.stiffness_kp", "must be > 0");
  require(controller.stiffness.kd > 0.0, "controller.stiffness_kd", "must be > 0");
  require(controller.stiffness.g_ms > 0.0, "controller.stiffness_dob_bandwidth", "must be > 0");
  switch (reference.kind) {
    case ReferenceKind::kSinusoid:
      require(std::isfinite(reference.frequency) && reference.frequency > 0.0, "reference.frequency", "must be > 0");
      break;
    case ReferenceKind::kQuintic:
      require(std::isfinite(reference.duration_s) && reference.duration_s > 0.0, "reference.duration_s",
              "must be > 0");
      break;
    default:
      break;
  }
  require(std::isfinite(reference.amplitude), "reference.amplitude", "must be finite");
  validate_channel(disturbance.link, "link");
  validate_channel(disturbance.motor, "motor");
  validate_channel(disturbance.stiffness, "stiffness");
}

ResolvedController synthesize(const ScenarioConfig& config) {
  ResolvedController out;
  const auto& c = config.controller;
  switch (c.kind) {
    case ControllerKind::kLqr:
      out.sfb = synthesize_lqr(c.lqr_q, c.lqr_r);
      break;
    case ControllerKind::kSmc:
      if (!c.smc.valid()) throw SynthesisError("sliding surface s^3 + s3 s^2 + s2 s + s1 is not Hurwitz");
      out.sfb = synthesize_pole_placement(c.poles);
      break;
    default:
      out.sfb = synthesize_pole_placement(c.poles);
      break;
  }
  out.observer_gains = config.observer.resolved_gains();
  if (!out.observer_gains.hurwitz()) throw SynthesisError("observer gains fail g0 g1 > g2 > 0");
  return out;
}

// -- closed loop ----------------------------------------------------------

namespace {

// Fused state layout.
constexpr int kPlant = 0;      // 4: theta_l, dtheta_l, theta_e, dtheta_e
constexpr int kStiff = 4;      // 2: theta_ms, dtheta_ms
constexpr int kObserver = 6;   // 12: auxiliary observer variables
constexpr int kStiffDob = 18;  // 1: scalar observer state
constexpr int kStateSize = 19;

struct ControlOutput {
  double u = 0.0;
  double u_ms = 0.0;
  ErrorState e;
  double sigma = 0.0;
  DisturbanceEstimate observer_estimate;
  double stiffness_estimate = 0.0;
};

class ClosedLoop {
 public:
  ClosedLoop(const ScenarioConfig& cfg, const ResolvedController& ctl)
      : cfg_(cfg),
        ctl_(ctl),
        model_(linear_matrices(cfg.plant)),
        obs_(observer_matrices(model_.A, model_.B, ctl.observer_gains)) {}

  Vector initial_state() const {
    Vector y = Vector::Zero(kStateSize);
    y.segment<4>(kPlant) = cfg_.sim.initial.vec();
    y[kStiff] = cfg_.sim.initial_theta_ms.value_or(cfg_.theta_ms_nominal);
    y[kStiff + 1] = cfg_.sim.initial_dtheta_ms;
    // Observer starts from the assumption of zero disturbance at the initial state.
    y.segment<12>(kObserver) = auxiliary_from_truth(DisturbanceEstimate{}, cfg_.sim.initial.vec(),
                                                    ctl_.observer_gains);
    const StiffnessGains& sg = cfg_.controller.stiffness;
    y[kStiffDob] = sg.g_ms * cfg_.plant.j_ms * cfg_.sim.initial_dtheta_ms;
    return y;
  }

  ControlOutput control(double t, const Vector& y, const Eigen::Vector4d& noise) const {
    const PlantParams& p = cfg_.plant;
    const ControllerConfig& c = cfg_.controller;
    const Eigen::Vector4d xm_vec = y.segment<4>(kPlant) + noise;
    const PlantState xm = PlantState::from(xm_vec);
    const StiffnessState s{y[kStiff], y[kStiff + 1]};
    const ReferencePoint ref = reference_eval(cfg_.reference, t);

    ControlOutput out;
    out.observer_estimate =
        extract_estimates(y.segment<12>(kObserver), xm_vec, ctl_.observer_gains, cfg_.observer.projection);

    DisturbanceEstimate est;  // zero: model-only reconstruction
    if (c.use_dob) {
      est = c.estimates == EstimateSource::kExact ? exact_estimate(t) : out.observer_estimate;
    }
    if (c.injected_estimate_error != 0.0) {
      const double a = c.injected_estimate_error / p.j_l;
      est.value[1] += a * std::sin(2.0 * t);
      est.rate[1] += 2.0 * a * std::cos(2.0 * t);
      est.accel[1] -= 4.0 * a * std::sin(2.0 * t);
    }
    const double pi2_hat = pi2(p, xm, est.link_torque(p), cfg_.pi2_form);
    const double dpi2_hat = pi2_derivatives(p, xm, 0.0, est).first;
    const double pi4_hat = pi4(p, xm, est.motor_torque(p));
    out.e = error_state(ref, xm, pi2_hat, dpi2_hat);
    out.sigma = sliding_variable(c.smc, out.e);
    auto ddpi2 = [&](double u) { return pi2_derivatives(p, xm, u, est).second; };

    switch (c.kind) {
      case ControllerKind::kOpenLoop:
        out.u = 0.0;
        break;
      case ControllerKind::kPolePlacement:
      case ControllerKind::kLqr:
        out.u = resolve_affine_input([&](double u) {
          return sfb_control(ctl_.sfb.gains, out.e, matched_disturbance(ddpi2(u), pi4_hat), ref.ddddr, p.j_e,
                             c.compensation);
        });
        break;
      case ControllerKind::kSmc:
        out.u = resolve_affine_input(
            [&](double u) { return smc_control(c.smc, out.e, ddpi2(u), pi4_hat, ref.ddddr, p.j_e); });
        break;
    }

    out.stiffness_estimate = scalar_dob_estimate({y[kStiffDob]}, s.dtheta_ms, p, c.stiffness.g_ms);
    out.u_ms = stiffness_control(c.stiffness, cfg_.theta_ms_nominal, 0.0, s,
                                 c.stiffness_dob ? out.stiffness_estimate : 0.0);
    return out;
  }

  Vector deriv(double t, const Vector& y, const ControlOutput& ctl, const Eigen::Vector4d& noise) const {
    const PlantParams& p = cfg_.plant;
    const PlantState x = PlantState::from(y.segment<4>(kPlant));
    const StiffnessState s{y[kStiff], y[kStiff + 1]};
    const DisturbanceSample d = disturbance_eval(cfg_.disturbance, t);
    const PlantDerivative pd = nonlinear_deriv(p, x, s, ctl.u, ctl.u_ms, d);

    Vector dy(kStateSize);
    dy.segment<4>(kPlant) = pd.plant.vec();
    dy[kStiff] = pd.stiffness.theta_ms;
    dy[kStiff + 1] = pd.stiffness.dtheta_ms;
    const Eigen::Vector4d xm = x.vec() + noise;
    dy.segment<12>(kObserver) = observer_deriv(y.segment<12>(kObserver), ctl.u, xm, obs_);
    dy[kStiffDob] = scalar_dob_deriv({y[kStiffDob]}, s.dtheta_ms, ctl.u_ms, p, cfg_.controller.stiffness.g_ms);
    return dy;
  }

  DisturbanceEstimate exact_estimate(double t) const {
    return DisturbanceEstimate::from_torques(cfg_.plant, disturbance_eval(cfg_.disturbance, t),
                                             disturbance_derivative(cfg_.disturbance, t, 1),
                                             disturbance_derivative(cfg_.disturbance, t, 2));
  }

  TraceRow row(double t, const Vector& y, const ControlOutput& ctl) const {
    TraceRow r;
    r.t = t;
    r.ref = reference_eval(cfg_.reference, t).r;
    r.x = PlantState::from(y.segment<4>(kPlant));
    r.u = ctl.u;
    r.dist_true = disturbance_eval(cfg_.disturbance, t);
    r.dist_est = {ctl.observer_estimate.link_torque(cfg_.plant), ctl.observer_estimate.motor_torque(cfg_.plant),
                  ctl.stiffness_estimate};
    r.sigma = ctl.sigma;
    r.e = ctl.e;
    r.stiffness = {y[kStiff], y[kStiff + 1]};
    r.u_ms = ctl.u_ms;
    return r;
  }

 private:
  const ScenarioConfig& cfg_;
  const ResolvedController& ctl_;
  LinearModel model_;
  ObserverMatrices obs_;
};

double reference_amplitude(const ReferenceTrajectory& r) {
  return r.kind == ReferenceKind::kZero ? 0.0 : std::abs(r.amplitude);
}

std::optional<std::array<double, 2>> active_window(const DisturbanceProfile& d) {
  std::optional<std::array<double, 2>> w;
  for (const ChannelProfile* c : {&d.link, &d.motor}) {
    if (!c->nonzero()) continue;
    if (!w) {
      w = std::array<double, 2>{c->t_on, c->t_off};
    } else {
      (*w)[0] = std::min((*w)[0], c->t_on);
      (*w)[1] = std::max((*w)[1], c->t_off);
    }
  }
  return w;
}

}  // namespace

RunOutcome simulate(const ScenarioConfig& config) {
  config.validate();
  const ResolvedController resolved = synthesize(config);
  const ClosedLoop loop(config, resolved);

  const double h = config.sim.step_s;
  const long steps = static_cast<long>(std::floor(config.sim.duration_s / h + 1e-9));
  const long dec = config.sim.decimation;

  RunOutcome out;
  SimTrace& trace = out.trace;
  trace.reference_amplitude = reference_amplitude(config.reference);
  trace.theta_ms_ref = config.theta_ms_nominal;
  trace.step_s = h;
  trace.disturbance_window = active_window(config.disturbance);
  trace.rows.reserve(static_cast<std::size_t>(steps / dec + 1));

  std::mt19937_64 rng(config.sim.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector4d noise = Eigen::Vector4d::Zero();

  Vector y = loop.initial_state();
  for (long i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * h;
    try {
      if (config.sim.noise_std > 0.0) {
        for (int j = 0; j < 4; ++j) noise[j] = config.sim.noise_std * gauss(rng);
      }
      const ControlOutput ctl = loop.control(t, y, noise);
      if (!std::isfinite(ctl.u) || !std::isfinite(ctl.u_ms)) {
        throw SimulationDivergence("non-finite control input", i);
      }
      if (i % dec == 0) trace.rows.push_back(loop.row(t, y, ctl));
      if (i == steps) break;
      if (config.sim.hold == ControlHold::kZeroOrderHold) {
        y = rk4_step([&](double s, const Vector& z) { return loop.deriv(s, z, ctl, noise); }, t, y, h);
      } else {
        y = rk4_step(
            [&](double s, const Vector& z) { return loop.deriv(s, z, loop.control(s, z, noise), noise); }, t, y,
            h);
      }
      if (!y.allFinite()) throw SimulationDivergence("non-finite state", i);
    } catch (const SimulationDivergence& e) {
      out.failure = Divergence{i, std::string(e.what()) + " at t = " + std::to_string(t) + " s"};
      return out;
    } catch (const DomainError& e) {
      out.failure = Divergence{i, std::string(e.what()) + " at t = " + std::to_string(t) + " s"};
      return out;
    }
  }
  return out;
}

SimTrace run_scenario(const ScenarioConfig& config) {
  RunOutcome out = simulate(config);
  if (out.failure) throw SimulationDivergence(out.failure->diagnostic, out.failure->step);
  return std::move(out.trace);
}

// -- metrics --------------------------------------------------------------

Metrics compute_metrics(const SimTrace& trace) {
  Metrics m;
  const auto& rows = trace.rows;
  if (rows.empty()) return m;
  const double t_end = rows.back().t;

  double sq = 0.0;
  for (const auto& r : rows) {
    const double a = std::abs(r.e.e1);
    sq += a * a;
    m.max_abs_error = std::max(m.max_abs_error, a);
  }
  m.rms_error = std::sqrt(sq / static_cast<double>(rows.size()));

  const double band = 0.02 * trace.reference_amplitude;
  std::size_t last_out = rows.size();
  for (std::size_t i = rows.size(); i-- > 0;) {
    if (std::abs(rows[i].e.e1) > band) {
      last_out = i;
      break;
    }
  }
  if (last_out == rows.size()) {
    m.settling_time_2pct = 0.0;
  } else if (last_out + 1 == rows.size()) {
    m.settled = false;
    m.settling_time_2pct = t_end;
  } else {
    m.settling_time_2pct = rows[last_out + 1].t;
  }

  auto mean_over = [&](double from, double to, auto&& value) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.t >= from && r.t <= to) {
        acc += value(r);
        ++n;
      }
    }
    return n == 0 ? 0.0 : acc / static_cast<double>(n);
  };

  const double tail_start = rows.front().t + 0.9 * (t_end - rows.front().t);
  m.steady_state_error = mean_over(tail_start, t_end, [](const TraceRow& r) { return std::abs(r.e.e1); });
  m.stiffness_error = mean_over(tail_start, t_end, [&](const TraceRow& r) {
    return std::abs(r.stiffness.theta_ms - trace.theta_ms_ref);
  });

  if (trace.disturbance_window) {
    const auto [on, off] = *trace.disturbance_window;
    const double from = 0.5 * (on + off);
    // Window is half-open; stop one output sample short of the switch-off.
    const double to = std::min(off, t_end) - 1e-12;
    m.window_error = mean_over(from, to, [](const TraceRow& r) { return std::abs(r.e.e1); });
    m.estimation_error = std::sqrt(mean_over(from, to, [](const TraceRow& r) {
      const double dl = r.dist_est.link - r.dist_true.link;
      const double dm = r.dist_est.motor - r.dist_true.motor;
      return dl * dl + dm * dm;
    }));
  }
  return m;
}

// -- dual representation ---------------------------------------------------

OpenLoopExcitation OpenLoopExcitation::random(std::uint64_t seed, int tones) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), freq(0.2, 20.0), phase(0.0, 2.0 * std::numbers::pi);
  OpenLoopExcitation ex;
  for (auto* ch : {&ex.input, &ex.link, &ex.motor}) {
    for (int i = 0; i < tones; ++i) ch->push_back({amp(rng), freq(rng), phase(rng)});
  }
  return ex;
}

namespace {
double sum_tones(const std::vector<OpenLoopExcitation::Tone>& tones, double t) {
  double acc = 0.0;
  for (const auto& tone : tones) acc += tone.amplitude * std::sin(tone.frequency * t + tone.phase);
  return acc;
}
}  // namespace

double OpenLoopExcitation::u(double t) const { return sum_tones(input, t); }

DisturbanceSample OpenLoopExcitation::disturbance(double t) const {
  return {sum_tones(link, t), sum_tones(motor, t), 0.0};
}

double representation_equivalence(const PlantParams& p, const OpenLoopExcitation& ex, double duration_s,
                                  double step_s, Pi2Form form) {
  Vector xa = Vector::Zero(4), xg = Vector::Zero(4);
  auto linear = [&](double t, const Vector& x) -> Vector {
    return linear_form_deriv(p, PlantState::from(x), ex.u(t), ex.disturbance(t));
  };
  auto chain = [&](double t, const Vector& x) -> Vector {
    return gamma_form_deriv(p, PlantState::from(x), ex.u(t), ex.disturbance(t), form);
  };
  const long steps = static_cast<long>(std::floor(duration_s / step_s + 1e-9));
  double worst = 0.0;
  for (long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * step_s;
    xa = rk4_step(linear, t, xa, step_s);
    xg = rk4_step(chain, t, xg, step_s);
    if (!xg.allFinite()) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, (xa - xg).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace vssea
