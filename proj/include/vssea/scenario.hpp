#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vssea/control.hpp"
#include "vssea/observer.hpp"
#include "vssea/plant.hpp"
#include "vssea/reconstruction.hpp"

namespace vssea {

// -- references -----------------------------------------------------------

enum class ReferenceKind { kZero, kStep, kSinusoid, kQuintic };

struct ReferenceTrajectory {
  ReferenceKind kind = ReferenceKind::kStep;
  double amplitude = 1.0;    // [rad]
  double start_s = 0.0;      // step instant / quintic start / sinusoid phase origin
  double frequency = 1.0;    // sinusoid [rad/s]
  double duration_s = 2.0;   // quintic transfer time
};

/// Analytic value and derivatives through fourth order. Steps have zero
/// derivatives on both sides of the jump; quintics are rest-to-rest.
ReferencePoint reference_eval(const ReferenceTrajectory& traj, double t);

// -- disturbances ---------------------------------------------------------

/// bias + amplitude sin(frequency t) inside [t_on, t_off), zero outside.
struct ChannelProfile {
  double bias = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;  // [rad/s]
  double t_on = 0.0;
  double t_off = 0.0;

  bool active(double t) const { return t >= t_on && t < t_off; }
  bool nonzero() const { return bias != 0.0 || amplitude != 0.0; }
};

struct DisturbanceProfile {
  ChannelProfile link;
  ChannelProfile motor;
  ChannelProfile stiffness;

  /// Window [3, 10) s: link 0.5 + 0.3 sin(pi t), motor 0.2 sin(2 pi t) [N m].
  static DisturbanceProfile standard();
  static DisturbanceProfile none();
};

DisturbanceSample disturbance_eval(const DisturbanceProfile& profile, double t);
/// Analytic time derivatives of order 1 or 2 (window edges contribute nothing).
DisturbanceSample disturbance_derivative(const DisturbanceProfile& profile, double t, int order);

// -- configuration --------------------------------------------------------

enum class ControllerKind { kOpenLoop, kPolePlacement, kLqr, kSmc };

/// Where the robust laws take their disturbance information from.
enum class EstimateSource { kObserver, kExact };

enum class ControlHold { kZeroOrderHold, kContinuous };

struct ControllerConfig {
  ControllerKind kind = ControllerKind::kPolePlacement;
  // Feed the disturbance estimate into the Pi-term reconstruction. Without it
  // the Pi terms use the disturbance-free model only.
  bool use_dob = true;
  EstimateSource estimates = EstimateSource::kObserver;
  std::array<std::complex<double>, 4> poles{{-8.0, -8.0, -8.0, -8.0}};
  Eigen::Vector4d lqr_q = Eigen::Vector4d(1.0, 0.1, 0.01, 0.001);
  double lqr_r = 1.0;
  SmcParams smc;
  StiffnessGains stiffness;
  bool stiffness_dob = true;
  Compensation compensation = Compensation::kOn;  // validation hook
  // Validation hook: amplitude [N m] of a 2 rad/s sinusoid added to the
  // link-torque estimate (and its derivatives) before reconstruction.
  double injected_estimate_error = 0.0;
};

struct ObserverConfig {
  double bandwidth = 100.0;        // [rad/s]
  std::optional<DobGains> gains;   // explicit gains override the bandwidth design
  bool projection = true;

  DobGains resolved_gains() const { return gains ? *gains : design_gains(bandwidth); }
};

struct SimSettings {
  double duration_s = 12.0;
  double step_s = 1e-3;
  int decimation = 10;
  ControlHold hold = ControlHold::kZeroOrderHold;
  PlantState initial;
  std::optional<double> initial_theta_ms;  // defaults to the nominal stiffness position
  double initial_dtheta_ms = 0.0;
  double noise_std = 0.0;  // white measurement noise on x, held per step
  std::uint64_t seed = 0;
};

struct ScenarioConfig {
  PlantParams plant;
  double theta_ms_nominal = 0.1;  // stiffness-motor reference [rad]
  ControllerConfig controller;
  ObserverConfig observer;
  ReferenceTrajectory reference;
  DisturbanceProfile disturbance = DisturbanceProfile::standard();
  SimSettings sim;
  Pi2Form pi2_form = Pi2Form::kLinkInertia;  // validation hook

  /// Throws ConfigError naming the first violated key.
  void validate() const;
};

/// Gains resolved from a controller configuration. Throws SynthesisError.
struct ResolvedController {
  SfbSynthesis sfb;
  DobGains observer_gains;
};
ResolvedController synthesize(const ScenarioConfig& config);

// -- traces ---------------------------------------------------------------

struct TraceRow {
  double t = 0.0;
  double ref = 0.0;
  PlantState x;
  double u = 0.0;
  DisturbanceSample dist_true;
  DisturbanceSample dist_est;
  double sigma = 0.0;
  ErrorState e;
  StiffnessState stiffness;
  double u_ms = 0.0;
};

struct SimTrace {
  std::vector<TraceRow> rows;
  double reference_amplitude = 0.0;
  double theta_ms_ref = 0.0;
  double step_s = 0.0;
  // Union of the active link/motor disturbance windows, when any channel is nonzero.
  std::optional<std::array<double, 2>> disturbance_window;
};

struct Divergence {
  long step = 0;
  std::string diagnostic;
};

struct RunOutcome {
  SimTrace trace;
  std::optional<Divergence> failure;  // trace holds the rows recorded before the failure
};

/// Closed-loop run: plant, 12-state observer and stiffness observer share one
/// state vector advanced by RK4. With zero-order hold the controller is
/// evaluated once per step at the step-start state. Throws SynthesisError.
RunOutcome simulate(const ScenarioConfig& config);

/// As simulate(), but a divergence is thrown as SimulationDivergence.
SimTrace run_scenario(const ScenarioConfig& config);

// -- metrics --------------------------------------------------------------

struct Metrics {
  double rms_error = 0.0;
  double max_abs_error = 0.0;
  double settling_time_2pct = 0.0;
  bool settled = true;
  double steady_state_error = 0.0;  // mean |e1| over the final 10 % of the run
  double window_error = 0.0;        // mean |e1| over the second half of the disturbance window
  double estimation_error = 0.0;    // RMS link/motor torque-estimate error, same span
  double stiffness_error = 0.0;     // mean |theta_ms - ref| over the final 10 %
};

Metrics compute_metrics(const SimTrace& trace);

// -- dual-representation check ---------------------------------------------

/// Random sum-of-sinusoid input and disturbances for open-loop comparisons.
struct OpenLoopExcitation {
  struct Tone {
    double amplitude, frequency, phase;
  };
  std::vector<Tone> input, link, motor;

  static OpenLoopExcitation random(std::uint64_t seed, int tones = 3);
  double u(double t) const;
  DisturbanceSample disturbance(double t) const;
};

/// Integrates A x + B u - D and Gamma x + B u - Pi(x) side by side and returns
/// the largest state deviation.
double representation_equivalence(const PlantParams& p, const OpenLoopExcitation& excitation,
                                  double duration_s, double step_s, Pi2Form form = Pi2Form::kLinkInertia);

}  // namespace vssea
