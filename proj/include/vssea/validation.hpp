#pragma once

#include <string>
#include <vector>

#include "vssea/control.hpp"
#include "vssea/reconstruction.hpp"

namespace vssea {

/// Deliberate defects used to show that the suite can fail.
struct FaultInjection {
  Pi2Form pi2_form = Pi2Form::kLinkInertia;
  Compensation compensation = Compensation::kOn;
};

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Every module invariant, in module order.
std::vector<CheckResult> run_validation(const FaultInjection& fault = {});

/// Fixed-width table plus a closing "passed N/M" line.
std::string format_validation(const std::vector<CheckResult>& results);

// Individual measurements shared with the tests.

/// Largest |e_sim - e_lin| over the run for the exact-cancellation closed loop
/// against expm((Gamma - b K^T) t) e0, divided by max(1, |e0|_inf).
double nominal_pole_fidelity(Compensation compensation, double duration_s = 3.0);

/// Norm of the disturbance-value estimate error D_hat - D.
struct DobConvergence {
  double initial_error = 0.0;
  double error_at_10_over_omega = 0.0;
  double fitted_rate = 0.0;             // from the log-envelope slope
};
/// Observer driven by a quadratic-in-time disturbance on the linear plant.
DobConvergence dob_polynomial_convergence(double bandwidth);

/// Steady-state RMS of the link-torque estimate error for a sinusoidal
/// disturbance at `disturbance_frequency`.
double dob_sinusoid_error(double bandwidth, double disturbance_frequency);

}  // namespace vssea
