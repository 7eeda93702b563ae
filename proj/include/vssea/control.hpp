#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "vssea/numkit.hpp"
#include "vssea/plant.hpp"
#include "vssea/reconstruction.hpp"

namespace vssea {

/// State-feedback gain K = [k1 k2 k3 k4] acting on the error chain.
struct SfbGains {
  Eigen::Vector4d k = Eigen::Vector4d::Zero();

  /// s^4 + k4 s^3 + k3 s^2 + k2 s + k1.
  Polynomial closed_loop_polynomial() const;
  bool hurwitz() const { return routh_hurwitz(closed_loop_polynomial()); }
};

/// Sliding surface S = [s1 s2 s3 1], switching gain rho and boundary layer epsilon.
struct SmcParams {
  Eigen::Vector3d s = Eigen::Vector3d(512.0, 192.0, 24.0);
  double rho = 500.0;
  double epsilon = 1.0;

  Eigen::Vector4d surface() const { return {s[0], s[1], s[2], 1.0}; }
  /// s3 > 0, s^3 + s3 s^2 + s2 s + s1 Hurwitz, rho > 0, epsilon >= 0.
  bool valid() const;
};

struct StiffnessGains {
  double kp = 20.0;
  double kd = 1.0;
  double g_ms = 50.0;

  bool valid() const { return kp > 0.0 && kd > 0.0 && g_ms > 0.0; }
};

/// How the matched-disturbance estimate enters the state-feedback law.
/// kInverted flips the sign and exists only to demonstrate that the
/// pole-fidelity check catches it.
enum class Compensation { kOff, kOn, kInverted };

/// tau_e = J_e (K^T e_hat + r'''' + c Pi~_4_hat), c = 1 (on), 0 (off), -1 (inverted).
double sfb_control(const SfbGains& gains, const ErrorState& e_hat, double pi4_tilde_hat, double r4,
                   double j_e, Compensation compensation);

double sliding_variable(const SmcParams& params, const ErrorState& e);

/// sgn(sigma) for epsilon = 0, otherwise clamp(sigma / epsilon, -1, 1).
double smooth_sign(double sigma, double epsilon);

/// tau_e = J_e rho sat(sigma_hat / eps) + J_e delta_hat,
/// delta_hat = r'''' + Pi_2''_hat + Pi_4_hat + s1 e2 + s2 e3 + s3 e4.
double smc_control(const SmcParams& params, const ErrorState& e_hat, double ddpi2_hat, double pi4_hat,
                   double r4, double j_e);

/// First-order disturbance observer on the stiffness mechanism. The estimate
/// d_hat = q - g J_ms w tracks the lumped torque tau_ms - b_ms w - J_ms w'
/// (spring reaction plus tau_ms^d) through a first-order lag of bandwidth g.
struct ScalarDobState {
  double q = 0.0;
};

double scalar_dob_estimate(const ScalarDobState& state, double dtheta_ms, const PlantParams& p, double g_ms);

double scalar_dob_deriv(const ScalarDobState& state, double dtheta_ms, double tau_ms, const PlantParams& p,
                        double g_ms);

struct ScalarDobStep {
  ScalarDobState state;
  double estimate = 0.0;
};

/// Exact zero-order-hold update over one step of length h with dtheta_ms and
/// tau_ms held; returns the new state and the estimate evaluated at it.
ScalarDobStep scalar_dob_update(const ScalarDobState& state, double dtheta_ms, double tau_ms,
                                const PlantParams& p, double g_ms, double h);

/// K_d (w_ref - w) + K_p (theta_ref - theta) + tau_ms_hat.
double stiffness_control(const StiffnessGains& gains, double theta_ms_ref, double dtheta_ms_ref,
                         const StiffnessState& s, double tau_ms_d_hat);

/// Fixed point u = f(u) for a law f that is affine in its argument. The
/// matched disturbance contains Pi_2'', which depends on the applied input, so
/// both robust laws are solved this way instead of lagging u by one sample.
template <class F>
double resolve_affine_input(F&& law) {
  const double f0 = law(0.0);
  const double slope = law(1.0) - f0;
  const double denom = 1.0 - slope;
  if (!(std::abs(denom) > 1e-12)) throw SynthesisError("control law has no unique input (unit loop gain)");
  return f0 / denom;
}

// -- gain synthesis -------------------------------------------------------

struct LyapunovCertificate {
  Matrix p;
  double residual = 0.0;  // ||A^T P + P A + Q||_F / ||Q||_F
  bool positive_definite = false;
};

/// Lyapunov certificate for Gamma - b K^T with Q = I.
LyapunovCertificate certify_gains(const SfbGains& gains);

/// Closed-loop error matrix Gamma - b K^T with b = [0,0,0,1].
Eigen::Matrix4d closed_loop_error_matrix(const SfbGains& gains);

struct SfbSynthesis {
  SfbGains gains;
  std::string method;  // "pole-placement" or "lqr"
  Polynomial closed_loop;
  int care_iterations = 0;
  double care_residual = 0.0;
  LyapunovCertificate certificate;
};

/// Pole placement on the error chain. Throws SynthesisError for poles that are
/// not conjugate-closed or not strictly stable.
SfbSynthesis synthesize_pole_placement(std::span<const std::complex<double>> poles);

/// LQR on (Gamma, [0,0,0,1]) with diagonal state weight and scalar input weight.
SfbSynthesis synthesize_lqr(const Eigen::Vector4d& q_diag, double r);

}  // namespace vssea
