#include "vssea/control.hpp"

#include <algorithm>
#include <stdexcept>

namespace vssea {

Polynomial SfbGains::closed_loop_polynomial() const {
  return Polynomial({k[0], k[1], k[2], k[3], 1.0});
}

bool SmcParams::valid() const {
  if (!(s[2] > 0.0) || !(rho > 0.0) || !(epsilon >= 0.0)) return false;
  return routh_hurwitz(Polynomial({s[0], s[1], s[2], 1.0}));
}

double sfb_control(const SfbGains& gains, const ErrorState& e_hat, double pi4_tilde_hat, double r4,
                   double j_e, Compensation compensation) {
  double c = 0.0;
  switch (compensation) {
    case Compensation::kOff: c = 0.0; break;
    case Compensation::kOn: c = 1.0; break;
    case Compensation::kInverted: c = -1.0; break;
  }
  return j_e * (gains.k.dot(e_hat.vec()) + r4 + c * pi4_tilde_hat);
}

double sliding_variable(const SmcParams& params, const ErrorState& e) {
  return params.surface().dot(e.vec());
}

double smooth_sign(double sigma, double epsilon) {
  if (epsilon <= 0.0) return sigma > 0.0 ? 1.0 : (sigma < 0.0 ? -1.0 : 0.0);
  return std::clamp(sigma / epsilon, -1.0, 1.0);
}

double smc_control(const SmcParams& params, const ErrorState& e_hat, double ddpi2_hat, double pi4_hat,
                   double r4, double j_e) {
  const double sigma_hat = sliding_variable(params, e_hat);
  const double delta_hat = r4 + ddpi2_hat + pi4_hat + params.s[0] * e_hat.e2 + params.s[1] * e_hat.e3 +
                           params.s[2] * e_hat.e4;
  return j_e * params.rho * smooth_sign(sigma_hat, params.epsilon) + j_e * delta_hat;
}

double scalar_dob_estimate(const ScalarDobState& state, double dtheta_ms, const PlantParams& p, double g_ms) {
  return state.q - g_ms * p.j_ms * dtheta_ms;
}

double scalar_dob_deriv(const ScalarDobState& state, double dtheta_ms, double tau_ms, const PlantParams& p,
                        double g_ms) {
  return g_ms * (tau_ms - p.b_ms * dtheta_ms + g_ms * p.j_ms * dtheta_ms - state.q);
}

ScalarDobStep scalar_dob_update(const ScalarDobState& state, double dtheta_ms, double tau_ms,
                                const PlantParams& p, double g_ms, double h) {
  const double target = tau_ms - p.b_ms * dtheta_ms + g_ms * p.j_ms * dtheta_ms;
  const double decay = std::exp(-g_ms * h);
  ScalarDobStep out;
  out.state.q = target + (state.q - target) * decay;
  out.estimate = scalar_dob_estimate(out.state, dtheta_ms, p, g_ms);
  return out;
}

double stiffness_control(const StiffnessGains& gains, double theta_ms_ref, double dtheta_ms_ref,
                         const StiffnessState& s, double tau_ms_d_hat) {
  return gains.kd * (dtheta_ms_ref - s.dtheta_ms) + gains.kp * (theta_ms_ref - s.theta_ms) + tau_ms_d_hat;
}

Eigen::Matrix4d closed_loop_error_matrix(const SfbGains& gains) {
  Eigen::Matrix4d m = gamma_model(1.0).A;
  m.row(3) -= gains.k.transpose();
  return m;
}

LyapunovCertificate certify_gains(const SfbGains& gains) {
  const Matrix acl = closed_loop_error_matrix(gains);
  const Matrix q = Matrix::Identity(4, 4);
  LyapunovCertificate cert;
  cert.p = solve_lyapunov(acl, q);
  cert.residual = lyapunov_residual(acl, cert.p, q) / q.norm();
  cert.positive_definite = is_positive_definite(cert.p);
  return cert;
}

SfbSynthesis synthesize_pole_placement(std::span<const std::complex<double>> poles) {
  SfbSynthesis out;
  out.method = "pole-placement";
  try {
    out.gains.k = pole_place_chain(poles);
  } catch (const std::invalid_argument& e) {
    throw SynthesisError(std::string("pole placement: ") + e.what());
  }
  out.closed_loop = out.gains.closed_loop_polynomial();
  if (!out.gains.hurwitz()) throw SynthesisError("pole placement: closed loop is not Hurwitz");
  out.certificate = certify_gains(out.gains);
  if (!out.certificate.positive_definite) throw SynthesisError("pole placement: Lyapunov P not positive definite");
  return out;
}

SfbSynthesis synthesize_lqr(const Eigen::Vector4d& q_diag, double r) {
  if (!(q_diag.array() >= 0.0).all() || !(r > 0.0)) {
    throw SynthesisError("lqr: weights must satisfy Q >= 0 and R > 0");
  }
  const auto chain = gamma_model(1.0);
  Matrix q = q_diag.asDiagonal();
  Matrix rm(1, 1);
  rm(0, 0) = r;
  const CareSolution care = solve_care(chain.A, chain.B, q, rm);
  SfbSynthesis out;
  out.method = "lqr";
  out.gains.k = care.K.row(0).transpose();
  out.care_iterations = care.iterations;
  out.care_residual = care.relative_residual;
  out.closed_loop = out.gains.closed_loop_polynomial();
  if (!out.gains.hurwitz()) throw SynthesisError("lqr: closed loop is not Hurwitz");
  out.certificate = certify_gains(out.gains);
  if (!out.certificate.positive_definite) throw SynthesisError("lqr: Lyapunov P not positive definite");
  return out;
}

}  // namespace vssea
