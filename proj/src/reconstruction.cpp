#include "vssea/reconstruction.hpp"

namespace vssea {

LinearModel gamma_model(double j_e) {
  LinearModel m;
  m.A.setZero();
  m.A(0, 1) = m.A(1, 2) = m.A(2, 3) = 1.0;
  m.B << 0.0, 0.0, 0.0, 1.0 / j_e;
  return m;
}

double pi2(const PlantParams& p, const PlantState& x, double tau_l_d, Pi2Form form) {
  const double num = p.j_l * x.theta_e + p.k * (x.theta_l - x.theta_e) + p.b_l * x.dtheta_l + tau_l_d;
  return num / (form == Pi2Form::kLinkInertia ? p.j_l : p.j_e);
}

double pi4(const PlantParams& p, const PlantState& x, double tau_e_d) {
  return (p.k * (x.theta_e - x.theta_l) + p.b_e * x.dtheta_e + tau_e_d) / p.j_e;
}

Pi2Derivatives pi2_derivatives(const PlantParams& p, const PlantState& x, double tau_e,
                               const DisturbanceEstimate& d) {
  const double delta = x.theta_e - x.theta_l;
  const double link_acc = (p.k * delta - p.b_l * x.dtheta_l) / p.j_l - d.value[1];
  const double motor_acc = (tau_e - p.k * delta - p.b_e * x.dtheta_e) / p.j_e - d.value[3];
  const double link_jerk = (p.k * (x.dtheta_e - x.dtheta_l) - p.b_l * link_acc) / p.j_l - d.rate[1];
  const double link_snap = (p.k * (motor_acc - link_acc) - p.b_l * link_jerk) / p.j_l - d.accel[1];
  return {x.dtheta_e - link_jerk, motor_acc - link_snap};
}

PiTerms pi_terms(const PlantParams& p, const PlantState& x, double tau_e, const DisturbanceEstimate& d,
                 Pi2Form form) {
  const auto derivs = pi2_derivatives(p, x, tau_e, d);
  return {pi2(p, x, d.link_torque(p), form), derivs.first, derivs.second, pi4(p, x, d.motor_torque(p))};
}

ErrorState error_state(const ReferencePoint& ref, const PlantState& x, double pi2_hat, double dpi2_hat) {
  return {ref.r - x.theta_l, ref.dr - x.dtheta_l, ref.ddr - x.theta_e + pi2_hat,
          ref.dddr - x.dtheta_e + dpi2_hat};
}

Eigen::Vector4d gamma_form_deriv(const PlantParams& p, const PlantState& x, double u,
                                 const DisturbanceSample& d, Pi2Form form) {
  const auto g = gamma_model(p.j_e);
  const Eigen::Vector4d pi(0.0, pi2(p, x, d.link, form), 0.0, pi4(p, x, d.motor));
  return g.A * x.vec() + g.B * u - pi;
}

Eigen::Vector4d linear_form_deriv(const PlantParams& p, const PlantState& x, double u,
                                  const DisturbanceSample& d) {
  const auto m = linear_matrices(p);
  return m.A * x.vec() + m.B * u - disturbance_vector(p, d);
}

}  // namespace vssea
