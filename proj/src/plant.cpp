#include "vssea/plant.hpp"

#include <cmath>
#include <string>

namespace vssea {

namespace {

void require(bool ok, const char* field, const char* rule) {
  if (!ok) throw ConfigError(std::string("plant.") + field + ": " + rule);
}

void guard_theta_ms(const PlantParams& p, double theta_ms) {
  if (!(theta_ms >= p.theta_ms_min)) {
    throw DomainError("stiffness motor position " + std::to_string(theta_ms) +
                      " rad is below theta_ms_min " + std::to_string(p.theta_ms_min));
  }
}

}  // namespace

void PlantParams::validate() const {
  require(std::isfinite(j_l) && j_l > 0.0, "j_l", "must be > 0");
  require(std::isfinite(j_e) && j_e > 0.0, "j_e", "must be > 0");
  require(std::isfinite(j_ms) && j_ms > 0.0, "j_ms", "must be > 0");
  require(std::isfinite(b_l) && b_l >= 0.0, "b_l", "must be >= 0");
  require(std::isfinite(b_e) && b_e >= 0.0, "b_e", "must be >= 0");
  require(std::isfinite(b_ms) && b_ms >= 0.0, "b_ms", "must be >= 0");
  require(std::isfinite(k) && k > 0.0, "k", "must be > 0");
  require(std::isfinite(gear_ratio) && gear_ratio >= 1.0, "gear_ratio", "must be >= 1");
  require(std::isfinite(theta_ms_min) && theta_ms_min > 0.0, "theta_ms_min", "must be > 0");
  require(std::isfinite(upsilon_tau) && upsilon_tau > 0.0, "upsilon_tau", "must be > 0");
  require(std::isfinite(upsilon_k) && upsilon_k > 0.0, "upsilon_k", "must be > 0");
}

GearSideInertia reflect_to_gear_side(double j_me, double b_me, double j_g, double b_g, double gear_ratio) {
  const double n2 = gear_ratio * gear_ratio;
  return {n2 * j_me + j_g, n2 * b_me + b_g};
}

double spring_torque(const PlantParams& p, double theta_ms, double deflection) {
  guard_theta_ms(p, theta_ms);
  return p.upsilon_tau / (theta_ms * theta_ms * theta_ms) * std::sin(0.5 * deflection);
}

double spring_stiffness(const PlantParams& p, double theta_ms, double deflection) {
  guard_theta_ms(p, theta_ms);
  return p.upsilon_k / (theta_ms * theta_ms * theta_ms) * std::cos(0.5 * deflection);
}

double transmitted_torque(const PlantParams& p, double theta_ms, double deflection) {
  if (p.spring == SpringModel::kNonlinear) return spring_torque(p, theta_ms, deflection);
  guard_theta_ms(p, theta_ms);
  return p.k * deflection;
}

PlantState equilibrium_deriv(const PlantParams& p, const PlantState& x, double tau_e, double tau_s,
                             const DisturbanceSample& d) {
  PlantState dx;
  dx.theta_l = x.dtheta_l;
  dx.dtheta_l = (tau_s - p.b_l * x.dtheta_l - d.link) / p.j_l;
  dx.theta_e = x.dtheta_e;
  dx.dtheta_e = (tau_e - tau_s - p.b_e * x.dtheta_e - d.motor) / p.j_e;
  return dx;
}

StiffnessState stiffness_mech_deriv(const PlantParams& p, const StiffnessState& s, double tau_ms,
                                    double tau_s, double tau_ms_d) {
  return {s.dtheta_ms, (tau_ms - tau_s - p.b_ms * s.dtheta_ms - tau_ms_d) / p.j_ms};
}

LinearModel linear_matrices(const PlantParams& p) {
  LinearModel m;
  m.A << 0.0, 1.0, 0.0, 0.0,
         -p.k / p.j_l, -p.b_l / p.j_l, p.k / p.j_l, 0.0,
         0.0, 0.0, 0.0, 1.0,
         p.k / p.j_e, 0.0, -p.k / p.j_e, -p.b_e / p.j_e;
  m.B << 0.0, 0.0, 0.0, 1.0 / p.j_e;
  return m;
}

Eigen::Vector4d disturbance_vector(const PlantParams& p, const DisturbanceSample& d) {
  return {0.0, d.link / p.j_l, 0.0, d.motor / p.j_e};
}

PlantDerivative nonlinear_deriv(const PlantParams& p, const PlantState& x, const StiffnessState& s,
                                double tau_e, double tau_ms, const DisturbanceSample& d) {
  PlantDerivative out;
  out.tau_s = transmitted_torque(p, s.theta_ms, x.deflection());
  out.plant = equilibrium_deriv(p, x, tau_e, out.tau_s, d);
  out.stiffness = stiffness_mech_deriv(p, s, tau_ms, out.tau_s, d.stiffness);
  return out;
}

double stored_energy(const PlantParams& p, const PlantState& x) {
  const double delta = x.deflection();
  return 0.5 * (p.j_l * x.dtheta_l * x.dtheta_l + p.j_e * x.dtheta_e * x.dtheta_e + p.k * delta * delta);
}

}  // namespace vssea
