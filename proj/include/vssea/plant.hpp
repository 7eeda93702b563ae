#pragma once

#include <Eigen/Dense>

#include "vssea/numkit.hpp"

namespace vssea {

enum class SpringModel { kLinear, kNonlinear };

/// Physical constants of the variable-stiffness series elastic actuator.
/// Equilibrium-motor quantities use the gear-side convention: J_e = N^2 J_me + J_g,
/// b_e = N^2 b_me + b_g, and the spring reaction on the motor equals the spring torque.
struct PlantParams {
  double j_l = 0.05;    // link inertia [kg m^2]
  double b_l = 0.02;    // link viscous friction [N m s/rad]
  double j_e = 0.5;     // reflected equilibrium-motor inertia [kg m^2]
  double b_e = 0.1;     // reflected equilibrium-motor friction [N m s/rad]
  double k = 100.0;     // linearized spring stiffness [N m/rad]
  double gear_ratio = 100.0;
  double j_ms = 0.01;   // stiffness-motor inertia [kg m^2]
  double b_ms = 0.005;  // stiffness-motor friction [N m s/rad]
  double upsilon_tau = 0.2;
  double upsilon_k = 0.1;
  double theta_ms_min = 0.02;  // [rad]
  SpringModel spring = SpringModel::kLinear;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct GearSideInertia {
  double j_e;
  double b_e;
};

/// Reflects motor-side inertia/friction and gearbox-side values to the gear side.
GearSideInertia reflect_to_gear_side(double j_me, double b_me, double j_g, double b_g, double gear_ratio);

/// [theta_l, dtheta_l, theta_e, dtheta_e].
struct PlantState {
  double theta_l = 0.0;
  double dtheta_l = 0.0;
  double theta_e = 0.0;
  double dtheta_e = 0.0;

  Eigen::Vector4d vec() const { return {theta_l, dtheta_l, theta_e, dtheta_e}; }
  static PlantState from(const Eigen::Ref<const Eigen::Vector4d>& v) { return {v[0], v[1], v[2], v[3]}; }
  double deflection() const { return theta_e - theta_l; }
};

struct StiffnessState {
  double theta_ms = 0.0;
  double dtheta_ms = 0.0;
};

/// External/pseudo disturbance torques [N m].
struct DisturbanceSample {
  double link = 0.0;       // tau_l^d
  double motor = 0.0;      // tau_e^d
  double stiffness = 0.0;  // tau_ms^d
};

/// Nonlinear spring torque (Y_tau / theta_ms^3) sin(delta / 2) with delta the
/// spring deflection theta_e - theta_l. Throws DomainError below theta_ms_min.
double spring_torque(const PlantParams& p, double theta_ms, double deflection);

/// (Y_k / theta_ms^3) cos(delta / 2).
double spring_stiffness(const PlantParams& p, double theta_ms, double deflection);

/// Link and equilibrium-motor accelerations for a given spring torque.
PlantState equilibrium_deriv(const PlantParams& p, const PlantState& x, double tau_e, double tau_s,
                             const DisturbanceSample& d);

StiffnessState stiffness_mech_deriv(const PlantParams& p, const StiffnessState& s, double tau_ms,
                                    double tau_s, double tau_ms_d);

struct LinearModel {
  Eigen::Matrix4d A;
  Eigen::Vector4d B;
};

/// Linear-spring state-space model x' = A x + B u - D.
LinearModel linear_matrices(const PlantParams& p);

/// Disturbance vector D = [0, tau_l^d / J_l, 0, tau_e^d / J_e].
Eigen::Vector4d disturbance_vector(const PlantParams& p, const DisturbanceSample& d);

struct PlantDerivative {
  PlantState plant;
  StiffnessState stiffness;
  double tau_s = 0.0;
};

/// Full actuator: one spring torque loads both the link/motor pair and the
/// stiffness mechanism. The linear spring model ignores theta_ms in the torque
/// but still enforces the theta_ms_min guard.
PlantDerivative nonlinear_deriv(const PlantParams& p, const PlantState& x, const StiffnessState& s,
                                double tau_e, double tau_ms, const DisturbanceSample& d);

/// Spring torque under the configured spring model.
double transmitted_torque(const PlantParams& p, double theta_ms, double deflection);

/// 1/2 J_l w_l^2 + 1/2 J_e w_e^2 + 1/2 k delta^2 (linear spring).
double stored_energy(const PlantParams& p, const PlantState& x);

}  // namespace vssea
