#pragma once

#include <Eigen/Dense>

#include "vssea/plant.hpp"

namespace vssea {

/// Disturbance vector D (units of x', i.e. rad/s^2 in channels 2 and 4) with
/// its first and second time derivatives. Either an observer output or the
/// exact simulation truth; Pi-term reconstruction treats both identically.
struct DisturbanceEstimate {
  Eigen::Vector4d value = Eigen::Vector4d::Zero();
  Eigen::Vector4d rate = Eigen::Vector4d::Zero();
  Eigen::Vector4d accel = Eigen::Vector4d::Zero();

  double link_torque(const PlantParams& p) const { return p.j_l * value[1]; }
  double motor_torque(const PlantParams& p) const { return p.j_e * value[3]; }

  /// Builds the estimate from torque-level samples and their derivatives.
  static DisturbanceEstimate from_torques(const PlantParams& p, const DisturbanceSample& d,
                                          const DisturbanceSample& d_rate,
                                          const DisturbanceSample& d_accel) {
    DisturbanceEstimate e;
    e.value = disturbance_vector(p, d);
    e.rate = disturbance_vector(p, d_rate);
    e.accel = disturbance_vector(p, d_accel);
    return e;
  }
};

}  // namespace vssea
