#pragma once

#include <Eigen/Dense>

#include "vssea/disturbance_estimate.hpp"
#include "vssea/plant.hpp"

namespace vssea {

// Second-order disturbance observer.
//
// Auxiliary variables a0 = D + g0 x, a1 = D' + g1 x, a2 = D'' + g2 x turn the
// unknown-input problem into a linear system driven by u and x. The observer
// a_hat' = La a_hat + Lu u + Lx x neglects D''', so each channel's estimation
// error follows lambda^3 + g0 lambda^2 + g1 lambda + g2.

/// Observer gains [1/s, 1/s^2, 1/s^3].
struct DobGains {
  double g0 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;

  /// All positive and g0 g1 > g2.
  bool hurwitz() const;
};

/// Triple pole at -bandwidth: (s + w)^3. Throws std::invalid_argument for w <= 0.
DobGains design_gains(double bandwidth);

using DobState = Eigen::Matrix<double, 12, 1>;

struct ObserverMatrices {
  Eigen::Matrix<double, 12, 12> la;
  Eigen::Matrix<double, 12, 1> lu;
  Eigen::Matrix<double, 12, 4> lx;
};

/// Throws std::invalid_argument when the gains fail the Hurwitz test.
ObserverMatrices observer_matrices(const Eigen::Matrix4d& A, const Eigen::Vector4d& B, const DobGains& g);

DobState observer_deriv(const DobState& a_hat, double u, const Eigen::Vector4d& x, const ObserverMatrices& m);

/// Inverts the auxiliary-variable definitions. With `project` set, channels 1
/// and 3 (no disturbance enters there) are forced to zero.
DisturbanceEstimate extract_estimates(const DobState& a_hat, const Eigen::Vector4d& x, const DobGains& g,
                                      bool project = true);

/// Auxiliary vector corresponding to an exact disturbance history (used for
/// initialisation and by tests).
DobState auxiliary_from_truth(const DisturbanceEstimate& truth, const Eigen::Vector4d& x, const DobGains& g);

}  // namespace vssea
