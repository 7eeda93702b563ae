#include "vssea/observer.hpp"

#include <cmath>
#include <stdexcept>

namespace vssea {

bool DobGains::hurwitz() const {
  return g0 > 0.0 && g1 > 0.0 && g2 > 0.0 && g0 * g1 > g2 && std::isfinite(g0 * g1 * g2);
}

DobGains design_gains(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("design_gains: bandwidth must be positive");
  }
  const double w = bandwidth;
  return {3.0 * w, 3.0 * w * w, w * w * w};
}

ObserverMatrices observer_matrices(const Eigen::Matrix4d& A, const Eigen::Vector4d& B, const DobGains& g) {
  if (!g.hurwitz()) throw std::invalid_argument("observer_matrices: gains are not Hurwitz");
  const Eigen::Matrix4d I = Eigen::Matrix4d::Identity();
  const Eigen::Matrix4d shifted = A + g.g0 * I;
  ObserverMatrices m;
  m.la.setZero();
  m.la.block<4, 4>(0, 0) = -g.g0 * I;
  m.la.block<4, 4>(4, 0) = -g.g1 * I;
  m.la.block<4, 4>(8, 0) = -g.g2 * I;
  m.la.block<4, 4>(0, 4) = I;
  m.la.block<4, 4>(4, 8) = I;
  m.lu << g.g0 * B, g.g1 * B, g.g2 * B;
  m.lx.block<4, 4>(0, 0) = g.g0 * shifted - g.g1 * I;
  m.lx.block<4, 4>(4, 0) = g.g1 * shifted - g.g2 * I;
  m.lx.block<4, 4>(8, 0) = g.g2 * shifted;
  return m;
}

DobState observer_deriv(const DobState& a_hat, double u, const Eigen::Vector4d& x, const ObserverMatrices& m) {
  return m.la * a_hat + m.lu * u + m.lx * x;
}

DisturbanceEstimate extract_estimates(const DobState& a_hat, const Eigen::Vector4d& x, const DobGains& g,
                                      bool project) {
  DisturbanceEstimate e;
  e.value = a_hat.segment<4>(0) - g.g0 * x;
  e.rate = a_hat.segment<4>(4) - g.g1 * x;
  e.accel = a_hat.segment<4>(8) - g.g2 * x;
  if (project) {
    for (auto* v : {&e.value, &e.rate, &e.accel}) {
      (*v)[0] = 0.0;
      (*v)[2] = 0.0;
    }
  }
  return e;
}

DobState auxiliary_from_truth(const DisturbanceEstimate& truth, const Eigen::Vector4d& x, const DobGains& g) {
  DobState a;
  a << truth.value + g.g0 * x, truth.rate + g.g1 * x, truth.accel + g.g2 * x;
  return a;
}

}  // namespace vssea
