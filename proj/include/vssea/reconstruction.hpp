#pragma once

#include <Eigen/Dense>

#include "vssea/disturbance_estimate.hpp"
#include "vssea/plant.hpp"

namespace vssea {

// Integrator-chain reparameterisation of the linear actuator model.
//
// With Gamma the 4x4 shift matrix, x' = Gamma x + B u - Pi, where
//   Pi_2 = theta_e - theta_l''  and  Pi_4 = u / J_e - theta_e''.
// For the link error e_1 = r - theta_l the error vector
//   e = [r - theta_l, r' - theta_l', r'' - theta_l'', r''' - theta_l''']
// obeys e' = Gamma e - B u + [0, 0, 0, r'''' + Pi~_4], Pi~_4 = Pi_2'' + Pi_4,
// so every disturbance enters through the input channel.
//
// Pi_2'' depends on theta_e'', and therefore on the applied input; callers that
// close the loop must treat Pi~_4 as affine in u (see control.hpp).

/// Reference value and derivatives through fourth order.
struct ReferencePoint {
  double r = 0.0;
  double dr = 0.0;
  double ddr = 0.0;
  double dddr = 0.0;
  double ddddr = 0.0;
};

struct ErrorState {
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double e4 = 0.0;

  Eigen::Vector4d vec() const { return {e1, e2, e3, e4}; }
};

struct PiTerms {
  double pi2 = 0.0;
  double dpi2 = 0.0;
  double ddpi2 = 0.0;
  double pi4 = 0.0;
};

/// Selects the Pi_2 normalisation. Only kLinkInertia is consistent with the
/// plant; kEquilibriumInertia exists so validation can show that the
/// representation-equivalence check detects the wrong denominator.
enum class Pi2Form { kLinkInertia, kEquilibriumInertia };

/// Gamma (pure shift) and B = [0, 0, 0, 1/J_e].
LinearModel gamma_model(double j_e);

double pi2(const PlantParams& p, const PlantState& x, double tau_l_d,
           Pi2Form form = Pi2Form::kLinkInertia);

double pi4(const PlantParams& p, const PlantState& x, double tau_e_d);

struct Pi2Derivatives {
  double first = 0.0;
  double second = 0.0;
};

/// Model-based chain rule: all link/motor accelerations and jerks come from the
/// linear-spring model driven by the applied input and the disturbance estimate.
Pi2Derivatives pi2_derivatives(const PlantParams& p, const PlantState& x, double tau_e,
                               const DisturbanceEstimate& d);

PiTerms pi_terms(const PlantParams& p, const PlantState& x, double tau_e, const DisturbanceEstimate& d,
                 Pi2Form form = Pi2Form::kLinkInertia);

/// Measurable error state: e3 = r'' - theta_e + Pi_2, e4 = r''' - theta_e' + Pi_2'.
ErrorState error_state(const ReferencePoint& ref, const PlantState& x, double pi2_hat, double dpi2_hat);

inline double matched_disturbance(double ddpi2, double pi4) { return ddpi2 + pi4; }

/// Right-hand side Gamma x + B u - Pi(x) with Pi evaluated from the exact disturbance.
Eigen::Vector4d gamma_form_deriv(const PlantParams& p, const PlantState& x, double u,
                                 const DisturbanceSample& d, Pi2Form form = Pi2Form::kLinkInertia);

/// Right-hand side A x + B u - D of the linear-spring model.
Eigen::Vector4d linear_form_deriv(const PlantParams& p, const PlantState& x, double u,
                                  const DisturbanceSample& d);

}  // namespace vssea
