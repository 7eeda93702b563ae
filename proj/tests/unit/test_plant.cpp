#include <random>

#include <gtest/gtest.h>

#include "vssea/plant.hpp"

namespace vssea {
namespace {

PlantParams nonlinear() {
  PlantParams p;
  p.spring = SpringModel::kNonlinear;
  return p;
}

TEST(PlantParams, ValidateNamesField) {
  PlantParams p;
  EXPECT_NO_THROW(p.validate());
  p.j_l = 0.0;
  try {
    p.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("plant.j_l"), std::string::npos);
  }
  p = PlantParams{};
  p.b_e = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Reflection, GearSideConvention) {
  const GearSideInertia g = reflect_to_gear_side(4e-5, 1e-5, 0.1, 0.02, 100.0);
  EXPECT_DOUBLE_EQ(g.j_e, 1e4 * 4e-5 + 0.1);
  EXPECT_DOUBLE_EQ(g.b_e, 1e4 * 1e-5 + 0.02);
}

TEST(Spring, NominalStiffnessMatchesLinearConstant) {
  // Upsilon_tau = 2 k theta^3 makes the small-deflection stiffness equal k.
  const PlantParams p = nonlinear();
  const double theta = 0.1;
  EXPECT_NEAR(spring_stiffness(p, theta, 0.0), p.k, 1e-9);
  EXPECT_NEAR(spring_torque(p, theta, 1e-4) / 1e-4, p.k, 1e-5);
}

TEST(Spring, TorqueFormula) {
  const PlantParams p = nonlinear();
  EXPECT_DOUBLE_EQ(spring_torque(p, 0.05, 0.3), 0.2 / (0.05 * 0.05 * 0.05) * std::sin(0.15));
  EXPECT_DOUBLE_EQ(spring_stiffness(p, 0.05, 0.3), 0.1 / (0.05 * 0.05 * 0.05) * std::cos(0.15));
}

TEST(Spring, SymmetryAndDerivativeOnRandomPoints) {
  const PlantParams p = nonlinear();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> th(p.theta_ms_min, 0.4), dl(-2.5, 2.5);
  for (int i = 0; i < 1000; ++i) {
    const double t = th(rng), d = dl(rng);
    EXPECT_EQ(spring_torque(p, t, -d), -spring_torque(p, t, d));
    EXPECT_EQ(spring_stiffness(p, t, -d), spring_stiffness(p, t, d));
    const double h = 1e-4;
    const double fd = (spring_torque(p, t, d + h) - spring_torque(p, t, d - h)) / (2 * h);
    EXPECT_NEAR(fd, spring_stiffness(p, t, d), 1e-6 * std::abs(spring_stiffness(p, t, d)));
  }
}

TEST(Spring, GuardBelowMinimum) {
  const PlantParams p = nonlinear();
  EXPECT_THROW(spring_torque(p, 0.01, 0.1), DomainError);
  EXPECT_THROW(spring_stiffness(p, 0.0, 0.1), DomainError);
  EXPECT_THROW(transmitted_torque(PlantParams{}, 0.019, 0.1), DomainError);
  EXPECT_NO_THROW(spring_torque(p, p.theta_ms_min, 0.1));
}

TEST(LinearModel, MatchesJacobianOfEquilibriumDynamics) {
  const PlantParams p;
  const LinearModel m = linear_matrices(p);
  auto f = [&](const Eigen::Vector4d& x, double u) {
    const PlantState s = PlantState::from(x);
    return equilibrium_deriv(p, s, u, p.k * s.deflection(), DisturbanceSample{}).vec();
  };
  const double h = 1e-6;
  for (int j = 0; j < 4; ++j) {
    const Eigen::Vector4d dx = h * Eigen::Vector4d::Unit(j);
    const Eigen::Vector4d col = (f(dx, 0.0) - f(-dx, 0.0)) / (2 * h);
    EXPECT_LT((col - m.A.col(j)).cwiseAbs().maxCoeff(), 1e-6) << "column " << j;
  }
  const Eigen::Vector4d bcol = (f(Eigen::Vector4d::Zero(), h) - f(Eigen::Vector4d::Zero(), -h)) / (2 * h);
  EXPECT_LT((bcol - m.B).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_DOUBLE_EQ(m.A(1, 0), -p.k / p.j_l);
  EXPECT_DOUBLE_EQ(m.A(3, 3), -p.b_e / p.j_e);
}

TEST(LinearModel, DisturbanceVector) {
  const PlantParams p;
  const Eigen::Vector4d d = disturbance_vector(p, {0.5, 0.2, 9.0});
  EXPECT_EQ(d, Eigen::Vector4d(0.0, 0.5 / p.j_l, 0.0, 0.2 / p.j_e));
}

TEST(NonlinearPlant, SmallDeflectionApproachesLinearModel) {
  // With k = spring_stiffness(theta_ms, 0) the mismatch is the cubic term of sin.
  const PlantParams p = nonlinear();
  PlantParams lin = p;
  lin.spring = SpringModel::kLinear;
  const double theta_ms = 0.08;
  lin.k = spring_stiffness(p, theta_ms, 0.0);
  std::vector<double> gaps;
  for (double d : {1e-1, 1e-2, 1e-3}) {
    const PlantState x{0.0, 0.1, d, -0.2};
    const auto nl = nonlinear_deriv(p, x, {theta_ms, 0.0}, 0.3, 0.0, {});
    const Eigen::Vector4d linear = linear_matrices(lin).A * x.vec() + linear_matrices(lin).B * 0.3;
    gaps.push_back((nl.plant.vec() - linear).cwiseAbs().maxCoeff());
  }
  EXPECT_NEAR(gaps[0] / gaps[1], 1000.0, 50.0);
  EXPECT_NEAR(gaps[1] / gaps[2], 1000.0, 50.0);
}

TEST(NonlinearPlant, SpringLoadsStiffnessMechanism) {
  const PlantParams p = nonlinear();
  const PlantState x{0.0, 0.0, 0.2, 0.0};
  const auto d = nonlinear_deriv(p, x, {0.1, 0.0}, 0.0, 0.0, {});
  EXPECT_DOUBLE_EQ(d.tau_s, spring_torque(p, 0.1, 0.2));
  EXPECT_DOUBLE_EQ(d.stiffness.dtheta_ms, -d.tau_s / p.j_ms);
  EXPECT_DOUBLE_EQ(d.plant.dtheta_l, d.tau_s / p.j_l);
}

TEST(Energy, ConservedWithoutFriction) {
  PlantParams p;
  p.b_l = p.b_e = 0.0;
  Vector y = PlantState{0.3, -0.5, -0.2, 1.0}.vec();
  const double e0 = stored_energy(p, PlantState::from(y));
  const double h = 1e-4;
  double drift = 0.0;
  for (int i = 0; i < 100000; ++i) {
    y = rk4_step([&](double, const Vector& z) -> Vector {
      return linear_matrices(p).A * z;
    }, i * h, y, h);
    drift = std::max(drift, std::abs(stored_energy(p, PlantState::from(y)) - e0) / e0);
  }
  EXPECT_LT(drift, 1e-6);
}

}  // namespace
}  // namespace vssea
