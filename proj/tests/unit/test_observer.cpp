#include <functional>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "vssea/observer.hpp"
#include "vssea/validation.hpp"

namespace vssea {
namespace {

struct Truth {
  DisturbanceSample d, rate, accel;
};

// Plant and observer on the linear model; returns the estimate history.
std::vector<std::pair<double, DisturbanceEstimate>> run(double w, double duration, double h,
                                                        const std::function<Truth(double)>& truth,
                                                        bool start_exact) {
  const PlantParams p;
  const LinearModel m = linear_matrices(p);
  const DobGains g = design_gains(w);
  const ObserverMatrices om = observer_matrices(m.A, m.B, g);
  auto u = [](double t) { return std::cos(2 * t); };
  Vector z = Vector::Zero(16);
  z.head<4>() << 0.1, 0.0, -0.1, 0.2;
  const Truth t0 = truth(0.0);
  z.tail<12>() = auxiliary_from_truth(
      start_exact ? DisturbanceEstimate::from_torques(p, t0.d, t0.rate, t0.accel) : DisturbanceEstimate{},
      z.head<4>(), g);
  auto f = [&](double t, const Vector& y) -> Vector {
    Vector dy(16);
    dy.head<4>() = linear_form_deriv(p, PlantState::from(y.head<4>()), u(t), truth(t).d);
    dy.tail<12>() = observer_deriv(y.tail<12>(), u(t), y.head<4>(), om);
    return dy;
  };
  std::vector<std::pair<double, DisturbanceEstimate>> out;
  const long n = std::lround(duration / h);
  for (long i = 0; i <= n; ++i) {
    out.emplace_back(i * h, extract_estimates(z.tail<12>(), z.head<4>(), g));
    if (i < n) z = rk4_step(f, i * h, z, h);
  }
  return out;
}

Truth quadratic(double t) {
  return {{0.3 + 0.2 * t - 0.05 * t * t, 0.1 - 0.1 * t + 0.02 * t * t, 0.0},
          {0.2 - 0.1 * t, -0.1 + 0.04 * t, 0.0},
          {-0.1, 0.04, 0.0}};
}

TEST(Gains, TriplePoleDesign) {
  const DobGains g = design_gains(20.0);
  EXPECT_DOUBLE_EQ(g.g0, 60.0);
  EXPECT_DOUBLE_EQ(g.g1, 1200.0);
  EXPECT_DOUBLE_EQ(g.g2, 8000.0);
  EXPECT_TRUE(g.hurwitz());
  EXPECT_THROW(design_gains(0.0), std::invalid_argument);
  EXPECT_THROW(design_gains(-1.0), std::invalid_argument);
}

TEST(Gains, HurwitzCondition) {
  EXPECT_FALSE((DobGains{1.0, 2.0, 2.0}).hurwitz());  // g0 g1 == g2: borderline
  EXPECT_TRUE((DobGains{1.0, 2.0, 1.9}).hurwitz());
  EXPECT_FALSE((DobGains{-1.0, 2.0, 1.0}).hurwitz());
  const PlantParams p;
  const LinearModel m = linear_matrices(p);
  EXPECT_THROW(observer_matrices(m.A, m.B, DobGains{1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST(Estimates, AuxiliaryRoundTrip) {
  const PlantParams p;
  const DobGains g = design_gains(30.0);
  const Eigen::Vector4d x(0.1, 0.2, 0.3, 0.4);
  const Truth t = quadratic(0.7);
  const DisturbanceEstimate truth = DisturbanceEstimate::from_torques(p, t.d, t.rate, t.accel);
  const DisturbanceEstimate back = extract_estimates(auxiliary_from_truth(truth, x, g), x, g);
  EXPECT_LT((back.value - truth.value).norm(), 1e-12);
  EXPECT_LT((back.rate - truth.rate).norm(), 1e-9);
  EXPECT_LT((back.accel - truth.accel).norm(), 1e-7);
}

TEST(Convergence, ExactInitialisationStaysExactForQuadratic) {
  const PlantParams p;
  const auto hist = run(20.0, 1.0, 1e-3, quadratic, true);
  for (const auto& [t, est] : hist) {
    const Truth tr = quadratic(t);
    EXPECT_NEAR(est.link_torque(p), tr.d.link, 1e-9);
    EXPECT_NEAR(est.motor_torque(p), tr.d.motor, 1e-9);
  }
}

TEST(Convergence, QuadraticDisturbanceAfterOneSecond) {
  // w = 20, D''' = 0: after 1 s the error is below 1e-6 |D|.
  const PlantParams p;
  const auto hist = run(20.0, 1.0, 1e-3, quadratic, false);
  const Truth tr = quadratic(1.0);
  const DisturbanceEstimate truth = DisturbanceEstimate::from_torques(p, tr.d, tr.rate, tr.accel);
  EXPECT_LT((hist.back().second.value - truth.value).norm(), 1e-6 * truth.value.norm());
}

TEST(Convergence, ErrorFollowsTriplePoleDynamics) {
  // Per channel: e0' = -g0 e0 + e1, e1' = -g1 e0 + e2, e2' = -g2 e0 - D'''.
  const PlantParams p;
  const double w = 20.0;
  const DobGains g = design_gains(w);
  Eigen::Matrix3d m;
  m << -g.g0, 1, 0, -g.g1, 0, 1, -g.g2, 0, 0;
  const auto hist = run(w, 1.0, 1e-4, quadratic, false);
  const Truth t0 = quadratic(0.0);
  const DisturbanceEstimate e0 = DisturbanceEstimate::from_torques(p, t0.d, t0.rate, t0.accel);
  for (std::size_t i : {std::size_t{500}, std::size_t{2000}, std::size_t{5000}}) {
    const double t = hist[i].first;
    const Eigen::Matrix3d phi = (m * t).exp();
    const Truth tr = quadratic(t);
    const DisturbanceEstimate truth = DisturbanceEstimate::from_torques(p, tr.d, tr.rate, tr.accel);
    for (int ch : {1, 3}) {
      const Eigen::Vector3d err0(-e0.value[ch], -e0.rate[ch], -e0.accel[ch]);
      const Eigen::Vector3d want = phi * err0;
      EXPECT_NEAR(hist[i].second.value[ch] - truth.value[ch], want[0], 1e-8 * err0.norm()) << "t " << t;
    }
  }
}

TEST(Convergence, MeasuredDecayRateNearBandwidth) {
  for (double w : {10.0, 20.0, 50.0}) {
    const DobConvergence c = dob_polynomial_convergence(w);
    EXPECT_NEAR(c.fitted_rate, w, 0.25 * w);
  }
}

TEST(Bandwidth, SinusoidErrorMatchesFrequencyResponse) {
  // Value-channel error transfer s^3 / (s + w)^3.
  const double wd = 1.0;
  const double amp_rms = std::sqrt((0.5 * 0.5 + 0.3 * 0.3) / 2.0);
  std::vector<double> errs;
  for (double w : {5.0, 50.0, 500.0}) {
    const double gain = std::pow(wd, 3) / std::pow(wd * wd + w * w, 1.5);
    const double e = dob_sinusoid_error(w, wd);
    EXPECT_NEAR(e, gain * amp_rms, 0.02 * gain * amp_rms) << "w " << w;
    errs.push_back(e);
  }
  EXPECT_GT(errs[0] / errs[1], 20.0);
  EXPECT_GT(errs[1] / errs[2], 20.0);
}

TEST(Projection, UnusedChannelsAreZero) {
  const auto hist = run(50.0, 0.5, 1e-3, quadratic, false);
  for (const auto& [t, est] : hist) {
    EXPECT_EQ(est.value[0], 0.0);
    EXPECT_EQ(est.value[2], 0.0);
    EXPECT_EQ(est.rate[2], 0.0);
    EXPECT_EQ(est.accel[0], 0.0);
  }
}

}  // namespace
}  // namespace vssea
