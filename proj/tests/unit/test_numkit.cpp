#include <array>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "vssea/numkit.hpp"

namespace vssea {
namespace {

using C = std::complex<double>;

// Stable solution of the CARE from the Hamiltonian's stable invariant subspace.
Matrix hamiltonian_care(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
  const Eigen::Index n = a.rows();
  Matrix h(2 * n, 2 * n);
  h << a, -b * r.inverse() * b.transpose(), -q, -a.transpose();
  Eigen::ComplexEigenSolver<Matrix> es(h);
  Eigen::MatrixXcd basis(2 * n, n);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (es.eigenvalues()[i].real() < 0.0) basis.col(col++) = es.eigenvectors().col(i);
  }
  EXPECT_EQ(col, n);
  const Eigen::MatrixXcd x1 = basis.topRows(n), x2 = basis.bottomRows(n);
  return (x2 * x1.inverse()).real();
}

double max_real_eig(const Matrix& m) { return m.eigenvalues().real().maxCoeff(); }

TEST(Polynomial, EvaluatesAndExpandsRoots) {
  const Polynomial p({1.0, -3.0, 2.0});  // 2 s^2 - 3 s + 1
  EXPECT_EQ(p.degree(), 2);
  EXPECT_DOUBLE_EQ(p(2.0), 3.0);
  const std::array<C, 4> roots{C(-2), C(-2), C(-2), C(-2)};
  const Polynomial q = Polynomial::from_roots(roots);
  ASSERT_EQ(q.coeffs.size(), 5u);
  const double want[] = {16, 32, 24, 8, 1};
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(q.coeffs[i], want[i]);
}

TEST(RouthHurwitz, SimpleCases) {
  EXPECT_TRUE(routh_hurwitz(Polynomial({1.0, 1.0, 1.0})));
  EXPECT_FALSE(routh_hurwitz(Polynomial({1.0, -1.0, 1.0})));
  EXPECT_TRUE(routh_hurwitz(Polynomial({-2.0, -3.0, -1.0})));  // negative leading coefficient
  EXPECT_FALSE(routh_hurwitz(Polynomial({1.0, 1.0, 1.0, 1.0})));  // roots at +-i: borderline
  EXPECT_FALSE(routh_hurwitz(Polynomial({0.0, 1.0, 1.0})));       // root at 0
  EXPECT_THROW(routh_hurwitz(Polynomial({3.0})), std::invalid_argument);
}

TEST(RouthHurwitz, AgreesWithCompanionEigenvalues) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 4;
    std::vector<double> c(n + 1);
    for (auto& x : c) x = 3.0 * unit(rng) - 0.3;
    c[n] = 0.2 + unit(rng);
    Matrix comp = Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
    const double re = max_real_eig(comp);
    if (std::abs(re) < 1e-9) continue;
    ++checked;
    EXPECT_EQ(routh_hurwitz(Polynomial(c)), re < 0.0) << "trial " << trial;
  }
  EXPECT_GT(checked, 990);
}

TEST(CharacteristicPolynomial, MatchesEigenvalues) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int n = 1; n <= 4; ++n) {
    const Matrix m = Matrix::NullaryExpr(n, n, [&] { return g(rng); });
    const Polynomial p = characteristic_polynomial(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      EXPECT_LT(std::abs(p(m.eigenvalues()[i])), 1e-9);
    }
    EXPECT_DOUBLE_EQ(p.leading(), 1.0);
  }
}

TEST(PolePlacement, BinomialGains) {
  const std::array<C, 4> poles{C(-2), C(-2), C(-2), C(-2)};
  const Eigen::Vector4d k = pole_place_chain(poles);
  EXPECT_DOUBLE_EQ(k[0], 16.0);
  EXPECT_DOUBLE_EQ(k[1], 32.0);
  EXPECT_DOUBLE_EQ(k[2], 24.0);
  EXPECT_DOUBLE_EQ(k[3], 8.0);
}

TEST(PolePlacement, ComplexPairRecoversPoles) {
  const std::array<C, 4> poles{C(-1, 2), C(-1, -2), C(-3), C(-4)};
  const Eigen::Vector4d k = pole_place_chain(poles);
  Matrix acl = Matrix::Zero(4, 4);
  acl(0, 1) = acl(1, 2) = acl(2, 3) = 1.0;
  acl.row(3) = -k.transpose();
  const Eigen::VectorXcd ev = acl.eigenvalues();
  for (const C& p : poles) {
    double best = 1e9;
    for (Eigen::Index i = 0; i < 4; ++i) best = std::min(best, std::abs(ev[i] - p));
    EXPECT_LT(best, 1e-9);
  }
}

TEST(PolePlacement, RejectsBadPoleSets) {
  EXPECT_THROW(pole_place_chain(std::array<C, 4>{C(1), C(-1), C(-2), C(-3)}), std::invalid_argument);
  EXPECT_THROW(pole_place_chain(std::array<C, 4>{C(0), C(-1), C(-2), C(-3)}), std::invalid_argument);
  EXPECT_THROW(pole_place_chain(std::array<C, 4>{C(-1, 1), C(-1, 2), C(-2), C(-3)}), std::invalid_argument);
  EXPECT_THROW(pole_place_chain(std::array<C, 3>{C(-1), C(-2), C(-3)}), std::invalid_argument);
}

TEST(Ackermann, PlacesEigenvaluesOfGeneralSystem) {
  Matrix a(3, 3);
  a << 0, 1, 0, 0, 0, 1, 2, -1, 0.5;
  Matrix b(3, 1);
  b << 0, 0, 1;
  const std::array<C, 3> poles{C(-1), C(-2, 1), C(-2, -1)};
  const Matrix k = ackermann(a, b, poles);
  const Eigen::VectorXcd ev = (a - b * k).eigenvalues();
  for (const C& p : poles) {
    double best = 1e9;
    for (Eigen::Index i = 0; i < 3; ++i) best = std::min(best, std::abs(ev[i] - p));
    EXPECT_LT(best, 1e-8);
  }
}

TEST(Controllability, ChainAndUncontrollablePair) {
  Matrix gamma = Matrix::Zero(4, 4);
  gamma(0, 1) = gamma(1, 2) = gamma(2, 3) = 1.0;
  Matrix b = Matrix::Zero(4, 1);
  b(3, 0) = 1.0 / 0.5;
  EXPECT_EQ(controllability_rank(gamma, b), 4);
  const Matrix c = controllability_matrix(gamma, b);
  EXPECT_NEAR(std::abs(c.determinant()), std::pow(2.0, 4), 1e-12);

  Matrix a = Matrix::Identity(2, 2);
  Matrix b2(2, 1);
  b2 << 1, 1;
  EXPECT_EQ(controllability_rank(a, b2), 1);
}

TEST(Lyapunov, KnownSolutions) {
  const Matrix a = -Matrix::Identity(3, 3);
  const Matrix q = 2.0 * Matrix::Identity(3, 3);
  const Matrix p = solve_lyapunov(a, q);
  EXPECT_LT((p - Matrix::Identity(3, 3)).norm(), 1e-14);

  Matrix a2(2, 2);
  a2 << 0, 1, -2, -3;
  const Matrix p2 = solve_lyapunov(a2, Matrix::Identity(2, 2));
  EXPECT_LT(lyapunov_residual(a2, p2, Matrix::Identity(2, 2)), 1e-13);
  EXPECT_TRUE(is_positive_definite(p2));
  EXPECT_DOUBLE_EQ(p2(0, 1), p2(1, 0));
}

TEST(Lyapunov, SingularOperatorThrows) {
  Matrix a(2, 2);
  a << 1, 0, 0, -1;  // eigenvalues sum to zero
  EXPECT_THROW(solve_lyapunov(a, Matrix::Identity(2, 2)), SynthesisError);
}

TEST(Care, ScalarAndDoubleIntegrator) {
  Matrix a(1, 1), b(1, 1), q(1, 1), r(1, 1);
  a << 1;
  b << 1;
  q << 1;
  r << 1;
  const CareSolution s = solve_care(a, b, q, r);
  EXPECT_NEAR(s.P(0, 0), 1.0 + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.K(0, 0), 1.0 + std::sqrt(2.0), 1e-12);

  Matrix a2(2, 2), b2(2, 1);
  a2 << 0, 1, 0, 0;
  b2 << 0, 1;
  const CareSolution s2 = solve_care(a2, b2, Matrix::Identity(2, 2), Matrix::Identity(1, 1));
  EXPECT_NEAR(s2.K(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(s2.K(0, 1), std::sqrt(3.0), 1e-12);
}

TEST(Care, RandomSystemsMatchHamiltonianOracle) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    const int m = 1 + trial % 2;
    const Matrix a = Matrix::NullaryExpr(n, n, [&] { return g(rng); });
    const Matrix b = Matrix::NullaryExpr(n, m, [&] { return g(rng); });
    const Matrix w = Matrix::NullaryExpr(n, n, [&] { return g(rng); });
    const Matrix q = w * w.transpose() + 0.1 * Matrix::Identity(n, n);
    const Matrix r = Matrix::Identity(m, m);
    const CareSolution s = solve_care(a, b, q, r);
    const Matrix res = a.transpose() * s.P + s.P * a - s.P * b * r.inverse() * b.transpose() * s.P + q;
    EXPECT_LE(res.norm(), 1e-8 * (1.0 + s.P.norm())) << "trial " << trial;
    EXPECT_LT(max_real_eig(a - b * s.K), 0.0);
    const Matrix oracle = hamiltonian_care(a, b, q, r);
    EXPECT_LT((s.P - oracle).norm(), 1e-7 * (1.0 + oracle.norm())) << "trial " << trial;
  }
}

TEST(Care, NearlyUncontrollableStableMode) {
  // Placing every pole would need a gain near 1e6 for the weak stable mode.
  Matrix a(3, 3), b(3, 1);
  a << 2, 0, 0, 0, -1, 0, 0, 0, -3;
  b << 1, 1e-6, 1;
  const Matrix q = Matrix::Identity(3, 3), r = Matrix::Identity(1, 1);
  const CareSolution s = solve_care(a, b, q, r);
  EXPECT_LT(max_real_eig(a - b * s.K), 0.0);
  EXPECT_LT(s.K.norm(), 100.0);
  const Matrix oracle = hamiltonian_care(a, b, q, r);
  EXPECT_LT((s.P - oracle).norm(), 1e-7 * (1.0 + oracle.norm()));
}

TEST(Care, MultiInputSeedWithLargeOffDiagonalSpectrum) {
  // Spectral radius above the largest entry.
  Matrix a(2, 2), b(2, 2);
  a << 1, 1, 1, 1;
  b << 1, 0, 0, 0.5;
  const CareSolution s = solve_care(a, b, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  EXPECT_LT(max_real_eig(a - b * s.K), 0.0);
  EXPECT_LE(s.relative_residual, 1e-8);
}

TEST(Care, UnstabilizablePairThrows) {
  Matrix a(2, 2), b(2, 1);
  a << 1, 0, 0, 2;
  b << 1, 0;
  EXPECT_THROW(solve_care(a, b, Matrix::Identity(2, 2), Matrix::Identity(1, 1)), SynthesisError);
}

TEST(PositiveDefinite, Basic) {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  EXPECT_TRUE(is_positive_definite(m));
  m << 1, 2, 2, 1;
  EXPECT_FALSE(is_positive_definite(m));
}

TEST(Rk4, ObservedOrderOnExponential) {
  auto err = [](double h) {
    Vector x = Vector::Ones(1);
    const int n = static_cast<int>(std::lround(1.0 / h));
    for (int i = 0; i < n; ++i) x = rk4_step([](double, const Vector& y) { return y; }, i * h, x, h);
    return std::abs(x[0] - std::exp(1.0));
  };
  EXPECT_GE(std::log2(err(0.1) / err(0.05)), 3.7);
  EXPECT_GE(std::log2(err(0.05) / err(0.025)), 3.7);
}

TEST(Rk4, NonFiniteStageThrows) {
  Vector x = Vector::Ones(1);
  auto f = [](double, const Vector& y) -> Vector { return y / 0.0 * 0.0; };
  EXPECT_THROW(rk4_step(f, 0.0, x, 0.1), SimulationDivergence);
}

}  // namespace
}  // namespace vssea
