#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vssea/errors.hpp"

namespace vssea {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Real polynomial, coefficients in ascending degree order
/// (coeffs[i] multiplies s^i).
struct Polynomial {
  std::vector<double> coeffs;

  Polynomial() = default;
  explicit Polynomial(std::vector<double> ascending) : coeffs(std::move(ascending)) {}

  /// Degree after dropping exactly-zero leading coefficients; -1 for the zero polynomial.
  int degree() const;
  double leading() const;
  double operator()(double s) const;
  std::complex<double> operator()(std::complex<double> s) const;

  /// Monic polynomial with the given roots. Imaginary parts of the expanded
  /// coefficients are discarded, so the roots should be closed under conjugation.
  static Polynomial from_roots(std::span<const std::complex<double>> roots);
};

// Relative pivot threshold for rank decisions; entries are scaled by the
// matrix max-norm before elimination.
inline constexpr double kRankPivotTolerance = 1e-10;

Matrix controllability_matrix(const Matrix& A, const Matrix& B);

/// Numerical rank of [B AB ... A^{n-1}B].
int controllability_rank(const Matrix& A, const Matrix& B);

/// Rank with the scaled pivot rule above.
int numerical_rank(const Matrix& M);

/// Solves A^T P + P A = -Q for symmetric P by vectorization
/// ((I kron A^T + A^T kron I) vec(P) = -vec(Q)). Throws SynthesisError when the
/// Kronecker-sum system is numerically singular.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Frobenius norm of A^T P + P A + Q.
double lyapunov_residual(const Matrix& A, const Matrix& P, const Matrix& Q);

struct CareOptions {
  int max_iterations = 100;
  // Newton-Kleinman stops once successive P differ by less than this (relative).
  double step_tolerance = 1e-13;
};

struct CareSolution {
  Matrix P;
  Matrix K;
  int iterations = 0;
  // Frobenius norm of the Riccati residual divided by (1 + ||P||_F).
  double relative_residual = 0.0;
};

/// Continuous algebraic Riccati equation A^T P + P A - P B R^-1 B^T P + Q = 0
/// by Newton-Kleinman iteration. The seed gain comes from pole placement
/// (Ackermann) for single-input pairs and from the Bass construction for
/// multi-input pairs; an open-loop Hurwitz A is seeded with K = 0.
CareSolution solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const CareOptions& options = {});

double riccati_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const Matrix& P);

/// Routh array test: true iff every root lies strictly in the open left
/// half-plane. A zero (or sign-flipped) first-column entry means some root is
/// on or to the right of the imaginary axis, so borderline cases report false.
/// Throws std::invalid_argument on degree < 1 or a zero leading coefficient.
bool routh_hurwitz(const Polynomial& p);

/// det(sI - M) via Faddeev-LeVerrier. Fine for the small (n <= 12) matrices used here.
Polynomial characteristic_polynomial(const Matrix& M);

bool is_hurwitz(const Matrix& M);

/// Cholesky-based check on the symmetric part.
bool is_positive_definite(const Matrix& M);

/// Gain K for the 4-integrator chain with input channel [0,0,0,1]^T such that
/// s^4 + k4 s^3 + k3 s^2 + k2 s + k1 = prod(s - p_i).
Eigen::Vector4d pole_place_chain(std::span<const std::complex<double>> poles);

/// Ackermann's formula for single-input (A, b). Returns the 1 x n gain.
Matrix ackermann(const Matrix& A, const Matrix& b, std::span<const std::complex<double>> poles);

/// Checks that a pole list is closed under conjugation and strictly stable;
/// throws std::invalid_argument with a description otherwise.
void check_stable_conjugate_poles(std::span<const std::complex<double>> poles);

/// Classical fourth-order Runge-Kutta step for x' = f(t, x).
/// Throws SimulationDivergence (step -1) on a non-finite stage derivative.
template <class F>
Vector rk4_step(F&& f, double t, const Vector& x, double h) {
  auto checked = [](Vector k) {
    if (!k.allFinite()) throw SimulationDivergence("non-finite derivative in rk4 stage", -1);
    return k;
  };
  const double half = 0.5 * h;
  const Vector k1 = checked(f(t, x));
  const Vector k2 = checked(f(t + half, Vector(x + half * k1)));
  const Vector k3 = checked(f(t + half, Vector(x + half * k2)));
  const Vector k4 = checked(f(t + h, Vector(x + h * k3)));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace vssea
