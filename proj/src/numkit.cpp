#include "vssea/numkit.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace vssea {

int Polynomial::degree() const {
  for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i) {
    if (coeffs[i] != 0.0) return i;
  }
  return -1;
}

double Polynomial::leading() const {
  const int d = degree();
  return d < 0 ? 0.0 : coeffs[d];
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
  return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> s) const {
  std::complex<double> acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Polynomial Polynomial::from_roots(std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  std::vector<double> re(c.size());
  std::transform(c.begin(), c.end(), re.begin(), [](auto z) { return z.real(); });
  return Polynomial(std::move(re));
}

Matrix controllability_matrix(const Matrix& A, const Matrix& B) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw std::invalid_argument("controllability_matrix: dimension mismatch");
  }
  const Eigen::Index n = A.rows(), m = B.cols();
  Matrix C(n, n * m);
  Matrix block = B;
  for (Eigen::Index i = 0; i < n; ++i) {
    C.middleCols(i * m, m) = block;
    block = A * block;
  }
  return C;
}

int numerical_rank(const Matrix& M) {
  if (M.size() == 0) return 0;
  const double scale = M.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return 0;
  Eigen::FullPivLU<Matrix> lu(M / scale);
  lu.setThreshold(kRankPivotTolerance);
  return static_cast<int>(lu.rank());
}

int controllability_rank(const Matrix& A, const Matrix& B) {
  return numerical_rank(controllability_matrix(A, B));
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  if (A.rows() != A.cols() || Q.rows() != A.rows() || Q.cols() != A.cols()) {
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  }
  const Eigen::Index n = A.rows();
  // Column-major vec: vec(A^T P) = (I kron A^T) vec(P), vec(P A) = (A^T kron I) vec(P).
  Matrix L = Matrix::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    L.block(j * n, j * n, n, n) += A.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      L.block(j * n, i * n, n, n).diagonal().array() += A(i, j);
    }
  }
  Eigen::FullPivLU<Matrix> lu(L);
  if (!lu.isInvertible() || !(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon())) {
    throw SynthesisError("solve_lyapunov: singular Kronecker system (closed loop not Hurwitz?)");
  }
  const Vector q = Eigen::Map<const Vector>(Matrix(Q).data(), n * n);
  const Vector p = lu.solve(-q);
  Matrix P = Eigen::Map<const Matrix>(p.data(), n, n);
  return 0.5 * (P + P.transpose());
}

double lyapunov_residual(const Matrix& A, const Matrix& P, const Matrix& Q) {
  return (A.transpose() * P + P * A + Q).norm();
}

double riccati_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const Matrix& P) {
  const Matrix RinvBt = R.llt().solve(B.transpose());
  return (A.transpose() * P + P * A - P * B * RinvBt * P + Q).norm();
}

namespace {

bool stabilizes(const Matrix& Acl) {
  try {
    return is_positive_definite(solve_lyapunov(Acl, Matrix::Identity(Acl.rows(), Acl.cols())));
  } catch (const SynthesisError&) {
    return false;
  }
}

struct NewtonResult {
  Matrix P, K;
  int iterations = 0;
};

NewtonResult newton_kleinman(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                             const Matrix& RinvBt, Matrix K, const CareOptions& options) {
  NewtonResult out;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Matrix P = solve_lyapunov(A - B * K, Q + K.transpose() * R * K);
    K = RinvBt * P;
    out.iterations = it;
    const bool done = out.P.size() != 0 && (P - out.P).norm() <= options.step_tolerance * (1.0 + P.norm());
    out.P = std::move(P);
    if (done) break;
  }
  out.K = std::move(K);
  return out;
}

Matrix placement_seed(const Matrix& A, const Matrix& B, double beta) {
  const Eigen::Index n = A.rows();
  if (B.cols() == 1) {
    std::vector<std::complex<double>> poles(static_cast<std::size_t>(n), -beta);
    return ackermann(A, B, poles);
  }
  // Bass: with (A + beta I) Z + Z (A + beta I)^T = 2 B B^T, K = B^T Z^-1 puts
  // every closed-loop eigenvalue left of -beta.
  const Matrix shifted = -(A + beta * Matrix::Identity(n, n));
  const Matrix Z = solve_lyapunov(shifted.transpose(), 2.0 * B * B.transpose());
  Eigen::LLT<Matrix> llt(Z);
  if (llt.info() != Eigen::Success) throw SynthesisError("solve_care: Bass seed Gramian not positive definite");
  return B.transpose() * llt.solve(Matrix::Identity(n, n));
}

// Shift continuation: K = 0 stabilizes A - alpha I for alpha above the
// spectral bound; the LQR gain of each shifted problem seeds the next smaller
// shift until alpha reaches zero. Only the unstable modes get moved, so the
// gain stays moderate when a stable mode is nearly uncontrollable.
Matrix continuation_seed(const Matrix& A, const Matrix& B, double beta, const CareOptions& options) {
  const Eigen::Index n = A.rows(), m = B.cols();
  const Matrix I = Matrix::Identity(n, n), Im = Matrix::Identity(m, m);
  Matrix K = Matrix::Zero(m, n);
  double alpha = beta;
  for (int guard = 0; guard < 200; ++guard) {
    K = newton_kleinman(A - alpha * I, B, I, Im, B.transpose(), K, options).K;
    if (alpha == 0.0) return K;
    double next = alpha < 1e-3 ? 0.0 : 0.5 * alpha;
    while (!stabilizes(A - next * I - B * K)) {
      next = 0.5 * (next + alpha);
      if (alpha - next < 1e-12 * beta) throw SynthesisError("solve_care: shift continuation stalled");
    }
    alpha = next;
  }
  throw SynthesisError("solve_care: shift continuation did not reach the unshifted problem");
}

Matrix stabilizing_seed(const Matrix& A, const Matrix& B, const CareOptions& options) {
  const Eigen::Index n = A.rows(), m = B.cols();
  if (is_hurwitz(A)) return Matrix::Zero(m, n);
  if (controllability_rank(A, B) < n) {
    throw SynthesisError("solve_care: unstable open loop and uncontrollable pair; no stabilizing seed");
  }
  const double beta = 1.0 + A.cwiseAbs().rowwise().sum().maxCoeff();  // induced inf-norm bounds the spectrum
  try {
    Matrix K = placement_seed(A, B, beta);
    if (stabilizes(A - B * K)) return K;
  } catch (const SynthesisError&) {
  }
  // Placement moves every pole; a nearly uncontrollable mode then needs a huge
  // gain that the Lyapunov solves cannot handle.
  return continuation_seed(A, B, beta, options);
}

}  // namespace

CareSolution solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const CareOptions& options) {
  const Eigen::Index n = A.rows(), m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
      R.cols() != m) {
    throw std::invalid_argument("solve_care: dimension mismatch");
  }
  Eigen::LLT<Matrix> r_chol(R);
  if (r_chol.info() != Eigen::Success) throw std::invalid_argument("solve_care: R must be positive definite");
  const Matrix RinvBt = r_chol.solve(B.transpose());

  const NewtonResult nk = newton_kleinman(A, B, Q, R, RinvBt, stabilizing_seed(A, B, options), options);
  CareSolution out;
  out.P = nk.P;
  out.K = nk.K;
  out.iterations = nk.iterations;
  out.relative_residual = riccati_residual(A, B, Q, R, out.P) / (1.0 + out.P.norm());
  if (!(out.relative_residual <= 1e-8)) {
    throw SynthesisError("solve_care: Newton-Kleinman did not converge within " +
                         std::to_string(options.max_iterations) + " iterations");
  }
  if (!is_hurwitz(A - B * out.K)) throw SynthesisError("solve_care: final gain not stabilizing");
  return out;
}

bool routh_hurwitz(const Polynomial& p) {
  const int n = p.degree();
  if (n < 1) throw std::invalid_argument("routh_hurwitz: degree must be >= 1 with nonzero leading coefficient");
  std::vector<double> a(p.coeffs.begin(), p.coeffs.begin() + n + 1);
  if (a[n] < 0.0) {
    for (auto& c : a) c = -c;
  }
  // Necessary condition: every coefficient strictly positive.
  for (double c : a) {
    if (!(c > 0.0)) return false;
  }
  const std::size_t width = static_cast<std::size_t>(n) / 2 + 1;
  std::vector<double> upper(width, 0.0), lower(width, 0.0);
  for (int i = n, j = 0; i >= 0; i -= 2, ++j) upper[j] = a[i];
  for (int i = n - 1, j = 0; i >= 0; i -= 2, ++j) lower[j] = a[i];

  for (int row = 2; row <= n; ++row) {
    std::vector<double> next(width, 0.0);
    double scale = 0.0;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      next[j] = (lower[0] * upper[j + 1] - upper[0] * lower[j + 1]) / lower[0];
      scale = std::max({scale, std::abs(upper[j + 1]), std::abs(lower[j + 1] * upper[0] / lower[0])});
    }
    if (!(next[0] > 1e-12 * scale)) return false;
    upper = std::move(lower);
    lower = std::move(next);
  }
  return true;
}

Polynomial characteristic_polynomial(const Matrix& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("characteristic_polynomial: matrix not square");
  const Eigen::Index n = M.rows();
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[n] = 1.0;
  Matrix Mk = Matrix::Zero(n, n);
  const Matrix I = Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    Mk = M * Mk + c[n - k + 1] * I;
    c[n - k] = -(M * Mk).trace() / static_cast<double>(k);
  }
  return Polynomial(std::move(c));
}

bool is_hurwitz(const Matrix& M) {
  if (M.size() == 0) return true;
  return routh_hurwitz(characteristic_polynomial(M));
}

bool is_positive_definite(const Matrix& M) {
  if (M.rows() != M.cols() || !M.allFinite()) return false;
  const Matrix sym = 0.5 * (M + M.transpose());
  Eigen::LLT<Matrix> llt(sym);
  return llt.info() == Eigen::Success;
}

void check_stable_conjugate_poles(std::span<const std::complex<double>> poles) {
  std::vector<bool> used(poles.size(), false);
  for (std::size_t i = 0; i < poles.size(); ++i) {
    const auto& p = poles[i];
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
      throw std::invalid_argument("pole list contains a non-finite value");
    }
    if (!(p.real() < 0.0)) {
      throw std::invalid_argument("requested pole has nonnegative real part");
    }
    if (used[i] || p.imag() == 0.0) continue;
    const double tol = 1e-9 * (1.0 + std::abs(p));
    bool matched = false;
    for (std::size_t j = 0; j < poles.size(); ++j) {
      if (j == i || used[j]) continue;
      if (std::abs(poles[j] - std::conj(p)) <= tol) {
        used[i] = used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) throw std::invalid_argument("pole list is not closed under conjugation");
  }
}

Eigen::Vector4d pole_place_chain(std::span<const std::complex<double>> poles) {
  if (poles.size() != 4) throw std::invalid_argument("pole_place_chain: exactly 4 poles required");
  check_stable_conjugate_poles(poles);
  const Polynomial p = Polynomial::from_roots(poles);
  return Eigen::Vector4d(p.coeffs[0], p.coeffs[1], p.coeffs[2], p.coeffs[3]);
}

Matrix ackermann(const Matrix& A, const Matrix& b, std::span<const std::complex<double>> poles) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || b.rows() != n || b.cols() != 1 || static_cast<Eigen::Index>(poles.size()) != n) {
    throw std::invalid_argument("ackermann: dimension mismatch");
  }
  check_stable_conjugate_poles(poles);
  const Matrix C = controllability_matrix(A, b);
  if (numerical_rank(C) < n) throw SynthesisError("ackermann: pair is not controllable");
  const Polynomial phi = Polynomial::from_roots(poles);
  Matrix phiA = Matrix::Zero(n, n);
  for (auto it = phi.coeffs.rbegin(); it != phi.coeffs.rend(); ++it) {
    phiA = phiA * A + (*it) * Matrix::Identity(n, n);
  }
  Matrix en = Matrix::Zero(1, n);
  en(0, n - 1) = 1.0;
  return en * C.fullPivLu().solve(phiA);
}

}  // namespace vssea
