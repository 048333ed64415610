#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace corrsim {

using complexd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Everything below is exact small-matrix algebra, so residuals are pure
// rounding. 1e-9 for TP/unitarity verdicts, 1e-10 for Hermiticity and
// basis orthonormality; overridable per call.
inline constexpr double kTpTol = 1e-9;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kOrthoTol = 1e-10;
inline constexpr int kMaxDim = 64;

inline void require_dim(int n) {
  if (n < 1 || n > kMaxDim)
    throw std::invalid_argument("matrix dimension " + std::to_string(n) +
                                " outside supported range [1," +
                                std::to_string(kMaxDim) + "]");
}

inline CVector basis_ket(int dim, int k) {
  require_dim(dim);
  if (k < 0 || k >= dim) throw std::out_of_range("basis_ket: index out of range");
  CVector v = CVector::Zero(dim);
  v(k) = 1.0;
  return v;
}

inline CMatrix identity(int n) { return CMatrix::Identity(n, n); }

inline CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline CMatrix hadamard() {
  CMatrix m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

inline CVector plus_state() {
  CVector v(2);
  const double s = 1.0 / std::sqrt(2.0);
  v << s, s;
  return v;
}

inline CVector minus_state() {
  CVector v(2);
  const double s = 1.0 / std::sqrt(2.0);
  v << s, -s;
  return v;
}

// exp(+i t Z / 2) = diag(e^{it/2}, e^{-it/2})
inline CMatrix exp_z(double t) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, t / 2.0);
  m(1, 1) = std::polar(1.0, -t / 2.0);
  return m;
}

// J(t) = H exp(i t Z / 2)
inline CMatrix j_gate(double t) { return hadamard() * exp_z(t); }

// S_Z(t) = exp(-i t Z / 2)
inline CMatrix z_rotation(double t) { return exp_z(-t); }

inline CMatrix dag(const CMatrix& m) { return m.adjoint(); }

inline CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions differ (" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + ")");
  return a * b;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline bool all_finite(const CMatrix& m) {
  return m.allFinite();
}

/// Largest singular value.
inline double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

/// Multiplies by a global phase so the largest-modulus entry (first in
/// row-major order among near-ties) is real positive.
inline CMatrix canonical_phase(const CMatrix& m) {
  const double top = max_abs(m);
  if (top <= 0.0) return m;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) >= top - 1e-9 * top) {
        const complexd pivot = m(i, j);
        return m * (std::abs(pivot) / pivot);
      }
  return m;
}

/// True iff a = e^{i phi} b for some phase, within tol (absolute, entrywise).
inline bool equal_up_to_phase(const CMatrix& a, const CMatrix& b, double tol = kTpTol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const complexd overlap = (a.adjoint() * b).trace();
  if (std::abs(overlap) < tol) return max_abs(a) < tol && max_abs(b) < tol;
  const complexd phase = overlap / std::abs(overlap);
  return max_abs(a * phase - b) <= tol;
}

struct ScaledUnitary {
  double scale = 0.0;  // operator norm of the input
  CMatrix unitary;
};

/// Decides whether m = c U with U unitary and c > 0. The test is on
/// m^dag m / mean-diagonal, so the verdict is invariant under positive
/// rescaling of m. Returns the decomposition or nothing.
inline std::optional<ScaledUnitary> is_unitary_up_to_constant(const CMatrix& m,
                                                              double tol = kTpTol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("is_unitary_up_to_constant: matrix not square");
  if (tol <= 0.0) throw std::invalid_argument("is_unitary_up_to_constant: tol must be positive");
  const Eigen::Index n = m.rows();
  const CMatrix gram = m.adjoint() * m;
  const double mean = gram.trace().real() / static_cast<double>(n);
  if (!(mean > 0.0)) return std::nullopt;
  if (max_abs(gram / mean - identity(static_cast<int>(n))) > tol) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  const double c = std::sqrt(es.eigenvalues().maxCoeff());
  return ScaledUnitary{c, m / c};
}

enum class TpVerdict { tp, non_tp };

/// Single-Kraus trajectory criterion: K works as a TP operation after
/// normalization iff K^dag K is proportional to the identity.
inline TpVerdict is_proportional_to_unitary_and_tp(const CMatrix& k, double tol = kTpTol) {
  return is_unitary_up_to_constant(k, tol).has_value() ? TpVerdict::tp : TpVerdict::non_tp;
}

namespace detail {
inline void require_square_same_dim(const std::vector<CMatrix>& elements) {
  if (elements.empty()) throw std::invalid_argument("empty operator family");
  const Eigen::Index n = elements.front().rows();
  for (const CMatrix& e : elements)
    if (e.rows() != n || e.cols() != n)
      throw std::invalid_argument("operator family mixes dimensions");
}
}  // namespace detail

/// sum_i w_i K_i^dag K_i - I. Callers test its norm against a tolerance.
inline CMatrix tp_deviation(const std::vector<CMatrix>& elements,
                            const std::vector<double>& weights) {
  detail::require_square_same_dim(elements);
  if (weights.size() != elements.size())
    throw std::invalid_argument("tp_deviation: weight count mismatch");
  const int n = static_cast<int>(elements.front().rows());
  CMatrix acc = CMatrix::Zero(n, n);
  for (size_t i = 0; i < elements.size(); ++i)
    acc += weights[i] * (elements[i].adjoint() * elements[i]);
  return acc - identity(n);
}

/// Choi matrix sum_i w_i (K_i ⊗ I)|Omega><Omega|(K_i ⊗ I)^dag with |Omega>
/// the unnormalized maximally entangled vector; (K ⊗ I)|Omega> is the
/// row-major vectorization of K.
inline CMatrix choi_matrix(const std::vector<CMatrix>& elements,
                           const std::vector<double>& weights) {
  detail::require_square_same_dim(elements);
  if (weights.size() != elements.size())
    throw std::invalid_argument("choi_matrix: weight count mismatch");
  const Eigen::Index n = elements.front().rows();
  CMatrix choi = CMatrix::Zero(n * n, n * n);
  for (size_t i = 0; i < elements.size(); ++i) {
    CVector v(n * n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) v(r * n + c) = elements[i](r, c);
    choi += weights[i] * (v * v.adjoint());
  }
  return choi;
}

/// Complete-positivity check for weighted families (weights may be signed):
/// true iff the Choi matrix is Hermitian and its spectrum is >= -tol.
inline bool choi_psd_check(const std::vector<CMatrix>& elements,
                           const std::vector<double>& weights, double tol = kTpTol) {
  const CMatrix choi = choi_matrix(elements, weights);
  if (max_abs(choi - choi.adjoint()) >= kHermTol) return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(choi, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

inline CMatrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = complexd(gauss(rng), gauss(rng));
  return m;
}

/// Isometry (rows x cols, rows >= cols) from QR of a Gaussian matrix.
inline CMatrix random_isometry(int rows, int cols, std::mt19937_64& rng) {
  if (rows < cols) throw std::invalid_argument("random_isometry: rows < cols");
  Eigen::HouseholderQR<CMatrix> qr(gaussian_matrix(rows, cols, rng));
  return qr.householderQ() * CMatrix::Identity(rows, cols);
}

inline CMatrix random_unitary(int n, std::mt19937_64& rng) {
  return random_isometry(n, n, rng);
}

}  // namespace corrsim
