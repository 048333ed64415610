#pragma once

#include "corrsim/linalg.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace corrsim {

using OutcomeRecord = std::vector<int>;

/// Ordered orthonormal measurement basis on a d-dimensional physical system.
struct MeasurementBasis {
  int dim = 0;
  std::vector<CVector> vectors;
  std::string label;
};

inline CVector canonical_vector_phase(const CVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-12) return v * (std::abs(v(i)) / v(i));
  return v;
}

inline double gram_residual(const MeasurementBasis& b) {
  CMatrix gram(b.dim, b.dim);
  for (int i = 0; i < b.dim; ++i)
    for (int j = 0; j < b.dim; ++j) gram(i, j) = b.vectors[i].dot(b.vectors[j]);
  return max_abs(gram - identity(b.dim));
}

inline bool is_orthonormal(const MeasurementBasis& b, double tol = kOrthoTol) {
  if (static_cast<int>(b.vectors.size()) != b.dim) return false;
  for (const CVector& v : b.vectors)
    if (v.size() != b.dim) return false;
  return gram_residual(b) <= tol;
}

namespace detail {
inline MeasurementBasis finish_basis(int dim, std::vector<CVector> vectors, std::string label) {
  MeasurementBasis b{dim, {}, std::move(label)};
  b.vectors.reserve(vectors.size());
  for (CVector& v : vectors) b.vectors.push_back(canonical_vector_phase(v));
  if (!is_orthonormal(b))
    throw std::logic_error("measurement basis failed orthonormality: " + b.label);
  return b;
}
}  // namespace detail

/// { |alpha_{theta,phi}>, |beta_{theta,phi}>, |2>, ..., |d-1> } with
///   |alpha> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>,
///   |beta>  = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>.
/// Requires 0 < theta < pi; computational_basis covers the degenerate case.
inline MeasurementBasis general_basis(double theta, double phi, int d) {
  if (!(theta > 0.0 && theta < std::numbers::pi))
    throw std::invalid_argument("general_basis: theta must lie in (0,pi)");
  if (d < 2) throw std::invalid_argument("general_basis: dimension must be >= 2");
  require_dim(d);
  const complexd ph = std::polar(1.0, phi);
  CVector alpha = CVector::Zero(d), beta = CVector::Zero(d);
  alpha(0) = std::cos(theta / 2.0);
  alpha(1) = ph * std::sin(theta / 2.0);
  beta(0) = std::sin(theta / 2.0);
  beta(1) = -ph * std::cos(theta / 2.0);
  std::vector<CVector> vecs{alpha, beta};
  for (int k = 2; k < d; ++k) vecs.push_back(basis_ket(d, k));
  return detail::finish_basis(d, std::move(vecs),
                              "M(theta=" + std::to_string(theta) + ",phi=" + std::to_string(phi) + ")");
}

inline MeasurementBasis computational_basis(int d) {
  if (d < 2) throw std::invalid_argument("computational_basis: dimension must be >= 2");
  require_dim(d);
  std::vector<CVector> vecs;
  for (int k = 0; k < d; ++k) vecs.push_back(basis_ket(d, k));
  return detail::finish_basis(d, std::move(vecs), "comp" + std::to_string(d));
}

// ---------------------------------------------------------------------------
// Cluster protocol bases. Step 1 measures {|t_0>,|t_1>} with
// |t_s> = (|0> + (-1)^s e^{i t}|1>)/sqrt(2); steps 2 and 3 measure the
// record-corrected bases {X^{s1}|.>} and {Z^{s1}X^{s2}|.>}. The correction is
// applied to the vectors, then phases are canonicalized.
// ---------------------------------------------------------------------------

inline MeasurementBasis cluster_angle_basis(double angle) {
  const complexd ph = std::polar(1.0, angle);
  const double s = 1.0 / std::sqrt(2.0);
  CVector v0(2), v1(2);
  v0 << s, s * ph;
  v1 << s, -s * ph;
  return detail::finish_basis(2, {v0, v1}, "cluster(" + std::to_string(angle) + ")");
}

inline MeasurementBasis cluster_adaptive_basis(int step, const OutcomeRecord& record, double angle) {
  if (step < 1 || step > 3) throw std::invalid_argument("cluster_adaptive_basis: step must be 1..3");
  if (static_cast<int>(record.size()) < step - 1)
    throw std::invalid_argument("cluster_adaptive_basis: record too short for step");
  MeasurementBasis base = cluster_angle_basis(angle);
  CMatrix corr = identity(2);
  if (step >= 2 && record[0] == 1) corr = pauli_x() * corr;
  if (step == 3) {
    CMatrix c = identity(2);
    if (record[1] == 1) c = pauli_x();
    if (record[0] == 1) c = pauli_z() * c;
    corr = c;
  }
  std::vector<CVector> vecs;
  for (const CVector& v : base.vectors) vecs.push_back(corr * v);
  return detail::finish_basis(2, std::move(vecs),
                              base.label + "/step" + std::to_string(step));
}

// ---------------------------------------------------------------------------
// AKLT Z-rotation protocol: while every prior outcome is 2 the basis is
// M_{theta, pi/2}; after the first non-2 outcome it is the computational
// basis (measured operators X, XZ, Z).
// ---------------------------------------------------------------------------

inline MeasurementBasis aklt_adaptive_basis(const OutcomeRecord& record, double theta) {
  for (int s : record)
    if (s != 2) return computational_basis(3);
  return general_basis(theta, std::numbers::pi / 2.0, 3);
}

// ---------------------------------------------------------------------------
// Tricluster protocol (d = 6). Byproduct parities of an outcome s in 0..5:
//   p(s) = 1 for s in {1,3,5},  q(s) = 1 for s in {2,3,4,5}.
// ---------------------------------------------------------------------------

inline int tricluster_p(int s) { return (s == 1 || s == 3 || s == 5) ? 1 : 0; }
inline int tricluster_q(int s) { return (s >= 2) ? 1 : 0; }

namespace detail {
// Pairs (0,1),(2,3),(4,5); vector 2a has + sign on |2a+1>, vector 2a+1 has -.
// `factors` holds the per-pair phase multiplying |2a+1>.
inline MeasurementBasis paired_basis(const complexd factors[3], const std::string& label) {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<CVector> vecs;
  for (int a = 0; a < 3; ++a) {
    CVector even = CVector::Zero(6), odd = CVector::Zero(6);
    even(2 * a) = s;
    even(2 * a + 1) = s * factors[a];
    odd(2 * a) = s;
    odd(2 * a + 1) = -s * factors[a];
    vecs.push_back(even);
    vecs.push_back(odd);
  }
  return finish_basis(6, std::move(vecs), label);
}
}  // namespace detail

/// Every step carries e^{i angle} (with the record-dependent sign and angle
/// sign at steps 2 and 3) on the (0,1) and (2,3) pairs and the conjugated
/// phase on the (4,5) pair. The conjugation compensates the swapped tensor
/// roles on levels 4 and 5 (A[4] = A[3], A[5] = A[2]); without it the
/// byproduct bookkeeping fails on histories through that pair.
inline MeasurementBasis tricluster_adaptive_basis(int step, const OutcomeRecord& record, double angle) {
  if (step < 1 || step > 3) throw std::invalid_argument("tricluster_adaptive_basis: step must be 1..3");
  if (static_cast<int>(record.size()) < step - 1)
    throw std::invalid_argument("tricluster_adaptive_basis: record too short for step");
  double sign = 1.0;
  double angle_sign = 1.0;
  if (step == 2) {
    const int s1 = record[0];
    sign = tricluster_q(s1) ? -1.0 : 1.0;
    angle_sign = tricluster_p(s1) ? -1.0 : 1.0;
  } else if (step == 3) {
    const int s1 = record[0], s2 = record[1];
    sign = ((tricluster_p(s1) + tricluster_q(s2)) % 2 == 1) ? -1.0 : 1.0;
    angle_sign = tricluster_p(s2) ? -1.0 : 1.0;
  }
  const complexd factor = sign * std::polar(1.0, angle_sign * angle);
  const complexd factors[3] = {factor, factor, std::conj(factor)};
  return detail::paired_basis(factors, "tri" + std::to_string(step) + "(" + std::to_string(angle) + ")");
}

}  // namespace corrsim
