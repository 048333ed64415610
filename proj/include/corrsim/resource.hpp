#pragma once

#include "corrsim/linalg.hpp"
#include "corrsim/measurement.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace corrsim {

/// Open-boundary matrix-product resource: d tensors A[0..d-1] of size D x D
/// plus boundary vectors L and R. Unnormalized amplitudes are
/// <L| A[k_N] ... A[k_1] |R>.
struct MpsResource {
  std::string name;
  int d = 0;  // physical dimension
  int D = 0;  // bond dimension
  std::vector<CMatrix> tensors;
  CVector left;
  CVector right;
};

inline void check_structure(const MpsResource& res) {
  if (res.d < 2 || res.d > 8) throw std::invalid_argument("resource: d must be in 2..8");
  if (res.D < 1 || res.D > 8) throw std::invalid_argument("resource: D must be in 1..8");
  if (static_cast<int>(res.tensors.size()) != res.d)
    throw std::invalid_argument("resource: expected " + std::to_string(res.d) + " tensors, got " +
                                std::to_string(res.tensors.size()));
  for (const CMatrix& a : res.tensors) {
    if (a.rows() != res.D || a.cols() != res.D)
      throw std::invalid_argument("resource: tensor is not D x D");
    if (!all_finite(a)) throw std::invalid_argument("resource: tensor has non-finite entries");
  }
  if (res.left.size() != res.D || res.right.size() != res.D)
    throw std::invalid_argument("resource: boundary vector has wrong dimension");
  if (res.left.norm() == 0.0 || res.right.norm() == 0.0)
    throw std::invalid_argument("resource: boundary vectors must be nonzero");
}

inline CVector uniform_boundary(int D) {
  return CVector::Constant(D, complexd(1.0 / std::sqrt(static_cast<double>(D)), 0.0));
}

/// Built-in states. Tensors are stored already rescaled so that
/// sum_k A[k]^dag A[k] = I (the C = 1 convention); boundaries default to the
/// uniform vector.
inline MpsResource builtin_resource(std::string_view name) {
  const double is3 = 1.0 / std::sqrt(3.0);
  MpsResource res;
  if (name == "cluster") {
    res = {"cluster", 2, 2,
           {plus_state() * basis_ket(2, 0).adjoint(), minus_state() * basis_ket(2, 1).adjoint()},
           uniform_boundary(2), uniform_boundary(2)};
  } else if (name == "aklt") {
    res = {"aklt", 3, 2,
           {is3 * pauli_x(), is3 * pauli_x() * pauli_z(), is3 * pauli_z()},
           uniform_boundary(2), uniform_boundary(2)};
  } else if (name == "aklt_modified") {
    res = {"aklt_modified", 3, 2,
           {is3 * pauli_x(), is3 * pauli_x() * pauli_z(), is3 * hadamard()},
           uniform_boundary(2), uniform_boundary(2)};
  } else if (name == "tricluster") {
    const CVector k0 = basis_ket(2, 0), k1 = basis_ket(2, 1);
    res = {"tricluster", 6, 2,
           {is3 * plus_state() * k0.adjoint(), is3 * minus_state() * k1.adjoint(),
            is3 * minus_state() * k0.adjoint(), is3 * plus_state() * k1.adjoint(),
            is3 * plus_state() * k1.adjoint(), is3 * minus_state() * k0.adjoint()},
           uniform_boundary(2), uniform_boundary(2)};
  } else {
    throw std::invalid_argument("unknown builtin resource: " + std::string(name));
  }
  check_structure(res);
  return res;
}

/// A[m] = sum_k <m|k> A[k]: the operator applied in the correlation space
/// when the measured physical system collapses onto |m>.
inline CMatrix measured_operator(const MpsResource& res, const CVector& m) {
  if (m.size() != res.d)
    throw std::invalid_argument("measured_operator: vector dimension != d");
  CMatrix out = CMatrix::Zero(res.D, res.D);
  for (int k = 0; k < res.d; ++k) out += std::conj(m(k)) * res.tensors[k];
  return out;
}

struct ResourceValidationReport {
  struct Entry {
    bool prop_unitary = false;
    double scale = 0.0;  // c with A[m] = c U
  };
  std::vector<Entry> per_element;
  double c_sum_sq = 0.0;
  bool overall = false;
};

/// Checks the usability assumption for a given measurement basis: every
/// measured-basis operator A[m_s] must be unitary up to a constant and the
/// squared constants must sum to 1.
inline ResourceValidationReport validate_resource(const MpsResource& res,
                                                  const MeasurementBasis& basis,
                                                  double tol = kTpTol) {
  check_structure(res);
  if (basis.dim != res.d)
    throw std::invalid_argument("validate_resource: basis dimension != d");
  ResourceValidationReport report;
  bool all_unitary = true;
  for (const CVector& m : basis.vectors) {
    const CMatrix a = measured_operator(res, m);
    auto su = is_unitary_up_to_constant(a, tol);
    ResourceValidationReport::Entry entry;
    entry.prop_unitary = su.has_value();
    entry.scale = su ? su->scale : 0.0;
    all_unitary = all_unitary && entry.prop_unitary;
    report.c_sum_sq += entry.scale * entry.scale;
    report.per_element.push_back(entry);
  }
  report.overall = all_unitary && std::abs(report.c_sum_sq - 1.0) < tol;
  return report;
}

/// One application of the transfer map: rho -> sum_k A[k] rho A[k]^dag.
inline CMatrix transfer_apply(const MpsResource& res, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(res.D, res.D);
  for (const CMatrix& a : res.tensors) out += a * rho * a.adjoint();
  return out;
}

/// f_n(L, R') = <L| T^n(|R'><R'|) |L>.
inline double norm_factor(const MpsResource& res, int n, const CVector& right) {
  if (n < 1) throw std::invalid_argument("norm_factor: n must be >= 1");
  CMatrix rho = right * right.adjoint();
  for (int i = 0; i < n; ++i) rho = transfer_apply(res, rho);
  return (res.left.adjoint() * rho * res.left)(0).real();
}

inline double norm_factor(const MpsResource& res, int n) {
  return norm_factor(res, n, res.right);
}

/// Unnormalized amplitude <L| A[k_N] ... A[k_1] |R>; outcomes[0] = k_1 acts
/// first.
inline complexd amplitude(const MpsResource& res, const std::vector<int>& outcomes) {
  CVector v = res.right;
  for (int k : outcomes) {
    if (k < 0 || k >= res.d) throw std::out_of_range("amplitude: physical index out of range");
    v = res.tensors[k] * v;
  }
  return res.left.dot(v);
}

}  // namespace corrsim
