#pragma once

#include "corrsim/linalg.hpp"
#include "corrsim/measurement.hpp"
#include "corrsim/resource.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace corrsim {

/// Weighted operator family: a physical channel {F_j} or an induced
/// correlation-space family {E_{j,s}}. Weights default to 1; signed weights
/// are allowed so that choi_psd_check can reject indefinite families.
struct KrausSet {
  int dim = 0;
  std::vector<CMatrix> elements;
  std::vector<double> weights;
  std::vector<std::string> labels;
};

inline KrausSet make_kraus(std::vector<CMatrix> elements, std::vector<double> weights = {},
                           std::vector<std::string> labels = {}) {
  detail::require_square_same_dim(elements);
  const int dim = static_cast<int>(elements.front().rows());
  require_dim(dim);
  if (weights.empty()) weights.assign(elements.size(), 1.0);
  if (weights.size() != elements.size())
    throw std::invalid_argument("make_kraus: weight count mismatch");
  if (labels.empty())
    for (size_t i = 0; i < elements.size(); ++i) labels.push_back("k" + std::to_string(i));
  if (labels.size() != elements.size())
    throw std::invalid_argument("make_kraus: label count mismatch");
  for (const CMatrix& e : elements)
    if (!all_finite(e)) throw std::invalid_argument("make_kraus: non-finite entries");
  return KrausSet{dim, std::move(elements), std::move(weights), std::move(labels)};
}

inline CMatrix tp_deviation(const KrausSet& k) { return tp_deviation(k.elements, k.weights); }

inline void validate_tp(const KrausSet& k, double tol = kTpTol) {
  if (max_abs(tp_deviation(k)) > tol)
    throw std::invalid_argument("channel is not trace-preserving within tolerance");
}

inline bool choi_psd_check(const KrausSet& k, double tol = kTpTol) {
  return choi_psd_check(k.elements, k.weights, tol);
}

inline KrausSet identity_channel(int d) {
  return make_kraus({identity(d)}, {1.0}, {"I"});
}

/// U_{a<->b}: exchanges |a> and |b>, fixes everything else.
inline KrausSet exchange_error(int a, int b, int d) {
  require_dim(d);
  if (a < 0 || a >= d || b < 0 || b >= d) throw std::out_of_range("exchange_error: index out of range");
  if (a == b) throw std::invalid_argument("exchange_error: a and b must differ");
  CMatrix u = identity(d);
  u(a, a) = 0.0;
  u(b, b) = 0.0;
  u(a, b) = 1.0;
  u(b, a) = 1.0;
  return make_kraus({u}, {1.0}, {"exchange(" + std::to_string(a) + "," + std::to_string(b) + ")"});
}

/// V^s with V = sum_p e^{-i w p}|p><p|, w = 2 pi / d.
inline KrausSet phase_error(int s, int d) {
  require_dim(d);
  if (d < 2) throw std::invalid_argument("phase_error: d must be >= 2");
  const double w = 2.0 * std::numbers::pi / d;
  CMatrix u = CMatrix::Zero(d, d);
  for (int p = 0; p < d; ++p) u(p, p) = std::polar(1.0, -w * p * s);
  return make_kraus({u}, {1.0}, {"phase^" + std::to_string(s)});
}

/// U_M = |m_0><0| + |m_1><1| + ... : rotates the computational basis onto the
/// measurement basis.
inline CMatrix measurement_alignment_unitary(const MeasurementBasis& basis) {
  CMatrix u = CMatrix::Zero(basis.dim, basis.dim);
  for (int s = 0; s < basis.dim; ++s) u += basis.vectors[s] * basis_ket(basis.dim, s).adjoint();
  return u;
}

/// Single-unitary error U_M ( (|0>+|1>)/sqrt2 <0| - (|0>-|1>)/sqrt2 <1| + |2><2| )
/// on a qutrit. On the AKLT chain measured in the given basis it induces the
/// ladder operators sqrt(2/3)|0><1|, sqrt(2/3)|1><0| and Z/sqrt(3).
inline KrausSet aklt_ladder_error(const MeasurementBasis& basis) {
  if (basis.dim != 3) throw std::invalid_argument("aklt_ladder_error: needs a qutrit basis");
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix g = CMatrix::Zero(3, 3);
  g(0, 0) = s;
  g(1, 0) = s;
  g(0, 1) = -s;
  g(1, 1) = s;
  g(2, 2) = 1.0;
  return make_kraus({measurement_alignment_unitary(basis) * g}, {1.0}, {"aklt_ladder"});
}

/// Hermitian unitary that swaps (|0>+|1>)/sqrt2 with |2> and fixes
/// (|0>-|1>)/sqrt2. Measuring M_{theta,pi/2} after it and selecting outcome
/// |2> implements an operator proportional to |1><0| on the AKLT chain.
inline KrausSet plus2_swap_error() {
  const double s = 1.0 / std::sqrt(2.0);
  CVector u(3), v(3);
  u << s, s, 0.0;
  v << s, -s, 0.0;
  const CVector two = basis_ket(3, 2);
  CMatrix m = two * u.adjoint() + u * two.adjoint() + v * v.adjoint();
  return make_kraus({m}, {1.0}, {"plus2_swap"});
}

/// Correlation-space family induced by a physical error followed by a
/// projective measurement: E_{j,s} = sum_k A[k] <m_s|F_j|k>. Indices run j
/// outer, s inner; the identity sum_{j,s} w_j E^dag E = I is asserted.
inline KrausSet induced_kraus(const MpsResource& res, const MeasurementBasis& basis,
                              const KrausSet& err, double tol = kTpTol) {
  if (err.dim != res.d || basis.dim != res.d)
    throw std::invalid_argument("induced_kraus: dimension mismatch");
  validate_tp(err, tol);
  std::vector<CMatrix> elements;
  std::vector<double> weights;
  std::vector<std::string> labels;
  for (size_t j = 0; j < err.elements.size(); ++j) {
    for (int s = 0; s < res.d; ++s) {
      CMatrix e = CMatrix::Zero(res.D, res.D);
      for (int k = 0; k < res.d; ++k) {
        const complexd coeff = basis.vectors[s].dot(err.elements[j].col(k));
        e += coeff * res.tensors[k];
      }
      elements.push_back(std::move(e));
      weights.push_back(err.weights[j]);
      labels.push_back("j=" + std::to_string(j) + ",s=" + std::to_string(s));
    }
  }
  KrausSet out{res.D, std::move(elements), std::move(weights), std::move(labels)};
  if (max_abs(tp_deviation(out)) > tol)
    throw std::logic_error("induced_kraus: induced family violates sum E^dag E = I");
  return out;
}

/// n_kraus Kraus operators cut from a random isometry; exactly TP by
/// construction and reproducible per seed.
inline KrausSet random_cptp(int d, int n_kraus, unsigned long long seed) {
  if (n_kraus < 1) throw std::invalid_argument("random_cptp: n_kraus must be >= 1");
  if (n_kraus * d > kMaxDim) throw std::invalid_argument("random_cptp: n_kraus * d exceeds size cap");
  std::mt19937_64 rng(seed);
  const CMatrix iso = random_isometry(n_kraus * d, d, rng);
  std::vector<CMatrix> elements;
  std::vector<std::string> labels;
  for (int j = 0; j < n_kraus; ++j) {
    elements.push_back(iso.block(j * d, 0, d, d));
    labels.push_back("F" + std::to_string(j));
  }
  return make_kraus(std::move(elements), {}, std::move(labels));
}

/// Physical error description; realize() turns it into a Kraus family on a
/// d-dimensional system.
struct ErrorSpec {
  enum class Kind { exchange, phase_power, custom_kraus, composed };
  Kind kind = Kind::custom_kraus;
  int a = 0, b = 0;  // exchange
  int s = 0;         // phase power
  KrausSet kraus;    // custom
  std::vector<ErrorSpec> factors;  // composed: product of single-unitary factors, factors[0] leftmost

  KrausSet realize(int d) const {
    switch (kind) {
      case Kind::exchange:
        return exchange_error(a, b, d);
      case Kind::phase_power:
        return phase_error(s, d);
      case Kind::custom_kraus:
        if (kraus.dim != d) throw std::invalid_argument("ErrorSpec: custom family has wrong dimension");
        return kraus;
      case Kind::composed: {
        if (factors.empty()) throw std::invalid_argument("ErrorSpec: empty composition");
        CMatrix u = identity(d);
        std::string label;
        for (const ErrorSpec& f : factors) {
          const KrausSet k = f.realize(d);
          if (k.elements.size() != 1)
            throw std::invalid_argument("ErrorSpec: composition needs single-unitary factors");
          u = u * k.elements.front();
          label += (label.empty() ? "" : "*") + k.labels.front();
        }
        return make_kraus({u}, {1.0}, {label});
      }
    }
    throw std::logic_error("ErrorSpec: unreachable");
  }
};

inline ErrorSpec exchange_spec(int a, int b) {
  ErrorSpec e;
  e.kind = ErrorSpec::Kind::exchange;
  e.a = a;
  e.b = b;
  return e;
}

inline ErrorSpec phase_spec(int s) {
  ErrorSpec e;
  e.kind = ErrorSpec::Kind::phase_power;
  e.s = s;
  return e;
}

inline ErrorSpec kraus_spec(KrausSet k) {
  ErrorSpec e;
  e.kind = ErrorSpec::Kind::custom_kraus;
  e.kraus = std::move(k);
  return e;
}

inline ErrorSpec composed_spec(std::vector<ErrorSpec> factors) {
  ErrorSpec e;
  e.kind = ErrorSpec::Kind::composed;
  e.factors = std::move(factors);
  return e;
}

}  // namespace corrsim
