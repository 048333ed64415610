#pragma once

#include "corrsim/channels.hpp"
#include "corrsim/ensemble.hpp"
#include "corrsim/linalg.hpp"
#include "corrsim/measurement.hpp"
#include "corrsim/resource.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace corrsim::oracle {

// Dense simulation of the full qudit chain for small N; the ground truth the
// correlation-space machinery is checked against. Site 1 is measured first
// and is the least significant digit of the amplitude index.

inline constexpr std::int64_t kStateCap = 6561;  // 3^8

inline std::int64_t state_size(int d, int n) {
  std::int64_t size = 1;
  for (int i = 0; i < n; ++i) {
    size *= d;
    if (size > kStateCap) throw std::invalid_argument("oracle: d^n exceeds state cap");
  }
  return size;
}

struct PhysicalState {
  int n_sites = 0;
  int d = 0;
  int first_site = 1;  // global index of the current least-significant site
  CVector amplitudes;
};

/// Unnormalized chain amplitudes <L| A[k_n] ... A[k_1] |rhs> for every index
/// tuple.
inline CVector chain_vector(const MpsResource& res, int n, const CVector& rhs) {
  const std::int64_t size = state_size(res.d, n);
  CVector amps(size);
  std::function<void(int, std::int64_t, std::int64_t, const CVector&)> walk =
      [&](int site, std::int64_t idx, std::int64_t stride, const CVector& v) {
        for (int k = 0; k < res.d; ++k) {
          const CVector next = res.tensors[k] * v;
          if (site == n)
            amps(idx + k * stride) = res.left.dot(next);
          else
            walk(site + 1, idx + k * stride, stride * res.d, next);
        }
      };
  if (n == 0) throw std::invalid_argument("chain_vector: n must be >= 1");
  walk(1, 0, 1, rhs);
  return amps;
}

inline PhysicalState build_state(const MpsResource& res, int n) {
  check_structure(res);
  CVector amps = chain_vector(res, n, res.right);
  const double f = norm_factor(res, n);
  if (!(f > 0.0)) throw std::invalid_argument("build_state: normalization factor is zero");
  amps /= std::sqrt(f);
  return PhysicalState{n, res.d, 1, std::move(amps)};
}

/// Mixture of weighted (possibly subnormalized) pure states,
/// rho = sum_j w_j |v_j><v_j|. Exact for any Kraus-family error and for
/// posterior states kept with their Born weights.
struct MixedState {
  int n_sites = 0;
  int d = 0;
  int first_site = 1;
  std::vector<std::pair<double, CVector>> members;
};

inline MixedState as_mixed(const PhysicalState& psi) {
  return MixedState{psi.n_sites, psi.d, psi.first_site, {{1.0, psi.amplitudes}}};
}

inline double trace_of(const MixedState& m) {
  double tr = 0.0;
  for (const auto& [w, v] : m.members) tr += w * v.squaredNorm();
  return tr;
}

inline CMatrix density_matrix(const MixedState& m) {
  CMatrix rho = CMatrix::Zero(m.members.front().second.size(), m.members.front().second.size());
  for (const auto& [w, v] : m.members) rho += w * (v * v.adjoint());
  return rho;
}

/// Applies the physical channel on the current first site:
/// rho -> sum_j w_j (F_j ⊗ I) rho (F_j ⊗ I)^dag.
inline MixedState apply_error_site1(const PhysicalState& psi, const KrausSet& err) {
  if (err.dim != psi.d) throw std::invalid_argument("apply_error_site1: dimension mismatch");
  MixedState out{psi.n_sites, psi.d, psi.first_site, {}};
  const std::int64_t blocks = psi.amplitudes.size() / psi.d;
  for (size_t j = 0; j < err.elements.size(); ++j) {
    CVector v(psi.amplitudes.size());
    for (std::int64_t b = 0; b < blocks; ++b)
      v.segment(b * psi.d, psi.d) = err.elements[j] * psi.amplitudes.segment(b * psi.d, psi.d);
    out.members.emplace_back(err.weights[j], std::move(v));
  }
  return out;
}

/// Projects the current first site onto each basis vector, dropping the
/// consumed site. Members stay subnormalized (Born weight kept in the
/// amplitudes).
inline std::vector<MixedState> project_first_site(const MixedState& state,
                                                  const MeasurementBasis& basis) {
  if (basis.dim != state.d) throw std::invalid_argument("project_first_site: dimension mismatch");
  if (state.n_sites < 1) throw std::invalid_argument("project_first_site: no sites left");
  const std::int64_t rest = state.members.front().second.size() / state.d;
  std::vector<MixedState> out;
  for (int s = 0; s < state.d; ++s) {
    MixedState post{state.n_sites - 1, state.d, state.first_site + 1, {}};
    for (const auto& [w, v] : state.members) {
      CVector reduced(rest);
      for (std::int64_t b = 0; b < rest; ++b)
        reduced(b) = basis.vectors[s].dot(v.segment(b * state.d, state.d));
      post.members.emplace_back(w, std::move(reduced));
    }
    out.push_back(std::move(post));
  }
  return out;
}

struct MeasureBranch {
  int outcome = 0;
  double probability = 0.0;
  MixedState post;  // normalized
};

/// Born-rule measurement of `site` (must be the next unconsumed site).
inline std::vector<MeasureBranch> measure_site(const MixedState& state, int site,
                                               const MeasurementBasis& basis) {
  if (site != state.first_site)
    throw std::invalid_argument("measure_site: sites must be measured in ascending order; next is " +
                                std::to_string(state.first_site));
  const double total = trace_of(state);
  if (!(total > 0.0)) throw std::invalid_argument("measure_site: state has zero trace");
  std::vector<MeasureBranch> out;
  std::vector<MixedState> posts = project_first_site(state, basis);
  for (int s = 0; s < state.d; ++s) {
    MeasureBranch br{s, trace_of(posts[s]) / total, std::move(posts[s])};
    if (br.probability > 0.0) {
      const double inv = 1.0 / std::sqrt(br.probability * total);
      for (auto& [w, v] : br.post.members) v *= inv;
    }
    out.push_back(std::move(br));
  }
  return out;
}

inline std::vector<MeasureBranch> measure_site(const PhysicalState& state, int site,
                                               const MeasurementBasis& basis) {
  return measure_site(as_mixed(state), site, basis);
}

// --- density-operator route (independent cross-check of the pure-state path)

inline CMatrix rho_apply_error_site1(const CMatrix& rho, int d, const KrausSet& err) {
  const std::int64_t size = rho.rows();
  CMatrix out = CMatrix::Zero(size, size);
  const std::int64_t blocks = size / d;
  for (size_t j = 0; j < err.elements.size(); ++j) {
    CMatrix f = CMatrix::Zero(size, size);
    for (std::int64_t b = 0; b < blocks; ++b)
      f.block(b * d, b * d, d, d) = err.elements[j];
    out += err.weights[j] * (f * rho * f.adjoint());
  }
  return out;
}

/// (<m_s| ⊗ I) rho (|m_s> ⊗ I): subnormalized posterior on the remaining
/// sites.
inline CMatrix rho_project_first_site(const CMatrix& rho, int d, const CVector& m) {
  const std::int64_t rest = rho.rows() / d;
  CMatrix out = CMatrix::Zero(rest, rest);
  for (std::int64_t a = 0; a < rest; ++a)
    for (std::int64_t b = 0; b < rest; ++b) {
      complexd acc = 0.0;
      for (int k = 0; k < d; ++k)
        for (int kp = 0; kp < d; ++kp)
          acc += std::conj(m(k)) * m(kp) * rho(a * d + k, b * d + kp);
      out(a, b) = acc;
    }
  return out;
}

// ---------------------------------------------------------------------------

struct CompareResult {
  double max_state_deviation = 0.0;  // operator norm, physical vs predicted
  double max_prob_deviation = 0.0;   // Born probability vs branch weights
};

/// Runs the protocol on the dense chain and on the correlation space and
/// compares, per measurement history, the physical reduced density operator
/// on the unmeasured sites with the prediction assembled from the branch
/// operators.
inline CompareResult compare_with_correlation(const MpsResource& res, const Protocol& protocol,
                                              const KrausSet* err, int n) {
  if (n < protocol.steps + 1)
    throw std::invalid_argument("compare_with_correlation: need n >= protocol steps + 1");
  state_size(res.d, n);

  // correlation-space side, grouped by record
  std::map<OutcomeRecord, std::vector<std::pair<double, CMatrix>>> by_record;
  enumerate_branches(res, protocol, err, [&](const Branch& b) {
    by_record[b.record].emplace_back(b.weight, b.op);
  });
  const double f_n = norm_factor(res, n);

  // physical side: walk all records, keeping subnormalized mixtures
  CompareResult result;
  const PhysicalState psi = build_state(res, n);
  MixedState root = err ? apply_error_site1(psi, *err) : as_mixed(psi);
  OutcomeRecord record;
  std::function<void(const MixedState&, int)> walk = [&](const MixedState& state, int step) {
    if (step > protocol.steps) {
      const auto& branches = by_record.at(record);
      const std::int64_t rest_sites = n - protocol.steps;
      CMatrix predicted = CMatrix::Zero(state.members.front().second.size(),
                                        state.members.front().second.size());
      double predicted_prob = 0.0;
      for (const auto& [w, op] : branches) {
        const CVector boundary = op * res.right;
        const CVector u = chain_vector(res, static_cast<int>(rest_sites), boundary);
        predicted += (w / f_n) * (u * u.adjoint());
        predicted_prob += w * norm_factor(res, static_cast<int>(rest_sites), boundary) / f_n;
      }
      const CMatrix physical = density_matrix(state);
      result.max_state_deviation =
          std::max(result.max_state_deviation, spectral_norm(physical - predicted));
      result.max_prob_deviation =
          std::max(result.max_prob_deviation, std::abs(trace_of(state) - predicted_prob));
      return;
    }
    const MeasurementBasis basis = protocol.basis_for(step, record);
    std::vector<MixedState> posts = project_first_site(state, basis);
    for (int s = 0; s < state.d; ++s) {
      record.push_back(s);
      walk(posts[s], step + 1);
      record.pop_back();
    }
  };
  walk(root, 1);
  return result;
}

}  // namespace corrsim::oracle
