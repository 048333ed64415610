#pragma once

#include "corrsim/channels.hpp"
#include "corrsim/linalg.hpp"
#include "corrsim/measurement.hpp"
#include "corrsim/resource.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace corrsim {

// ---------------------------------------------------------------------------
// Trajectory picture: follow one measurement outcome, project, and ask
// whether the implemented correlation-space operator can be trace
// preserving. The scan below constructs, for d >= 3, unitary errors whose
// single-outcome operators fail that test.
// ---------------------------------------------------------------------------

struct TrajectoryResult {
  CMatrix op;  // sum_k A[k] <m_outcome|F|k>, unnormalized
  int outcome = 0;
  double norm = 0.0;  // operator norm of op
  TpVerdict verdict = TpVerdict::non_tp;
};

inline TrajectoryResult trajectory_step(const MpsResource& res, const MeasurementBasis& basis,
                                        const KrausSet* err, int outcome, double tol = kTpTol) {
  if (basis.dim != res.d) throw std::invalid_argument("trajectory_step: basis dimension != d");
  if (outcome < 0 || outcome >= res.d) throw std::out_of_range("trajectory_step: outcome out of range");
  CMatrix op;
  if (err) {
    if (err->elements.size() != 1)
      throw std::invalid_argument("trajectory_step: error must be a single Kraus operator");
    const CMatrix& f = err->elements.front();
    if (f.rows() != res.d) throw std::invalid_argument("trajectory_step: error dimension != d");
    if (max_abs(f.adjoint() * f - identity(res.d)) > tol)
      throw std::invalid_argument("trajectory_step: error must be unitary");
    op = CMatrix::Zero(res.D, res.D);
    for (int k = 0; k < res.d; ++k)
      op += basis.vectors[outcome].dot(f.col(k)) * res.tensors[k];
  } else {
    op = measured_operator(res, basis.vectors[outcome]);
  }
  return TrajectoryResult{op, outcome, spectral_norm(op),
                          is_proportional_to_unitary_and_tp(op, tol)};
}

struct PhaseConstraint {
  double value = 0.0;  // 2 phi + (t - s) (2 pi / d), reduced mod pi
  bool satisfied = false;
};

/// The scan's obstruction: proportionality of the two phase constructions
/// forces 2 phi + (t-s) w to be a multiple of pi.
inline PhaseConstraint phase_constraint(int d, double phi, int s, int t) {
  if (d < 2) throw std::invalid_argument("phase_constraint: d must be >= 2");
  const double omega = 2.0 * std::numbers::pi / d;
  double v = std::fmod(2.0 * phi + (t - s) * omega, std::numbers::pi);
  if (v < 0.0) v += std::numbers::pi;
  const bool sat = v < 1e-9 || v > std::numbers::pi - 1e-9;
  return PhaseConstraint{v, sat};
}

struct ConstraintEval {
  int s = 0, t = 0;
  double value = 0.0;
  bool satisfied = false;
};

struct CandidateEval {
  std::string construction;  // "exchange12", "exchange02_phase", "exchange01_02_phase"
  int parameter = -1;        // s or t; -1 for the parameter-free construction
  int outcome = 0;
  CMatrix op;
  double norm_sq = 0.0;       // squared operator norm (gamma / delta scalars)
  double cross_term = 0.0;    // reduced scalar gamma' / delta'; 0 where undefined
  double residual = 0.0;      // proportionality-to-identity residual of op^dag op
  TpVerdict verdict = TpVerdict::non_tp;
};

struct TheoremScanDiagnostics {
  double eta = 0.0;  // ||A[1]||^2
  double xi = 0.0;   // ||A[2]||^2
  std::vector<CandidateEval> candidates;
  std::vector<ConstraintEval> constraints;
};

struct TheoremWitness {
  ErrorSpec error;
  int outcome = 0;
  CMatrix op;
  double tp_residual = 0.0;
  std::string construction;
  std::vector<ConstraintEval> constraints;
};

namespace detail {
inline double prop_identity_residual(const CMatrix& op) {
  const int n = static_cast<int>(op.rows());
  const CMatrix gram = op.adjoint() * op;
  const double mean = gram.trace().real() / n;
  if (!(mean > 0.0)) return 1.0;
  return max_abs(gram / mean - identity(n));
}
}  // namespace detail

/// Evaluates the three unitary-error constructions (exchange of levels 1,2;
/// exchange 0,2 after a phase error; exchanges 0,1 and 0,2 after a phase
/// error) against outcomes |2> and |alpha>, in that order, and returns the
/// first trajectory operator that fails the TP test. Empty means every
/// construction stayed TP, which the phase constraints only permit at d <= 2.
inline std::optional<TheoremWitness> theorem_scan(const MpsResource& res, double theta,
                                                  double phi, double tol = kTpTol,
                                                  TheoremScanDiagnostics* diag = nullptr) {
  check_structure(res);
  const int d = res.d;
  TheoremScanDiagnostics local;
  TheoremScanDiagnostics& dg = diag ? *diag : local;
  for (int s = 0; s < d; ++s)
    for (int t = 0; t < d; ++t) {
      const PhaseConstraint pc = phase_constraint(d, phi, s, t);
      dg.constraints.push_back({s, t, pc.value, pc.satisfied});
    }
  if (d < 3) return std::nullopt;  // constructions need the |2> level

  const MeasurementBasis basis = general_basis(theta, phi, d);
  dg.eta = std::pow(spectral_norm(res.tensors[1]), 2);
  dg.xi = std::pow(spectral_norm(res.tensors[2]), 2);
  const double c2 = std::pow(std::cos(theta / 2.0), 2);
  const double s2 = std::pow(std::sin(theta / 2.0), 2);
  const double sin_theta = std::sin(theta);

  std::optional<TheoremWitness> witness;
  auto consider = [&](const std::string& construction, int parameter, const ErrorSpec& spec,
                      int outcome, double cross_base) {
    const KrausSet realized = spec.realize(d);
    const TrajectoryResult tr = trajectory_step(res, basis, &realized, outcome, tol);
    CandidateEval ev;
    ev.construction = construction;
    ev.parameter = parameter;
    ev.outcome = outcome;
    ev.op = tr.op;
    ev.norm_sq = tr.norm * tr.norm;
    ev.cross_term = cross_base == 0.0 ? 0.0
                                      : 2.0 / sin_theta * (ev.norm_sq - cross_base);
    ev.residual = detail::prop_identity_residual(tr.op);
    ev.verdict = tr.verdict;
    dg.candidates.push_back(ev);
    if (!witness && tr.verdict == TpVerdict::non_tp)
      witness = TheoremWitness{spec, outcome, tr.op, ev.residual, construction, dg.constraints};
  };

  consider("exchange12", -1, exchange_spec(1, 2), 2, 0.0);
  for (int s = 0; s < d; ++s)
    consider("exchange02_phase", s, composed_spec({exchange_spec(0, 2), phase_spec(s)}), 0,
             dg.xi * c2 + dg.eta * s2);
  for (int t = 0; t < d; ++t)
    consider("exchange01_02_phase", t,
             composed_spec({exchange_spec(0, 1), exchange_spec(0, 2), phase_spec(t)}), 0,
             dg.xi * s2 + dg.eta * c2);
  return witness;
}

struct RescueReport {
  bool prop_unitary = false;
  std::vector<double> probe_norms;  // ||K |probe>|| per probe
  double norm_spread = 0.0;
  bool nonlinear = false;  // state-dependent renormalization differs across probes
};

/// State-dependent renormalization check: when K^dag K is not proportional
/// to the identity, ||K|R>|| varies over probe states and the renormalized
/// map cannot be linear.
inline RescueReport nontp_rescue_check(const MpsResource& res, const MeasurementBasis& basis,
                                       const KrausSet* err, int outcome,
                                       const std::vector<CVector>& probes, double tol = kTpTol) {
  const TrajectoryResult tr = trajectory_step(res, basis, err, outcome, tol);
  RescueReport report;
  report.prop_unitary = tr.verdict == TpVerdict::tp;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const CVector& probe : probes) {
    const double n = (tr.op * probe).norm();
    report.probe_norms.push_back(n);
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  report.norm_spread = probes.empty() ? 0.0 : hi - lo;
  report.nonlinear = report.norm_spread > tol;
  return report;
}

}  // namespace corrsim
