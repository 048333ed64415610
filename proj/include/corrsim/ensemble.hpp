#pragma once

#include "corrsim/channels.hpp"
#include "corrsim/combinat.hpp"
#include "corrsim/linalg.hpp"
#include "corrsim/measurement.hpp"
#include "corrsim/resource.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace corrsim {

// ---------------------------------------------------------------------------
// Exact evolution of the full mixture over measurement histories. Each
// history (record, Kraus index) carries the accumulated correlation-space
// operator; histories are grouped into byproduct flag sectors (p,q) and the
// induced map is reported per sector and in aggregate.
// ---------------------------------------------------------------------------

/// One measurement history: record of outcomes, Kraus branch and the exact
/// accumulated operator (products of measured-basis operators and induced
/// error operators; no rescaling).
struct Branch {
  CMatrix op;
  OutcomeRecord record;
  int p = 0, q = 0;  // byproduct flag of the record
  int kraus_index = 0;
  double weight = 1.0;  // weight of the physical Kraus branch
};

/// Adaptive measurement pattern: number of steps, the record-dependent basis
/// for each step, and the byproduct flag of a complete record.
struct Protocol {
  std::string name;
  int steps = 0;
  std::function<MeasurementBasis(int, const OutcomeRecord&)> basis_for;
  std::function<std::pair<int, int>(const OutcomeRecord&)> flag_of;
};

inline Protocol cluster_protocol(double theta, double phi, double eta) {
  Protocol p;
  p.name = "cluster";
  p.steps = 3;
  p.basis_for = [theta, phi, eta](int step, const OutcomeRecord& record) {
    const double angle = step == 1 ? theta : step == 2 ? phi : eta;
    return cluster_adaptive_basis(step, record, angle);
  };
  p.flag_of = [](const OutcomeRecord& r) { return std::make_pair(r[2], r[1]); };
  return p;
}

inline Protocol aklt_rotation_protocol(double theta, int r) {
  Protocol p;
  p.name = "aklt_rotation";
  p.steps = r;
  p.basis_for = [theta](int, const OutcomeRecord& record) {
    return aklt_adaptive_basis(record, theta);
  };
  p.flag_of = [](const OutcomeRecord& r) {
    return std::make_pair(combinat::parity_f(r), combinat::parity_g(r));
  };
  return p;
}

inline Protocol tricluster_protocol(double theta, double phi, double eta) {
  Protocol p;
  p.name = "tricluster";
  p.steps = 3;
  p.basis_for = [theta, phi, eta](int step, const OutcomeRecord& record) {
    const double angle = step == 1 ? theta : step == 2 ? phi : eta;
    return tricluster_adaptive_basis(step, record, angle);
  };
  // final operator is X^{p(s3)} Z^{q(s3)} Z^{p(s2)} (gates), so the Z power
  // folds p(s2) into the flag
  p.flag_of = [](const OutcomeRecord& r) {
    return std::make_pair(tricluster_p(r[2]), (tricluster_q(r[2]) + tricluster_p(r[1])) % 2);
  };
  return p;
}

inline constexpr std::int64_t kBranchCap = 3'000'000;

inline std::int64_t branch_count(const MpsResource& res, const Protocol& protocol,
                                 const KrausSet* err) {
  std::int64_t total = err ? static_cast<std::int64_t>(err->elements.size()) : 1;
  for (int i = 0; i < protocol.steps; ++i) {
    total *= res.d;
    if (total > kBranchCap) return total;
  }
  return total;
}

/// Walks every (record, Kraus index) history, invoking the callback with the
/// finished Branch. With an error the first step uses the induced operators
/// E_{j,s}; later steps use the record-adapted measured-basis operators.
inline void enumerate_branches(const MpsResource& res, const Protocol& protocol,
                               const KrausSet* err,
                               const std::function<void(const Branch&)>& emit) {
  check_structure(res);
  if (protocol.steps < 1) throw std::invalid_argument("enumerate_branches: empty protocol");
  if (branch_count(res, protocol, err) > kBranchCap)
    throw std::invalid_argument("enumerate_branches: branch count exceeds cap");

  struct FirstOp {
    CMatrix op;
    int s = 0, j = 0;
    double weight = 1.0;
  };
  std::vector<FirstOp> firsts;
  const MeasurementBasis first_basis = protocol.basis_for(1, {});
  if (err) {
    const KrausSet induced = induced_kraus(res, first_basis, *err);
    for (size_t idx = 0; idx < induced.elements.size(); ++idx)
      firsts.push_back({induced.elements[idx], static_cast<int>(idx) % res.d,
                        static_cast<int>(idx) / res.d, induced.weights[idx]});
  } else {
    for (int s = 0; s < res.d; ++s)
      firsts.push_back({measured_operator(res, first_basis.vectors[s]), s, 0, 1.0});
  }

  OutcomeRecord record;
  int branch_j = 0;
  double branch_w = 1.0;
  std::function<void(int, const CMatrix&)> walk = [&](int step, const CMatrix& acc) {
    if (step > protocol.steps) {
      const auto [p, q] = protocol.flag_of(record);
      emit(Branch{acc, record, p, q, branch_j, branch_w});
      return;
    }
    const MeasurementBasis basis = protocol.basis_for(step, record);
    for (int s = 0; s < res.d; ++s) {
      record.push_back(s);
      walk(step + 1, measured_operator(res, basis.vectors[s]) * acc);
      record.pop_back();
    }
  };
  for (const FirstOp& f : firsts) {
    record.assign(1, f.s);
    branch_j = f.j;
    branch_w = f.weight;
    walk(2, f.op);
  }
}

inline std::vector<Branch> branch_enumerate(const MpsResource& res, const Protocol& protocol,
                                            const KrausSet* err) {
  std::vector<Branch> out;
  enumerate_branches(res, protocol, err, [&](const Branch& b) { out.push_back(b); });
  return out;
}

// ---------------------------------------------------------------------------
// Induced map report
// ---------------------------------------------------------------------------

enum class MapVerdict { cptp, non_tp_sector, non_tp_aggregate };

inline std::string to_string(MapVerdict v) {
  switch (v) {
    case MapVerdict::cptp: return "cptp";
    case MapVerdict::non_tp_sector: return "non_tp_sector";
    case MapVerdict::non_tp_aggregate: return "non_tp_aggregate";
  }
  return "?";
}

/// One distinct operator class inside a flag sector. `op` follows the
/// integer-weight convention: every error-free measurement step is rescaled
/// by sqrt(d), so histories that differ only by byproduct bookkeeping merge
/// into a single class with an integer multiplicity.
struct SectorElement {
  CMatrix op;                    // phase-canonicalized representative
  std::int64_t multiplicity = 0;
  int kraus_index = -1;          // -1 when no error was injected
  int first_outcome = -1;        // s1; -1 when no error was injected
  double kraus_weight = 1.0;
};

struct Sector {
  std::vector<SectorElement> elements;
  CMatrix gram;       // sum over elements of mult * weight * op^dag op
  CMatrix deviation;  // gram - lambda_min(gram) I; zero iff gram ∝ I
  double residual = 0.0;  // ||gram - (tr/D) I|| / max(1, tr/D)
  bool proportional_identity = false;
};

struct InducedMapReport {
  std::string protocol;
  std::string resource;
  int corr_dim = 0;
  int steps = 0;
  bool with_error = false;
  std::int64_t denominator = 1;  // d^m with m = number of error-free steps
  std::map<std::pair<int, int>, Sector> sectors;
  CMatrix aggregate_deviation;  // sum of all weighted op^dag op minus I
  double aggregate_norm = 0.0;
  MapVerdict verdict = MapVerdict::cptp;
  double tol = kTpTol;
};

namespace detail {

inline void finish_sector(Sector& sec, int dim, double tol) {
  sec.gram = CMatrix::Zero(dim, dim);
  for (const SectorElement& e : sec.elements)
    sec.gram += static_cast<double>(e.multiplicity) * e.kraus_weight *
                (e.op.adjoint() * e.op);
  const double mean = sec.gram.trace().real() / dim;
  sec.residual = spectral_norm(sec.gram - mean * identity(dim)) / std::max(1.0, mean);
  sec.proportional_identity = sec.residual <= tol;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sec.gram, Eigen::EigenvaluesOnly);
  sec.deviation = sec.gram - es.eigenvalues().minCoeff() * identity(dim);
}

inline void finish_report(InducedMapReport& report) {
  const int dim = report.corr_dim;
  for (auto& [flag, sec] : report.sectors) finish_sector(sec, dim, report.tol);
  CMatrix total = CMatrix::Zero(dim, dim);
  for (const auto& [flag, sec] : report.sectors) total += sec.gram;
  report.aggregate_deviation =
      total / static_cast<double>(report.denominator) - identity(dim);
  report.aggregate_norm = spectral_norm(report.aggregate_deviation);
  if (report.aggregate_norm > report.tol) {
    report.verdict = MapVerdict::non_tp_aggregate;
  } else {
    bool all_sectors = true;
    for (const auto& [flag, sec] : report.sectors)
      all_sectors = all_sectors && sec.proportional_identity;
    report.verdict = all_sectors ? MapVerdict::cptp : MapVerdict::non_tp_sector;
  }
}

inline void add_class(Sector& sec, const CMatrix& op, std::int64_t mult, int kraus_index,
                      int first_outcome, double weight) {
  const CMatrix canon = canonical_phase(op);
  for (SectorElement& e : sec.elements) {
    if (e.kraus_index == kraus_index && e.first_outcome == first_outcome &&
        equal_up_to_phase(e.op, canon, 1e-9)) {
      e.multiplicity += mult;
      return;
    }
  }
  sec.elements.push_back({canon, mult, kraus_index, first_outcome, weight});
}

}  // namespace detail

/// Groups branches into flag sectors under the integer-weight convention.
/// Histories identical up to a global phase (and, with an error, sharing the
/// same (j, s1)) merge into one class.
inline InducedMapReport build_report(const MpsResource& res, const Protocol& protocol,
                                     const KrausSet* err, double tol = kTpTol) {
  InducedMapReport report;
  report.protocol = protocol.name;
  report.resource = res.name;
  report.corr_dim = res.D;
  report.steps = protocol.steps;
  report.with_error = err != nullptr;
  report.tol = tol;
  const int m = protocol.steps - (err ? 1 : 0);
  report.denominator = 1;
  for (int i = 0; i < m; ++i) report.denominator *= res.d;
  const double scale = std::sqrt(static_cast<double>(report.denominator));

  enumerate_branches(res, protocol, err, [&](const Branch& b) {
    Sector& sec = report.sectors[{b.p, b.q}];
    const int j = err ? b.kraus_index : -1;
    const int s1 = err ? b.record.front() : -1;
    detail::add_class(sec, b.op * scale, 1, j, s1, b.weight);
  });
  detail::finish_report(report);
  return report;
}

/// Three-step cluster computation J(eta)J(phi)J(theta) with an optional
/// physical error before the first measurement.
inline InducedMapReport run_cluster(const MpsResource& res, double theta, double phi,
                                    double eta, const KrausSet* err = nullptr,
                                    double tol = kTpTol) {
  if (res.d != 2) throw std::invalid_argument("run_cluster: resource is not a d=2 chain");
  return build_report(res, cluster_protocol(theta, phi, eta), err, tol);
}

/// Tricluster three-step computation (Pauli byproducts tracked through the
/// paired d=6 bases).
inline InducedMapReport run_tricluster(const MpsResource& res, double theta, double phi,
                                       double eta, const KrausSet* err = nullptr,
                                       double tol = kTpTol) {
  if (res.d != 6) throw std::invalid_argument("run_tricluster: resource is not a d=6 chain");
  return build_report(res, tricluster_protocol(theta, phi, eta), err, tol);
}

/// r-step Z-rotation on the AKLT chain. `use_counts` switches to the
/// closed-form multiplicities (no history enumeration); required for r > 12.
inline InducedMapReport run_aklt_rotation(const MpsResource& res, double theta, int r,
                                          const KrausSet* err = nullptr,
                                          bool use_counts = false, double tol = kTpTol) {
  if (res.d != 3) throw std::invalid_argument("run_aklt_rotation: resource is not a d=3 chain");
  if (r < 2) throw std::invalid_argument("run_aklt_rotation: r must be >= 2");
  if (!use_counts) {
    if (r > 12)
      throw std::invalid_argument("run_aklt_rotation: r > 12 needs the count-based fast path");
    return build_report(res, aklt_rotation_protocol(theta, r), err, tol);
  }

  InducedMapReport report;
  report.protocol = "aklt_rotation";
  report.resource = res.name;
  report.corr_dim = res.D;
  report.steps = r;
  report.with_error = err != nullptr;
  report.tol = tol;
  const int m = r - (err ? 1 : 0);
  report.denominator = 1;
  for (int i = 0; i < m; ++i) report.denominator *= 3;

  const CMatrix x = pauli_x(), z = pauli_z();
  const CMatrix rot = z_rotation(theta);
  auto pauli = [&](int p, int q) {
    CMatrix out = identity(2);
    if (p) out = x * out;
    if (q) out = out * z;  // X^p Z^q
    return out;
  };
  KrausSet induced;
  if (err)
    induced = induced_kraus(res, general_basis(theta, std::numbers::pi / 2.0, 3), *err);
  using combinat::CountKind;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      Sector& sec = report.sectors[{p, q}];
      const int h = combinat::h_indicator(p, q, r);
      if (!err) {
        detail::add_class(sec, pauli(p, q) * rot, combinat::count_closed(CountKind::S, r, p, q),
                          -1, -1, 1.0);
        if (h) detail::add_class(sec, (r % 2) ? z : identity(2), 1, -1, -1, 1.0);
        continue;
      }
      const int w = static_cast<int>(err->elements.size());
      // tail parities relative to (p,q): s1 in {0,1} flips f and contributes
      // g(s1); s1 = 2 keeps one rotation factor in the class operator
      for (int j = 0; j < w; ++j) {
        const double wj = err->weights[j];
        for (int s1 = 0; s1 < 3; ++s1) {
          const std::int64_t mult = combinat::count_closed(CountKind::T, r, p, q, s1);
          if (mult == 0) continue;
          const CMatrix& e = induced.elements[j * 3 + s1];
          CMatrix cls;
          if (s1 == 2)
            cls = pauli(p, q ^ 1) * rot * e;
          else
            cls = pauli(p ^ 1, q ^ (s1 == 1 ? 1 : 0)) * e;
          detail::add_class(sec, cls, mult, j, s1, wj);
        }
        if (h) {
          const CMatrix zr1 = (r - 1) % 2 ? z : identity(2);
          detail::add_class(sec, zr1 * induced.elements[j * 3 + 2], 1, j, 2, wj);
        }
      }
    }
  detail::finish_report(report);
  return report;
}

}  // namespace corrsim
