#pragma once

#include "corrsim/channels.hpp"
#include "corrsim/combinat.hpp"
#include "corrsim/ensemble.hpp"
#include "corrsim/linalg.hpp"
#include "corrsim/resource.hpp"
#include "corrsim/trajectory.hpp"

#include <json.hpp>

#include <set>
#include <string>
#include <vector>

namespace corrsim::io {

using json = nlohmann::ordered_json;

// Wire conventions: complex numbers as [re, im]; matrices as row-major
// nested arrays; vectors as flat arrays of pairs. Locale independent (JSON
// mandates dot decimals).

inline json complex_to_json(const complexd& z) { return json::array({z.real(), z.imag()}); }

inline complexd complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument("expected a complex number as [re, im]");
  return complexd(j[0].get<double>(), j[1].get<double>());
}

inline json vector_to_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

inline CVector vector_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a nonempty vector");
  CVector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

inline json matrix_to_json(const CMatrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

inline CMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a nonempty matrix");
  const size_t rows = j.size();
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw std::invalid_argument("expected matrix rows as arrays");
  CMatrix m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw std::invalid_argument("ragged matrix rows");
    for (size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = complex_from_json(j[r][c]);
  }
  return m;
}

inline void expect_keys(const json& j, const std::set<std::string>& required,
                        const std::set<std::string>& optional, const std::string& what) {
  if (!j.is_object()) throw std::invalid_argument(what + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!required.count(key) && !optional.count(key))
      throw std::invalid_argument(what + ": unknown field '" + key + "'");
  for (const std::string& key : required)
    if (!j.contains(key)) throw std::invalid_argument(what + ": missing field '" + key + "'");
}

// --- resources --------------------------------------------------------------

inline json resource_to_json(const MpsResource& res) {
  json j;
  j["name"] = res.name;
  j["d"] = res.d;
  j["D"] = res.D;
  json tensors = json::array();
  for (const CMatrix& a : res.tensors) tensors.push_back(matrix_to_json(a));
  j["tensors"] = std::move(tensors);
  j["L"] = vector_to_json(res.left);
  j["R"] = vector_to_json(res.right);
  return j;
}

inline MpsResource resource_from_json(const json& j) {
  expect_keys(j, {"d", "D", "tensors", "L", "R"}, {"name"}, "resource");
  MpsResource res;
  res.name = j.value("name", "unnamed");
  if (!j["d"].is_number_integer() || !j["D"].is_number_integer())
    throw std::invalid_argument("resource: d and D must be integers");
  res.d = j["d"].get<int>();
  res.D = j["D"].get<int>();
  if (!j["tensors"].is_array())
    throw std::invalid_argument("resource: tensors must be an array");
  for (const json& t : j["tensors"]) res.tensors.push_back(matrix_from_json(t));
  res.left = vector_from_json(j["L"]);
  res.right = vector_from_json(j["R"]);
  check_structure(res);
  return res;
}

/// Parses the documented resource schema; parse failures report the line of
/// the offending byte.
inline MpsResource load_resource(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    size_t line = 1;
    for (size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw std::invalid_argument("resource parse error at line " + std::to_string(line) + ": " +
                                e.what());
  }
  return resource_from_json(j);
}

inline std::string serialize_resource(const MpsResource& res) { return resource_to_json(res).dump(2); }

// --- Kraus families and error specs -----------------------------------------

inline json kraus_to_json(const KrausSet& k) {
  json j;
  j["dim"] = k.dim;
  json elements = json::array();
  for (const CMatrix& e : k.elements) elements.push_back(matrix_to_json(e));
  j["elements"] = std::move(elements);
  j["weights"] = k.weights;
  j["labels"] = k.labels;
  return j;
}

inline KrausSet kraus_from_json(const json& j) {
  expect_keys(j, {"elements"}, {"dim", "weights", "labels"}, "kraus");
  std::vector<CMatrix> elements;
  for (const json& e : j["elements"]) elements.push_back(matrix_from_json(e));
  std::vector<double> weights;
  if (j.contains("weights")) weights = j["weights"].get<std::vector<double>>();
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
  KrausSet k = make_kraus(std::move(elements), std::move(weights), std::move(labels));
  if (j.contains("dim") && j["dim"].get<int>() != k.dim)
    throw std::invalid_argument("kraus: declared dim disagrees with elements");
  return k;
}

inline ErrorSpec error_spec_from_json(const json& j) {
  expect_keys(j, {"kind"}, {"a", "b", "s", "kraus", "factors"}, "error");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "exchange") {
    expect_keys(j, {"kind", "a", "b"}, {}, "exchange error");
    return exchange_spec(j["a"].get<int>(), j["b"].get<int>());
  }
  if (kind == "phase") {
    expect_keys(j, {"kind", "s"}, {}, "phase error");
    return phase_spec(j["s"].get<int>());
  }
  if (kind == "kraus") {
    expect_keys(j, {"kind", "kraus"}, {}, "kraus error");
    return kraus_spec(kraus_from_json(j["kraus"]));
  }
  if (kind == "composed") {
    expect_keys(j, {"kind", "factors"}, {}, "composed error");
    std::vector<ErrorSpec> factors;
    for (const json& f : j["factors"]) factors.push_back(error_spec_from_json(f));
    return composed_spec(std::move(factors));
  }
  throw std::invalid_argument("error: unknown kind '" + kind + "'");
}

inline json error_spec_to_json(const ErrorSpec& e) {
  json j;
  switch (e.kind) {
    case ErrorSpec::Kind::exchange:
      j["kind"] = "exchange";
      j["a"] = e.a;
      j["b"] = e.b;
      break;
    case ErrorSpec::Kind::phase_power:
      j["kind"] = "phase";
      j["s"] = e.s;
      break;
    case ErrorSpec::Kind::custom_kraus:
      j["kind"] = "kraus";
      j["kraus"] = kraus_to_json(e.kraus);
      break;
    case ErrorSpec::Kind::composed: {
      j["kind"] = "composed";
      json factors = json::array();
      for (const ErrorSpec& f : e.factors) factors.push_back(error_spec_to_json(f));
      j["factors"] = std::move(factors);
      break;
    }
  }
  return j;
}

// --- reports -----------------------------------------------------------------

inline json sector_to_json(const Sector& sec) {
  json j;
  json elements = json::array();
  for (const SectorElement& e : sec.elements) {
    json el;
    std::string label;
    if (e.kraus_index >= 0)
      label = "j=" + std::to_string(e.kraus_index) + ",s1=" + std::to_string(e.first_outcome);
    else
      label = "traced";
    el["label"] = label;
    el["multiplicity"] = e.multiplicity;
    el["kraus_weight"] = e.kraus_weight;
    el["op"] = matrix_to_json(e.op);
    elements.push_back(std::move(el));
  }
  j["elements"] = std::move(elements);
  j["gram"] = matrix_to_json(sec.gram);
  j["deviation"] = matrix_to_json(sec.deviation);
  j["prop_identity_residual"] = sec.residual;
  j["proportional_identity"] = sec.proportional_identity;
  return j;
}

inline json report_to_json(const InducedMapReport& report) {
  json j;
  j["protocol"] = report.protocol;
  j["resource"] = report.resource;
  j["correlation_dim"] = report.corr_dim;
  j["steps"] = report.steps;
  j["with_error"] = report.with_error;
  j["normalization_denominator"] = report.denominator;
  json sectors;
  for (const auto& [flag, sec] : report.sectors) {
    const std::string key = std::to_string(flag.first) + "," + std::to_string(flag.second);
    sectors[key] = sector_to_json(sec);
  }
  j["sectors"] = std::move(sectors);
  j["aggregate_deviation"] = matrix_to_json(report.aggregate_deviation);
  j["aggregate_deviation_norm"] = report.aggregate_norm;
  j["verdict"] = to_string(report.verdict);
  j["tolerance"] = report.tol;
  return j;
}

inline json validation_report_to_json(const ResourceValidationReport& report) {
  json j;
  json entries = json::array();
  for (const auto& e : report.per_element) {
    json el;
    el["prop_unitary"] = e.prop_unitary;
    el["scale"] = e.scale;
    entries.push_back(std::move(el));
  }
  j["per_element"] = std::move(entries);
  j["c_sum_sq"] = report.c_sum_sq;
  j["overall"] = report.overall;
  return j;
}

// --- counting tables ----------------------------------------------------------

inline std::string count_kind_name(combinat::CountKind kind) {
  switch (kind) {
    case combinat::CountKind::U: return "U";
    case combinat::CountKind::S: return "S";
    case combinat::CountKind::T: return "T";
  }
  return "?";
}

inline json count_table_to_json(const combinat::CountTable& table) {
  json j;
  j["kind"] = count_kind_name(table.kind);
  j["r"] = table.r;
  j["source"] = table.source;
  json entries = json::array();
  for (const auto& [key, value] : table.entries) {
    const auto [p, q, i] = key;
    json e;
    e["p"] = p;
    e["q"] = q;
    if (i >= 0) e["i"] = i;
    e["count"] = value;
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline std::string count_tables_to_csv(const std::vector<combinat::CountTable>& tables) {
  std::string csv = "kind,r,p,q,i,count,source\n";
  for (const auto& table : tables)
    for (const auto& [key, value] : table.entries) {
      const auto [p, q, i] = key;
      csv += count_kind_name(table.kind) + "," + std::to_string(table.r) + "," +
             std::to_string(p) + "," + std::to_string(q) + "," +
             (i >= 0 ? std::to_string(i) : "") + "," + std::to_string(value) + "," +
             table.source + "\n";
    }
  return csv;
}

// --- trajectory diagnostics ----------------------------------------------------

inline json witness_to_json(const TheoremWitness& w) {
  json j;
  j["construction"] = w.construction;
  j["error"] = error_spec_to_json(w.error);
  j["outcome"] = w.outcome;
  j["operator"] = matrix_to_json(w.op);
  j["tp_residual"] = w.tp_residual;
  json constraints = json::array();
  for (const ConstraintEval& c : w.constraints) {
    json e;
    e["s"] = c.s;
    e["t"] = c.t;
    e["value"] = c.value;
    e["satisfied"] = c.satisfied;
    constraints.push_back(std::move(e));
  }
  j["phase_constraints"] = std::move(constraints);
  return j;
}

inline json scan_diagnostics_to_json(const TheoremScanDiagnostics& d) {
  json j;
  j["eta"] = d.eta;
  j["xi"] = d.xi;
  json candidates = json::array();
  for (const CandidateEval& c : d.candidates) {
    json e;
    e["construction"] = c.construction;
    e["parameter"] = c.parameter;
    e["outcome"] = c.outcome;
    e["operator"] = matrix_to_json(c.op);
    e["norm_sq"] = c.norm_sq;
    e["cross_term"] = c.cross_term;
    e["tp_residual"] = c.residual;
    e["verdict"] = c.verdict == TpVerdict::tp ? "tp" : "non_tp";
    candidates.push_back(std::move(e));
  }
  j["candidates"] = std::move(candidates);
  json constraints = json::array();
  for (const ConstraintEval& c : d.constraints) {
    json e;
    e["s"] = c.s;
    e["t"] = c.t;
    e["value"] = c.value;
    e["satisfied"] = c.satisfied;
    constraints.push_back(std::move(e));
  }
  j["phase_constraints"] = std::move(constraints);
  return j;
}

}  // namespace corrsim::io
