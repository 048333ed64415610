#include <catch2/catch_amalgamated.hpp>

#include "corrsim/io.hpp"

using namespace corrsim;
using corrsim::io::json;

TEST_CASE("resource round-trip is bit exact") {
  for (const char* name : {"cluster", "aklt", "aklt_modified", "tricluster"}) {
    const MpsResource res = builtin_resource(name);
    const MpsResource back = io::load_resource(io::serialize_resource(res));
    CHECK(back.name == res.name);
    CHECK(back.d == res.d);
    CHECK(back.D == res.D);
    for (int k = 0; k < res.d; ++k) CHECK(max_abs(back.tensors[k] - res.tensors[k]) == 0.0);
    CHECK(max_abs(CMatrix(back.left - res.left)) == 0.0);
    CHECK(max_abs(CMatrix(back.right - res.right)) == 0.0);
  }
}

TEST_CASE("resource parse failures") {
  // declared d disagrees with tensor count
  json j = io::resource_to_json(builtin_resource("cluster"));
  j["d"] = 3;
  CHECK_THROWS_AS(io::resource_from_json(j), std::invalid_argument);

  CHECK_THROWS_WITH(io::load_resource("{ not json"),
                    Catch::Matchers::ContainsSubstring("parse error"));

  // non-numeric entry
  json bad = io::resource_to_json(builtin_resource("cluster"));
  bad["tensors"][0][0][0][0] = "x";
  CHECK_THROWS_AS(io::resource_from_json(bad), std::invalid_argument);

  // unknown fields are rejected
  json extra = io::resource_to_json(builtin_resource("cluster"));
  extra["frob"] = 1;
  CHECK_THROWS_WITH(io::resource_from_json(extra),
                    Catch::Matchers::ContainsSubstring("unknown field"));
}

TEST_CASE("kraus and error-spec round-trips") {
  const KrausSet k = random_cptp(3, 2, 123);
  const KrausSet back = io::kraus_from_json(io::kraus_to_json(k));
  REQUIRE(back.elements.size() == k.elements.size());
  for (size_t i = 0; i < k.elements.size(); ++i)
    CHECK(max_abs(back.elements[i] - k.elements[i]) == 0.0);
  CHECK(back.weights == k.weights);
  CHECK(back.labels == k.labels);

  const ErrorSpec composed =
      composed_spec({exchange_spec(0, 2), phase_spec(2)});
  const ErrorSpec round = io::error_spec_from_json(io::error_spec_to_json(composed));
  CHECK(max_abs(round.realize(3).elements.front() - composed.realize(3).elements.front()) == 0.0);

  CHECK_THROWS_AS(io::error_spec_from_json(json{{"kind", "meteor"}}), std::invalid_argument);
  json mism = io::kraus_to_json(k);
  mism["dim"] = 4;
  CHECK_THROWS_AS(io::kraus_from_json(mism), std::invalid_argument);
}

TEST_CASE("matrix wire format") {
  CMatrix m(2, 2);
  m << complexd(1, 2), complexd(3, -4), complexd(0, 0.5), complexd(-1, 0);
  const json j = io::matrix_to_json(m);
  CHECK(j[0][1][0].get<double>() == 3.0);
  CHECK(j[0][1][1].get<double>() == -4.0);
  CHECK(max_abs(io::matrix_from_json(j) - m) == 0.0);
  CHECK_THROWS_AS(io::matrix_from_json(json::array()), std::invalid_argument);
}

TEST_CASE("induced map report serialization") {
  const MpsResource res = builtin_resource("aklt");
  const KrausSet ladder =
      aklt_ladder_error(general_basis(0.77, std::numbers::pi / 2.0, 3));
  const InducedMapReport report = run_aklt_rotation(res, 0.77, 3, &ladder);
  const json j = io::report_to_json(report);
  CHECK(j["verdict"] == "non_tp_sector");
  CHECK(j["sectors"].contains("1,0"));
  CHECK(j["sectors"]["1,0"]["proportional_identity"] == false);
  CHECK(j["sectors"]["0,0"]["proportional_identity"] == true);
  CHECK(j["normalization_denominator"] == 9);
  CHECK(j["aggregate_deviation_norm"].get<double>() < 1e-9);
  const auto& elements = j["sectors"]["1,0"]["elements"];
  CHECK(elements.size() == 3);
  CHECK(elements[0]["label"] == "j=0,s1=0");
  CHECK(elements[0]["multiplicity"] == 3);
}

TEST_CASE("count table serialization") {
  const auto table = combinat::make_count_table(combinat::CountKind::U, 4);
  const json j = io::count_table_to_json(table);
  CHECK(j["kind"] == "U");
  CHECK(j["entries"].size() == 4);
  const std::string csv = io::count_tables_to_csv({table});
  CHECK(csv.find("U,4,0,0,,21,closed_form") != std::string::npos);
}
