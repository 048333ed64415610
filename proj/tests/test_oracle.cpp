#include <catch2/catch_amalgamated.hpp>

#include "corrsim/channels.hpp"
#include "corrsim/ensemble.hpp"
#include "corrsim/linalg.hpp"
#include "corrsim/measurement.hpp"
#include "corrsim/oracle.hpp"
#include "corrsim/resource.hpp"

#include <numbers>
#include <random>

using namespace corrsim;
using oracle::as_mixed;
using oracle::build_state;
using oracle::MixedState;
using oracle::PhysicalState;
using std::numbers::pi;

TEST_CASE("build_state") {
  const MpsResource cluster = builtin_resource("cluster");
  const PhysicalState psi = build_state(cluster, 2);
  CHECK(psi.amplitudes.norm() == Catch::Approx(1.0).epsilon(1e-12));

  // entrywise equality with the amplitude contraction
  for (const char* name : {"aklt", "tricluster"}) {
    const MpsResource res = builtin_resource(name);
    const int n = 3;
    const PhysicalState state = build_state(res, n);
    const double root = std::sqrt(norm_factor(res, n));
    std::vector<int> seq(n, 0);
    std::int64_t idx = 0;
    while (true) {
      CHECK(std::abs(state.amplitudes(idx) - amplitude(res, seq) / root) < 1e-12);
      int pos = 0;
      while (pos < n && seq[pos] == res.d - 1) seq[pos++] = 0;
      if (pos == n) break;
      ++seq[pos];
      idx = 0;
      for (int i = n - 1; i >= 0; --i) idx = idx * res.d + seq[i];
    }
  }
  CHECK_THROWS_AS(build_state(builtin_resource("tricluster"), 6), std::invalid_argument);
}

TEST_CASE("apply_error_site1") {
  const MpsResource aklt = builtin_resource("aklt");
  const PhysicalState psi = build_state(aklt, 3);

  const MixedState same = oracle::apply_error_site1(psi, identity_channel(3));
  REQUIRE(same.members.size() == 1);
  CHECK(max_abs(CMatrix(same.members.front().second) - CMatrix(psi.amplitudes)) < 1e-15);

  // unitary errors preserve purity and norm
  const MixedState rotated = oracle::apply_error_site1(psi, exchange_error(0, 2, 3));
  REQUIRE(rotated.members.size() == 1);
  CHECK(rotated.members.front().second.norm() == Catch::Approx(1.0).epsilon(1e-12));

  // TP input preserves the trace
  const MixedState noisy = oracle::apply_error_site1(psi, random_cptp(3, 3, 12));
  CHECK(oracle::trace_of(noisy) == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("measure_site") {
  const MpsResource cluster = builtin_resource("cluster");
  const PhysicalState psi = build_state(cluster, 4);
  const MeasurementBasis basis = cluster_adaptive_basis(1, {}, 0.83);
  const auto branches = oracle::measure_site(psi, 1, basis);
  REQUIRE(branches.size() == 2);
  double total = 0.0;
  for (const auto& br : branches) {
    CHECK(br.probability == Catch::Approx(0.5).epsilon(1e-10));
    CHECK(oracle::trace_of(br.post) == Catch::Approx(1.0).epsilon(1e-10));
    total += br.probability;
  }
  CHECK(total == Catch::Approx(1.0).epsilon(1e-12));

  // sites are consumed in ascending order
  CHECK_THROWS_AS(oracle::measure_site(branches[0].post, 1, basis), std::invalid_argument);
  CHECK_NOTHROW(oracle::measure_site(branches[0].post, 2, basis));
}

TEST_CASE("pure-state and density-operator routes agree") {
  const MpsResource aklt = builtin_resource("aklt");
  const PhysicalState psi = build_state(aklt, 3);
  const KrausSet err = random_cptp(3, 2, 77);
  const MeasurementBasis basis = general_basis(0.7, pi / 2.0, 3);

  const MixedState mixed = oracle::apply_error_site1(psi, err);
  CMatrix rho = psi.amplitudes * psi.amplitudes.adjoint();
  rho = oracle::rho_apply_error_site1(rho, 3, err);
  CHECK(max_abs(oracle::density_matrix(mixed) - rho) < 1e-12);

  const auto posts = oracle::project_first_site(mixed, basis);
  for (int s = 0; s < 3; ++s) {
    const CMatrix reduced = oracle::rho_project_first_site(rho, 3, basis.vectors[s]);
    CHECK(max_abs(oracle::density_matrix(posts[s]) - reduced) < 1e-12);
  }
}

TEST_CASE("probability conservation across branches") {
  struct Case {
    const char* name;
    Protocol protocol;
    KrausSet err;
    int n;
  };
  std::vector<Case> cases;
  cases.push_back({"cluster", cluster_protocol(0.3, 0.7, 1.1), random_cptp(2, 2, 21), 6});
  cases.push_back({"aklt", aklt_rotation_protocol(0.5, 3),
                   aklt_ladder_error(general_basis(0.5, pi / 2.0, 3)), 6});
  cases.push_back({"tricluster", tricluster_protocol(0.2, 0.9, 1.4), random_cptp(6, 2, 22), 4});
  for (const Case& c : cases) {
    const MpsResource res = builtin_resource(c.name);
    const double f_n = norm_factor(res, c.n);
    double total = 0.0;
    enumerate_branches(res, c.protocol, &c.err, [&](const Branch& b) {
      total += b.weight * norm_factor(res, c.n - c.protocol.steps, CVector(b.op * res.right)) / f_n;
    });
    CHECK(total == Catch::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("correlation space predictions match the dense chain") {
  const MpsResource cluster = builtin_resource("cluster");
  const auto clean = oracle::compare_with_correlation(cluster, cluster_protocol(0.4, 1.3, 2.2),
                                                      nullptr, 5);
  CHECK(clean.max_state_deviation < 1e-9);
  CHECK(clean.max_prob_deviation < 1e-10);

  const KrausSet two_kraus = random_cptp(2, 2, 31);
  const auto noisy = oracle::compare_with_correlation(cluster, cluster_protocol(0.4, 1.3, 2.2),
                                                      &two_kraus, 5);
  CHECK(noisy.max_state_deviation < 1e-9);
  CHECK(noisy.max_prob_deviation < 1e-10);

  const MpsResource aklt = builtin_resource("aklt");
  const KrausSet ladder = aklt_ladder_error(general_basis(0.9, pi / 2.0, 3));
  const auto aklt_run = oracle::compare_with_correlation(aklt, aklt_rotation_protocol(0.9, 2),
                                                         &ladder, 4);
  CHECK(aklt_run.max_state_deviation < 1e-9);
  CHECK(aklt_run.max_prob_deviation < 1e-10);

  const MpsResource tri = builtin_resource("tricluster");
  const KrausSet noise6 = random_cptp(6, 2, 33);
  const auto tri_run = oracle::compare_with_correlation(tri, tricluster_protocol(1.1, 0.3, 2.0),
                                                        &noise6, 4);
  CHECK(tri_run.max_state_deviation < 1e-9);
  CHECK(tri_run.max_prob_deviation < 1e-10);

  CHECK_THROWS_AS(
      oracle::compare_with_correlation(cluster, cluster_protocol(0.1, 0.2, 0.3), nullptr, 3),
      std::invalid_argument);
}

TEST_CASE("oracle agreement across the protocol grid") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> angle(0.1, 2.0 * pi - 0.1);
  std::uniform_real_distribution<double> theta_draw(0.1, pi - 0.1);

  const MpsResource cluster = builtin_resource("cluster");
  const KrausSet unitary2 = random_cptp(2, 1, 101);
  const KrausSet kraus2 = random_cptp(2, 2, 102);
  for (int draw = 0; draw < 5; ++draw) {
    const Protocol p = cluster_protocol(angle(rng), angle(rng), angle(rng));
    for (const KrausSet* err : {static_cast<const KrausSet*>(nullptr), &unitary2, &kraus2})
      CHECK(oracle::compare_with_correlation(cluster, p, err, 5).max_state_deviation < 1e-9);
  }

  const MpsResource aklt = builtin_resource("aklt");
  for (int r : {2, 3, 4}) {
    const int n = r + 2;
    for (int draw = 0; draw < 5; ++draw) {
      const double theta = theta_draw(rng);
      const Protocol p = aklt_rotation_protocol(theta, r);
      const KrausSet ladder = aklt_ladder_error(general_basis(theta, pi / 2.0, 3));
      CHECK(oracle::compare_with_correlation(aklt, p, nullptr, n).max_state_deviation < 1e-9);
      CHECK(oracle::compare_with_correlation(aklt, p, &ladder, n).max_state_deviation < 1e-9);
    }
  }

  const MpsResource tri = builtin_resource("tricluster");
  const KrausSet kraus6 = random_cptp(6, 2, 103);
  for (int draw = 0; draw < 5; ++draw) {
    const Protocol p = tricluster_protocol(angle(rng), angle(rng), angle(rng));
    CHECK(oracle::compare_with_correlation(tri, p, nullptr, 4).max_state_deviation < 1e-9);
    CHECK(oracle::compare_with_correlation(tri, p, &kraus6, 4).max_state_deviation < 1e-9);
  }
}
