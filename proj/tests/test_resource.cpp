#include <catch2/catch_amalgamated.hpp>

#include "corrsim/linalg.hpp"
#include "corrsim/measurement.hpp"
#include "corrsim/resource.hpp"

#include <numbers>
#include <random>

using namespace corrsim;
using std::numbers::pi;

TEST_CASE("builtin tensors") {
  const MpsResource cluster = builtin_resource("cluster");
  CHECK(cluster.d == 2);
  CHECK(max_abs(cluster.tensors[0] - plus_state() * basis_ket(2, 0).adjoint()) < 1e-15);
  CHECK(max_abs(cluster.tensors[1] - minus_state() * basis_ket(2, 1).adjoint()) < 1e-15);

  const MpsResource aklt = builtin_resource("aklt");
  CHECK(aklt.d == 3);
  CHECK(max_abs(aklt.tensors[2] - pauli_z() / std::sqrt(3.0)) < 1e-15);

  // stored pre-rescaled by 1/sqrt(3); undo the rescale to get the raw tensor
  const MpsResource tri = builtin_resource("tricluster");
  CHECK(tri.d == 6);
  CHECK(max_abs(std::sqrt(3.0) * tri.tensors[5] - minus_state() * basis_ket(2, 0).adjoint()) <
        1e-14);

  CHECK_THROWS_AS(builtin_resource("ghz"), std::invalid_argument);
}

TEST_CASE("cluster validation at theta = pi/3") {
  const MpsResource res = builtin_resource("cluster");
  const double theta = pi / 3.0;
  const MeasurementBasis basis = cluster_adaptive_basis(1, {}, theta);
  const auto report = validate_resource(res, basis);
  REQUIRE(report.overall);
  const double is2 = 1.0 / std::sqrt(2.0);
  for (const auto& e : report.per_element) {
    CHECK(e.prop_unitary);
    CHECK(e.scale == Catch::Approx(is2).epsilon(1e-10));
  }
  CHECK(report.c_sum_sq == Catch::Approx(1.0).epsilon(1e-10));

  // measured operators are (e^{-i theta/2}/sqrt2) X^s J(theta); the phase is
  // e^{-i theta/2} for both outcomes (direct multiplication)
  for (int s = 0; s < 2; ++s) {
    const CMatrix a = measured_operator(res, basis.vectors[s]);
    CMatrix expect = j_gate(theta) / std::sqrt(2.0);
    if (s == 1) expect = pauli_x() * expect;
    CHECK(equal_up_to_phase(a, expect, 1e-12));
    CHECK(max_abs(a - std::polar(1.0, -theta / 2.0) * expect) < 1e-12);
  }
}

TEST_CASE("aklt validation under the rotated basis") {
  const MpsResource res = builtin_resource("aklt");
  const double theta = 0.73;
  const auto report = validate_resource(res, general_basis(theta, pi / 2.0, 3));
  REQUIRE(report.overall);
  const double is3 = 1.0 / std::sqrt(3.0);
  for (const auto& e : report.per_element) CHECK(e.scale == Catch::Approx(is3).epsilon(1e-10));

  // measured operators X S_Z, XZ S_Z, Z up to phase
  const MeasurementBasis basis = general_basis(theta, pi / 2.0, 3);
  const CMatrix rot = z_rotation(theta);
  CHECK(equal_up_to_phase(measured_operator(res, basis.vectors[0]),
                          CMatrix(is3 * pauli_x() * rot), 1e-12));
  CHECK(equal_up_to_phase(measured_operator(res, basis.vectors[1]),
                          CMatrix(is3 * pauli_x() * pauli_z() * rot), 1e-12));
  CHECK(max_abs(measured_operator(res, basis.vectors[2]) - is3 * pauli_z()) < 1e-14);
}

TEST_CASE("more validation cases") {
  // computational basis on the cluster chain: rank-1 operators, not usable
  const auto bad = validate_resource(builtin_resource("cluster"), computational_basis(2));
  CHECK_FALSE(bad.overall);
  CHECK_FALSE(bad.per_element[0].prop_unitary);

  const auto modified = validate_resource(builtin_resource("aklt_modified"),
                                          general_basis(0.41, pi / 2.0, 3));
  CHECK(modified.overall);

  // the qutrit chains validate only at phi = pi/2: for other phi the mixed
  // operator cos A[0] + e^{-i phi} sin A[1] has unequal singular values
  const auto off_axis = validate_resource(builtin_resource("aklt"), general_basis(0.9, 0.3, 3));
  CHECK_FALSE(off_axis.overall);
  CHECK(off_axis.per_element[2].prop_unitary);  // A[2] = Z/sqrt3 is unaffected

  const auto tri =
      validate_resource(builtin_resource("tricluster"), tricluster_adaptive_basis(1, {}, 0.9));
  CHECK(tri.overall);
  for (const auto& e : tri.per_element)
    CHECK(e.scale == Catch::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-10));

  CHECK_THROWS_AS(validate_resource(builtin_resource("aklt"), computational_basis(2)),
                  std::invalid_argument);
}

TEST_CASE("norm factor") {
  MpsResource cluster = builtin_resource("cluster");
  cluster.right = basis_ket(2, 0);  // R = |0>, L stays |+>
  CHECK(norm_factor(cluster, 1) == Catch::Approx(1.0).epsilon(1e-12));

  // trace preservation of the transfer map keeps 0 < f_n <= 1 for unit R
  const MpsResource aklt = builtin_resource("aklt");
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 6; ++n) {
    CVector r = gaussian_matrix(2, 1, rng).col(0);
    r.normalize();
    const double f = norm_factor(aklt, n, r);
    CHECK(f > 0.0);
    CHECK(f <= 1.0 + 1e-12);
  }

  CHECK(norm_factor(aklt, 3, CVector::Zero(2)) == 0.0);
  CHECK_THROWS_AS(norm_factor(aklt, 0), std::invalid_argument);
}

TEST_CASE("transfer map preserves trace") {
  std::mt19937_64 rng(19);
  for (const char* name : {"cluster", "aklt", "aklt_modified", "tricluster"}) {
    const MpsResource res = builtin_resource(name);
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix g = gaussian_matrix(res.D, res.D, rng);
      CMatrix rho = g * g.adjoint();
      rho /= rho.trace().real();
      const CMatrix out = transfer_apply(res, rho);
      CHECK(std::abs(out.trace().real() - 1.0) < 1e-9);
      CHECK(std::abs(out.trace().imag()) < 1e-12);
    }
  }
}

TEST_CASE("amplitudes") {
  const MpsResource cluster = builtin_resource("cluster");
  CHECK(std::abs(amplitude(cluster, {0}) - complexd(1.0 / std::sqrt(2.0), 0.0)) < 1e-14);

  MpsResource aklt = builtin_resource("aklt");
  aklt.left = basis_ket(2, 0);
  aklt.right = basis_ket(2, 0);
  CHECK(std::abs(amplitude(aklt, {2, 2}) - complexd(1.0 / 3.0, 0.0)) < 1e-14);

  // a zero tensor factor kills the amplitude
  MpsResource degenerate{"degenerate", 2, 1,
                         {CMatrix::Identity(1, 1), CMatrix::Zero(1, 1)},
                         CVector::Ones(1), CVector::Ones(1)};
  CHECK(std::abs(amplitude(degenerate, {1, 0})) == 0.0);

  CHECK_THROWS_AS(amplitude(cluster, {2}), std::out_of_range);
}

TEST_CASE("amplitude sum reproduces the normalization factor") {
  struct Case {
    const char* name;
    int n;
  };
  for (const Case& c : {Case{"cluster", 6}, Case{"aklt", 6}, Case{"tricluster", 4}}) {
    const MpsResource res = builtin_resource(c.name);
    double total = 0.0;
    std::vector<int> seq(c.n, 0);
    while (true) {
      total += std::norm(amplitude(res, seq));
      int pos = 0;
      while (pos < c.n && seq[pos] == res.d - 1) seq[pos++] = 0;
      if (pos == c.n) break;
      ++seq[pos];
    }
    CHECK(total == Catch::Approx(norm_factor(res, c.n)).epsilon(1e-9));
  }
}

TEST_CASE("structure checks") {
  MpsResource res = builtin_resource("cluster");
  res.tensors.pop_back();
  CHECK_THROWS_AS(check_structure(res), std::invalid_argument);
  res = builtin_resource("cluster");
  res.left = CVector::Zero(2);
  CHECK_THROWS_AS(check_structure(res), std::invalid_argument);
  res = builtin_resource("cluster");
  res.d = 9;
  CHECK_THROWS_AS(check_structure(res), std::invalid_argument);
}
