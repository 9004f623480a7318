#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "brodylab/curve.hpp"
#include "brodylab/energy.hpp"
#include "brodylab/measures.hpp"

using namespace brodylab;

namespace {

CurveRep rational_z() {
  return make_rational({{cplx(1, 0)}, {cplx(0, 0), cplx(1, 0)}});
}

CurveRep periodic_lattice(double L, int cells = 3) {
  LatticeSumNode node;
  node.L = L;
  node.offset_w = cplx(0, 0);
  node.window_radius = cells * L;
  for (int m = -cells; m <= cells; ++m)
    for (int n = -cells; n <= cells; ++n)
      node.coeffs.push_back({m, n, cplx(2.0, 0.0)});
  return make_lattice_sum(node);
}

CurveRep brody_sample(std::uint64_t index) {
  FamilyParams params;  // L = 100, a_center = 2
  return sample_curve(lattice_family(params), 1234, index);
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("constant curve has zero energy everywhere") {
  const CurveRep c = make_constant(ProjectivePoint({cplx(1, 0), cplx(2, 1)}));
  const auto e = energy_integral(c, {cplx(-3, -3), 6.0}, 64);
  CHECK(e.value == doctest::Approx(0.0));
  CHECK(psi(c) == doctest::Approx(0.0));
  CHECK(psi1(c) == doctest::Approx(0.0));
  CHECK(psi2(c) == doctest::Approx(0.0));
  CHECK(nsa_characteristic(c, 8.0, 64) == doctest::Approx(0.0));
  const auto report = brody_verify(c, {cplx(-2, -2), 4.0}, 32);
  CHECK(report.verdict == "pass");
  CHECK(report.grid_max == doctest::Approx(0.0));
  CHECK_FALSE(nondegeneracy_check(c, 2.0, {cplx(-2, -2), 4.0}, 16)
                  .nondegenerate);
}

TEST_CASE("degree-energy identity for [1:z] over [-50,50]^2") {
  // Analytic oracle: whole-plane energy of a degree-1 curve is exactly 1
  // (radial integral of (1/pi)(1+r^2)^{-2}); the tail beyond the square is
  // below 4e-4.
  const CurveRep f = rational_z();
  const Square big{cplx(-50, -50), 100.0};
  const auto e = energy_integral(f, big, 2048);
  CHECK(std::abs(e.value - 1.0) <= 1e-3);

  // Additivity over the four quadrants within combined error bounds.
  double sum = 0.0, err = 0.0;
  for (cplx corner : {cplx(-50, -50), cplx(0, -50), cplx(-50, 0), cplx(0, 0)}) {
    const auto q = energy_integral(f, {corner, 50.0}, 1024);
    sum += q.value;
    err += q.error_bound;
  }
  CHECK(std::abs(sum - e.value) <= err + e.error_bound + 1e-12);

  CHECK_THROWS_AS(energy_integral(f, {cplx(0, 0), 0.0}, 64), InvalidParameter);
}

TEST_CASE("periodic lattice cell energy is 3 (degree of the cell map)") {
  const double L = 6.0;
  const CurveRep f = periodic_lattice(L);
  const double cell = cell_energy_adaptive(f, {cplx(0, 0), L}, 64, 16, 0.005);
  CHECK(std::abs(cell - 3.0) <= 0.05);
}

TEST_CASE("energy density examples") {
  CHECK(energy_density(make_constant(ProjectivePoint({cplx(1, 0), cplx(0, 0)})),
                       4.0) == doctest::Approx(0.0));
  // Rational curves have zero density: the whole-plane energy is 1.
  CHECK(energy_density(rational_z(), 100.0) <= 2.0 / (100.0 * 100.0));
  const double L = 6.0;
  const double rho = energy_density(periodic_lattice(L), L);
  CHECK(rho == doctest::Approx(3.0 / (L * L)).epsilon(0.03));
}

TEST_CASE("psi of [1:z] is 4/pi") {
  CHECK(psi(rational_z()) == doctest::Approx(4.0 / kPi).epsilon(1e-12));
}

TEST_CASE("NSA characteristic: oracle value and monotonicity") {
  // For [1:z] the inner integral is r^2/(1+r^2); at R = 3 the outer
  // integral evaluates to (1/2) ln 5.
  const CurveRep f = rational_z();
  const double t3 = nsa_characteristic(f, 3.0, 600);
  CHECK(std::abs(t3 - 0.5 * std::log(5.0)) <= 2e-3);

  const auto ladder = nsa_characteristic_ladder(f, {2, 4, 8, 16}, 400);
  REQUIRE(ladder.size() == 4);
  for (std::size_t k = 1; k < ladder.size(); ++k)
    CHECK(ladder[k] >= ladder[k - 1]);
  // The shared-field ladder agrees with the single-R quadrature.
  CHECK(ladder[1] == doctest::Approx(nsa_characteristic(f, 4.0, 400))
                         .epsilon(0.02));

  CHECK_THROWS_AS(nsa_characteristic(f, 1.0, 64), InvalidParameter);
  CHECK_THROWS_AS(nsa_characteristic(f, 0.5, 64), InvalidParameter);
}

TEST_CASE("brody_verify fails on a rescaled-up curve") {
  // max |df| of rescale([1:z], 2) is 2/sqrt(pi) > 1, attained at 0.
  const CurveRep f = rescale(rational_z(), 2.0);
  const auto report = brody_verify(f, {cplx(-4, -4), 8.0}, 128);
  CHECK(report.verdict == "fail");
  CHECK(report.grid_max ==
        doctest::Approx(2.0 / std::sqrt(kPi)).epsilon(1e-3));
}

TEST_CASE("brody_verify passes on a lattice-family sample") {
  const CurveRep f = brody_sample(0);
  const auto report =
      brody_verify(f, {cplx(-100, -100), 200.0}, 512, 1e-6);
  CHECK(report.verdict == "pass");
  CHECK(report.grid_max <= 1.0 + 1e-6);
  CHECK(report.levels >= 2);
}

TEST_CASE("nondegeneracy examples") {
  // [1:z] far from the origin is nearly constant: |df| ~ 1e-6 on the disk
  // around 1e3, far below 1/R = 0.1.
  const CurveRep f = rational_z();
  const auto res =
      nondegeneracy_check(f, 10.0, {cplx(995, -5), 10.0}, 16);
  CHECK_FALSE(res.nondegenerate);

  // Each lattice cell contains a triple pole where |df| is large. Keep the
  // scanned region inside the truncation window (poles live in [-12, 12]^2
  // for three cells of side 4) so every R-disk reaches a pole.
  const double L = 4.0;
  const CurveRep g = periodic_lattice(L);
  const auto res2 =
      nondegeneracy_check(g, 2.0 * L, {cplx(-10, -10), 5.0 * L}, 40);
  CHECK(res2.nondegenerate);
}

TEST_CASE("energy insensitivity trend for close curve pairs") {
  // g is a small translate of f, so sup_z d_FS(f, g) <= 0.02 (both Brody).
  // For curves at distance eps the energies over side-T squares differ by
  // at most c (eps T^2 + T): an eps-proportional area term plus a boundary
  // strip. On a log-log plot that caps the growth exponent at 2.
  FamilyParams params;
  params.L = 8.0;  // dense enough that every window carries real energy
  const CurveRep f = sample_curve(lattice_family(params), 1234, 3);
  const CurveRep g = translate(f, cplx(0.02, 0.0));
  std::vector<double> logT, logD;
  for (double T : {4.0, 8.0, 16.0, 32.0}) {
    const int res = static_cast<int>(T) * 12;
    const Square window{cplx(-T / 2.0, -T / 2.0), T};
    const double ef = energy_integral(f, window, res).value;
    const double eg = energy_integral(g, window, res).value;
    const double diff = std::abs(ef - eg);
    if (diff > 0.0) {
      logT.push_back(std::log(T));
      logD.push_back(std::log(diff));
    }
  }
  REQUIRE(logT.size() >= 3);
  // Least-squares slope of log diff against log T.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logT.size(); ++i) {
    mx += logT[i];
    my += logD[i];
  }
  mx /= logT.size();
  my /= logD.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < logT.size(); ++i) {
    num += (logT[i] - mx) * (logD[i] - my);
    den += (logT[i] - mx) * (logT[i] - mx);
  }
  CHECK(num / den <= 2.2);
}

TEST_CASE("grid field CSV export") {
  const GridField field =
      sample_grid_field(rational_z(), {cplx(-1, -1), 2.0}, 4);
  REQUIRE(field.resolution == 4);
  for (const auto& row : field.values)
    for (double v : row) CHECK(v >= 0.0);

  const auto path = std::filesystem::temp_directory_path() / "gf_test.csv";
  write_grid_field_csv(field, path.string());
  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "re,im,df2");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 16);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
