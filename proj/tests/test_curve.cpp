#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

#include "brodylab/curve.hpp"
#include "brodylab/measures.hpp"
#include "brodylab/rng.hpp"

using namespace brodylab;

namespace {

CurveRep rational_z() {
  // [1 : z]
  return make_rational({{cplx(1, 0)}, {cplx(0, 0), cplx(1, 0)}});
}

CurveRep small_lattice(double L, cplx w) {
  LatticeSumNode node;
  node.L = L;
  node.offset_w = w;
  node.window_radius = 3 * L;
  for (int m = -3; m <= 3; ++m)
    for (int n = -3; n <= 3; ++n)
      node.coeffs.push_back({m, n, cplx(2.0, 0.0)});
  return make_lattice_sum(node);
}

CurveRep family_sample(double L, std::uint64_t seed, std::uint64_t index) {
  FamilyParams params;
  params.L = L;
  params.a_center = 2.0;
  return sample_curve(lattice_family(params), seed, index);
}

// Nearest pole of the lattice sum z + w - lambda = 0, lambda in L(Z + Zi).
double pole_distance(const CurveRep& curve, cplx z) {
  const auto& node = std::get<LatticeSumNode>(curve.node());
  const cplx shifted = z + node.offset_w;
  const double m = std::round(shifted.real() / node.L);
  const double n = std::round(shifted.imag() / node.L);
  return std::abs(shifted - cplx(m * node.L, n * node.L));
}

// The finite-difference oracle for |df| of [1:z]: the paper-side definition
// |df|^2 = (1/4pi) Laplacian log(1 + |z|^2) via a 5-point stencil.
double fd_df_rational_z(cplx z, double h) {
  auto u = [](cplx w) { return std::log(1.0 + std::norm(w)); };
  const double lap = (u(z + h) + u(z - h) + u(z + cplx(0, h)) +
                      u(z - cplx(0, h)) - 4.0 * u(z)) /
                     (h * h);
  return std::sqrt(lap / (4.0 * kPi));
}

}  // namespace

TEST_SUITE("curves") {

TEST_CASE("evaluate examples") {
  const ProjectivePoint q({cplx(0.3, 0.1), cplx(1.0, -0.4)});
  const CurveRep c = make_constant(q);
  CHECK(fs_distance(evaluate(c, cplx(5, -7)), q) == doctest::Approx(0.0));

  const CurveRep f = rational_z();
  const cplx z(2, 1);
  CHECK(fs_distance(evaluate(f, z), ProjectivePoint({cplx(1, 0), z})) <=
        1e-12);
}

TEST_CASE("lattice sum at a pole evaluates projectively to [0:1]") {
  const CurveRep f = small_lattice(4.0, cplx(0, 0));
  const ProjectivePoint at_pole = evaluate(f, cplx(0, 0));
  CHECK(std::abs(at_pole.coords()[0]) <= 1e-12);
  // Consistent with the limit from nearby.
  CHECK(fs_distance(at_pole, evaluate(f, cplx(1e-6, 0))) <= 1e-4);
}

TEST_CASE("local_lipschitz against the Laplacian oracle") {
  const CurveRep c = make_constant(ProjectivePoint({cplx(1, 0), cplx(0, 0)}));
  CHECK(local_lipschitz(c, cplx(3, 4)) == doctest::Approx(0.0));

  const CurveRep f = rational_z();
  for (cplx z : {cplx(0, 0), cplx(0.7, -0.3), cplx(2, 1)}) {
    const double oracle = fd_df_rational_z(z, 1e-4);
    CHECK(local_lipschitz(f, z) == doctest::Approx(oracle).epsilon(1e-6));
  }
  CHECK(local_lipschitz(f, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(kPi)).epsilon(1e-12));
}

TEST_CASE("translation: identity, group law, equivariance") {
  const CurveRep f = small_lattice(4.0, cplx(0.3, 0.2));
  Rng rng(21);
  const CurveRep t0 = translate(f, cplx(0, 0));
  const cplx a(1.3, -0.4), b(-0.6, 2.1);
  const CurveRep tab = translate(translate(f, a), b);
  const CurveRep tsum = translate(f, a + b);
  for (int t = 0; t < 1000; ++t) {
    const cplx z(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    // The metric cannot resolve identical points below ~1.5e-8
    // (acos rounding), so 1e-7 is the sharpest meaningful tolerance.
    CHECK(fs_distance(evaluate(t0, z), evaluate(f, z)) <= 1e-7);
    CHECK(fs_distance(evaluate(tab, z), evaluate(tsum, z)) <= 1e-7);
    CHECK(std::abs(local_lipschitz(translate(f, a), z) -
                   local_lipschitz(f, z + a)) <=
          1e-12 * (1.0 + local_lipschitz(f, z + a)));
  }
}

TEST_CASE("rescaling chain rule and validation") {
  const CurveRep g = small_lattice(4.0, cplx(0.1, 0.6));
  Rng rng(22);
  for (double lambda : {1.0, 0.5, 0.125}) {
    const CurveRep f = rescale(g, lambda);
    for (int t = 0; t < 300; ++t) {
      const cplx z(rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0));
      const double lhs = local_lipschitz(f, z);
      const double rhs = lambda * local_lipschitz(g, lambda * z);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + rhs));
      CHECK(fs_distance(evaluate(f, z), evaluate(g, lambda * z)) <= 1e-7);
    }
  }
  CHECK_THROWS_AS(rescale(g, 0.0), InvalidParameter);
  CHECK_THROWS_AS(rescale(g, -1.0), InvalidParameter);
}

TEST_CASE("rescale(lambda = 1) is the identity on values") {
  const CurveRep g = rational_z();
  const CurveRep f = rescale(g, 1.0);
  for (cplx z : {cplx(0, 0), cplx(1, 2), cplx(-3, 0.5)})
    CHECK(fs_distance(evaluate(f, z), evaluate(g, z)) == doctest::Approx(0.0));
}

TEST_CASE("chart consistency: distance quotient matches |df| through poles") {
  // The central difference quotient d_FS(f(z-h), f(z+h)) / 2h is a
  // chart-free probe of the spherical derivative; agreement near and away
  // from poles exercises both charts.
  const CurveRep f = family_sample(4.0, 31, 0);
  Rng rng(23);
  const double h = 1e-5;
  int checked = 0;
  for (int t = 0; t < 1000 && checked < 400; ++t) {
    const cplx z(rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0));
    if (pole_distance(f, z) < 0.05) continue;
    const double lip = local_lipschitz(f, z);
    if (lip < 1e-4) continue;  // quotient loses relative accuracy at zeros
    const double quotient =
        fs_distance(evaluate(f, z - h), evaluate(f, z + h)) / (2.0 * h);
    CHECK(std::abs(quotient - lip) / lip <= 5e-3);
    ++checked;
  }
  CHECK(checked >= 200);
  // Directly on top of a pole |df| must still be finite and smooth.
  const auto& node = std::get<LatticeSumNode>(f.node());
  const cplx pole = -node.offset_w;
  const double at_pole = local_lipschitz(f, pole);
  CHECK(std::isfinite(at_pole));
  CHECK(std::abs(local_lipschitz(f, pole + cplx(1e-7, 0)) - at_pole) <=
        1e-4 * (1.0 + at_pole));
}

TEST_CASE("window truncation: doubling the window is invisible in the core") {
  FamilyParams small;
  small.L = 100.0;
  small.a_center = 2.0;
  small.cells = 3;
  FamilyParams big = small;
  big.cells = 6;
  // Coefficient streams are keyed by the lattice coordinate, so the two
  // windows share every overlapping coefficient and the same offset.
  const CurveRep f = sample_curve(lattice_family(small), 77, 0);
  const CurveRep g = sample_curve(lattice_family(big), 77, 0);
  Rng rng(24);
  for (int t = 0; t < 200; ++t) {
    const cplx z(rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0));
    CHECK(fs_distance(evaluate(f, z), evaluate(g, z)) < 1e-6);
    CHECK(std::abs(local_lipschitz(f, z) - local_lipschitz(g, z)) < 1e-8);
  }
}

TEST_CASE("gluing: calibration, decay and far field") {
  const ProjectivePoint q({cplx(1, 0), cplx(0, 0)});
  const CurveRep f = make_constant(q);
  const GlueConfig cfg;
  const CurveRep glued = glue(f, cplx(0, 0), q, cfg);

  // Calibration: sup of d_FS from q over the far field |z| >= 1 is 1/10.
  double sup = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double theta = 2.0 * kPi * k / 64.0;
    const cplx z = std::polar(cfg.far_field_radius, theta);
    sup = std::max(sup, fs_distance(evaluate(glued, z), q));
  }
  CHECK(std::abs(sup - 0.1) <= 1e-6);

  // Far field: the a/z^3 tail is negligible at |z| = 1e3.
  CHECK(fs_distance(evaluate(glued, cplx(1000, 0)), q) < 1e-7);

  // Cubic decay over [1, 50]: d_FS * |z|^3 stays bounded near the amplitude.
  for (double r : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
    const double d = fs_distance(evaluate(glued, cplx(r, 0)), q);
    CHECK(d * r * r * r <= 1.0);
    CHECK(d * r * r * r >= 0.01);
  }
}

TEST_CASE("gluing rejects curves that move near the gluing point") {
  const CurveRep f = rational_z();
  CHECK_THROWS_AS(glue(f, cplx(0, 0), evaluate(f, 0.0)), NotLocallyConstant);
}

TEST_CASE("JSON round trip preserves evaluation") {
  std::vector<CurveRep> curves;
  curves.push_back(make_constant(ProjectivePoint({cplx(0.6, 0.2), cplx(1, 0)})));
  curves.push_back(rational_z());
  curves.push_back(small_lattice(4.0, cplx(0.7, 1.1)));
  curves.push_back(translate(rational_z(), cplx(2, -1)));
  curves.push_back(rescale(small_lattice(4.0, cplx(0, 0)), 0.5));
  {
    const ProjectivePoint q({cplx(1, 0), cplx(0, 0)});
    curves.push_back(glue(make_constant(q), cplx(1, 1), q));
  }
  Rng rng(25);
  for (const CurveRep& f : curves) {
    const nlohmann::json j = curve_to_json(f);
    CHECK(j.contains("kind"));
    CHECK(j.contains("N"));
    CHECK(j.contains("payload"));
    const CurveRep back = curve_from_json(j);
    for (int t = 0; t < 50; ++t) {
      const cplx z(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
      CHECK(fs_distance(evaluate(f, z), evaluate(back, z)) <= 1e-7);
    }
  }
}

TEST_CASE("lattice JSON payload uses m,n keys and [re,im] pairs") {
  const CurveRep f = small_lattice(4.0, cplx(0.25, 0.5));
  const nlohmann::json j = curve_to_json(f);
  REQUIRE(j.at("kind").get<std::string>() == "lattice_sum");
  const auto& coeffs = j.at("payload").at("coefficients");
  REQUIRE(coeffs.contains("0,0"));
  REQUIRE(coeffs.contains("-3,2"));
  const auto& u = coeffs.at("0,0");
  REQUIRE(u.is_array());
  REQUIRE(u.size() == 2);
  CHECK(u[0].get<double>() == doctest::Approx(2.0));
  const auto& w = j.at("payload").at("offset");
  REQUIRE(w.is_array());
  CHECK(w[1].get<double>() == doctest::Approx(0.5));
}

}  // TEST_SUITE
