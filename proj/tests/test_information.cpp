#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include <doctest.h>

#include "brodylab/information.hpp"
#include "brodylab/rng.hpp"

using namespace brodylab;

namespace {

Pmf random_pmf(int n, Rng& rng) {
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& x : p) {
    x = rng.uniform() + 1e-6;
    total += x;
  }
  for (auto& x : p) x /= total;
  return Pmf::validated(std::move(p));
}

JointPmf random_joint(int nx, int ny, Rng& rng) {
  std::vector<std::vector<double>> p(nx, std::vector<double>(ny));
  double total = 0.0;
  for (auto& row : p)
    for (auto& x : row) {
      x = rng.uniform() + 1e-6;
      total += x;
    }
  for (auto& row : p)
    for (auto& x : row) x /= total;
  return JointPmf::validated(std::move(p));
}

// Row-stochastic channel matrix.
std::vector<std::vector<double>> random_channel(int nin, int nout, Rng& rng) {
  std::vector<std::vector<double>> k(nin, std::vector<double>(nout));
  for (auto& row : k) {
    double total = 0.0;
    for (auto& x : row) {
      x = rng.uniform() + 1e-6;
      total += x;
    }
    for (auto& x : row) x /= total;
  }
  return k;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

DistortionMatrix hamming(int n) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 1.0));
  for (int i = 0; i < n; ++i) d[i][i] = 0.0;
  return DistortionMatrix::validated(std::move(d));
}

}  // namespace

TEST_SUITE("information") {

TEST_CASE("entropy examples") {
  CHECK(entropy(Pmf::validated({1.0, 0.0})) == doctest::Approx(0.0));
  CHECK(entropy(Pmf::validated({0.5, 0.5})) == doctest::Approx(1.0));
  CHECK(entropy(Pmf::validated({0.25, 0.75})) ==
        doctest::Approx(0.81127812445913283).epsilon(1e-12));
  CHECK_THROWS(Pmf::validated({0.5, 0.6}));
  CHECK_THROWS(Pmf::validated({1.5, -0.5}));
}

TEST_CASE("mutual information examples") {
  // Independent variables.
  CHECK(mutual_information(
            JointPmf::validated({{0.12, 0.28}, {0.18, 0.42}})) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // X = Y fair bit.
  CHECK(mutual_information(JointPmf::validated({{0.5, 0.0}, {0.0, 0.5}})) ==
        doctest::Approx(1.0));
  // Direct-formula oracle: H(X) + H(Y) - H(X,Y).
  CHECK(mutual_information(JointPmf::validated({{0.4, 0.1}, {0.1, 0.4}})) ==
        doctest::Approx(0.27807190511263774).epsilon(1e-10));
}

TEST_CASE("nonnegativity and symmetry on 1e3 random joints") {
  Rng rng(51);
  for (int t = 0; t < 1000; ++t) {
    const int nx = 2 + static_cast<int>(rng.next_u64() % 3);
    const int ny = 2 + static_cast<int>(rng.next_u64() % 3);
    const JointPmf j = random_joint(nx, ny, rng);
    const double mi = mutual_information(j);
    CHECK(mi >= 0.0);
    std::vector<std::vector<double>> tp(ny, std::vector<double>(nx));
    for (int a = 0; a < nx; ++a)
      for (int b = 0; b < ny; ++b) tp[b][a] = j.p[a][b];
    CHECK(std::abs(mi - mutual_information(JointPmf::validated(tp))) <=
          1e-12);
  }
}

TEST_CASE("data processing on 1e3 random joints") {
  Rng rng(52);
  for (int t = 0; t < 1000; ++t) {
    const JointPmf j = random_joint(4, 4, rng);
    // Random deterministic maps onto smaller alphabets.
    int fmap[4], gmap[4];
    for (int k = 0; k < 4; ++k) {
      fmap[k] = static_cast<int>(rng.next_u64() % 2);
      gmap[k] = static_cast<int>(rng.next_u64() % 3);
    }
    std::vector<std::vector<double>> q(2, std::vector<double>(3, 0.0));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) q[fmap[a]][gmap[b]] += j.p[a][b];
    CHECK(mutual_information(JointPmf::validated(q)) <=
          mutual_information(j) + 1e-12);
  }
}

TEST_CASE("subadditivity under conditional independence") {
  // X and Y conditionally independent given Z, built from a Z source pushed
  // through two independent channels; then I(X,Y;Z) <= I(X;Z) + I(Y;Z).
  Rng rng(53);
  for (int t = 0; t < 1000; ++t) {
    const Pmf z = random_pmf(3, rng);
    const auto kx = random_channel(3, 2, rng);
    const auto ky = random_channel(3, 2, rng);
    // Joint over ((x,y), z) with the pair flattened to one alphabet.
    std::vector<std::vector<double>> jxy_z(4, std::vector<double>(3, 0.0));
    std::vector<std::vector<double>> jx_z(2, std::vector<double>(3, 0.0));
    std::vector<std::vector<double>> jy_z(2, std::vector<double>(3, 0.0));
    for (int c = 0; c < 3; ++c)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double mass = z.p[c] * kx[c][a] * ky[c][b];
          jxy_z[2 * a + b][c] += mass;
          jx_z[a][c] += mass;
          jy_z[b][c] += mass;
        }
    const double lhs = mutual_information(JointPmf::validated(jxy_z));
    const double rhs = mutual_information(JointPmf::validated(jx_z)) +
                       mutual_information(JointPmf::validated(jy_z));
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("concavity in the source, convexity in the channel") {
  Rng rng(54);
  auto joint_from = [](const Pmf& mu,
                       const std::vector<std::vector<double>>& nu) {
    std::vector<std::vector<double>> j(mu.size(),
                                       std::vector<double>(nu[0].size()));
    for (std::size_t a = 0; a < mu.size(); ++a)
      for (std::size_t b = 0; b < nu[0].size(); ++b)
        j[a][b] = mu.p[a] * nu[a][b];
    return JointPmf::validated(std::move(j));
  };
  for (int t = 0; t < 1000; ++t) {
    const double w = rng.uniform();
    const Pmf mu1 = random_pmf(3, rng);
    const Pmf mu2 = random_pmf(3, rng);
    const auto nu1 = random_channel(3, 3, rng);
    const auto nu2 = random_channel(3, 3, rng);

    // Concave in mu for fixed channel.
    std::vector<double> mixed(3);
    for (int k = 0; k < 3; ++k)
      mixed[k] = w * mu1.p[k] + (1.0 - w) * mu2.p[k];
    const double concave_lhs =
        mutual_information(joint_from(Pmf::validated(mixed), nu1));
    const double concave_rhs =
        w * mutual_information(joint_from(mu1, nu1)) +
        (1.0 - w) * mutual_information(joint_from(mu2, nu1));
    CHECK(concave_lhs >= concave_rhs - 1e-12);

    // Convex in nu for fixed source.
    std::vector<std::vector<double>> mixed_nu(3, std::vector<double>(3));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        mixed_nu[a][b] = w * nu1[a][b] + (1.0 - w) * nu2[a][b];
    const double convex_lhs = mutual_information(joint_from(mu1, mixed_nu));
    const double convex_rhs = w * mutual_information(joint_from(mu1, nu1)) +
                              (1.0 - w) * mutual_information(joint_from(mu1, nu2));
    CHECK(convex_lhs <= convex_rhs + 1e-12);
  }
}

TEST_CASE("MI continuity under shrinking perturbations") {
  const JointPmf base = JointPmf::validated({{0.4, 0.1}, {0.1, 0.4}});
  const double i0 = mutual_information(base);
  double prev_gap = 1.0;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    std::vector<std::vector<double>> p = base.p;
    p[0][0] += delta;
    p[1][1] -= delta;
    const double gap =
        std::abs(mutual_information(JointPmf::validated(p)) - i0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap <= 1e-3);
}

TEST_CASE("Blahut-Arimoto limit points") {
  const Pmf uniform = Pmf::validated({0.5, 0.5});
  const auto relaxed = blahut_arimoto(uniform, hamming(2), 0.0);
  CHECK(relaxed.converged);
  CHECK(relaxed.rate_bits == doctest::Approx(0.0).epsilon(1e-9));

  const Pmf skewed = Pmf::validated({0.3, 0.45, 0.25});
  const auto tight = blahut_arimoto(skewed, hamming(3), 40.0);
  CHECK(tight.converged);
  CHECK(tight.rate_bits >= entropy(skewed) - 0.01);
  CHECK(tight.rate_bits <= entropy(skewed) + 1e-9);

  CHECK_THROWS_AS(blahut_arimoto(uniform, hamming(2), -1.0),
                  InvalidParameter);
}

TEST_CASE("binary source with Hamming distortion against the closed form") {
  const Pmf uniform = Pmf::validated({0.5, 0.5});
  const double target = 0.11;
  const auto point = ba_at_distortion(uniform, hamming(2), target);
  CHECK(point.distortion <= target + 1e-9);
  // Closed form at the achieved distortion: R(D) = 1 - h(D).
  const double closed = 1.0 - binary_entropy(point.distortion);
  CHECK(std::abs(point.rate_bits - closed) <= 1e-3);
  CHECK(std::abs(point.rate_bits -
                 rd_brute_force(uniform, hamming(2), point.distortion, 20)) <=
        1e-3);
}

TEST_CASE("brute force oracle limits") {
  const Pmf p = Pmf::validated({0.3, 0.7});
  CHECK(rd_brute_force(p, hamming(2), 1.0, 50) == doctest::Approx(0.0));
  CHECK(rd_brute_force(p, hamming(2), 0.0, 50) ==
        doctest::Approx(entropy(p)).epsilon(1e-6));
}

TEST_CASE("BA agrees with brute force on 50 random instances") {
  Rng rng(55);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 2);
    const Pmf source = random_pmf(n, rng);
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (auto& row : d)
      for (auto& x : row) x = rng.uniform();
    const auto dist = DistortionMatrix::validated(d);
    // Draw the target strictly between the cheapest achievable distortion
    // and the zero-rate distortion so every instance is feasible and the
    // curve is not degenerate there.
    double dmin = 0.0, dzero = std::numeric_limits<double>::infinity();
    for (int x = 0; x < n; ++x)
      dmin += source.p[x] * *std::min_element(d[x].begin(), d[x].end());
    for (int y = 0; y < n; ++y) {
      double v = 0.0;
      for (int x = 0; x < n; ++x) v += source.p[x] * d[x][y];
      dzero = std::min(dzero, v);
    }
    const double target = dmin + rng.uniform(0.15, 0.85) * (dzero - dmin);
    const auto ba = ba_at_distortion(source, dist, target);
    // Evaluate the oracle at the distortion BA actually achieved so the two
    // estimates describe the same point of the curve.
    const double brute = rd_brute_force(source, dist, ba.distortion, 12);
    CHECK(std::abs(ba.rate_bits - brute) <= 1e-3);
  }
}

TEST_CASE("RD fit recovery and validation") {
  std::vector<std::pair<double, double>> pts;
  for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64})
    pts.emplace_back(eps, 2.0 * std::log2(1.0 / eps) + 1.0);
  const auto est = fit_rd_points(pts);
  CHECK(est.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(est.intercept == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(est.fit_residual <= 1e-12);
  CHECK(rdim_slope(est) == doctest::Approx(2.0));

  CHECK_THROWS_AS(fit_rd_points({{0.1, 1.0}, {0.05, 2.0}}), InvalidParameter);
}

TEST_CASE("rd_curve rates are monotone and convex in distortion") {
  const Pmf source = Pmf::validated({0.2, 0.5, 0.3});
  const auto est = rd_curve(source, hamming(3), {0.3, 0.2, 0.1, 0.05});
  REQUIRE(est.points.size() == 4);
  // Sorted by decreasing eps; rate nondecreasing as distortion falls.
  for (std::size_t k = 1; k < est.points.size(); ++k) {
    CHECK(est.points[k].first <= est.points[k - 1].first);
    CHECK(est.points[k].second >= est.points[k - 1].second - 1e-9);
  }
  // Convexity of R(D): every middle point lies at or below the chord.
  for (std::size_t k = 1; k + 1 < est.points.size(); ++k) {
    const auto& a = est.points[k - 1];
    const auto& b = est.points[k + 1];
    const auto& m = est.points[k];
    const double w = (m.first - b.first) / (a.first - b.first);
    const double chord = w * a.second + (1.0 - w) * b.second;
    CHECK(m.second <= chord + 1e-6);
  }
}

TEST_CASE("1-D quantized BA: uniform law has information dimension 1") {
  const int bits = 9;
  const int n = 1 << bits;
  std::vector<double> xs(n);
  std::vector<double> probs(n, 1.0 / n);
  for (int i = 0; i < n; ++i) xs[i] = (i + 0.5) / n;
  const Pmf source = Pmf::validated(std::move(probs));

  std::vector<std::pair<double, double>> pts;
  for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto point = ba_1d_at_distortion(xs, source, eps);
    CHECK(point.distortion <= eps + 1e-9);
    pts.emplace_back(eps, point.rate_bits);
  }
  const auto est = fit_rd_points(pts);
  CHECK(est.slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("disk coefficient rate curve has slope 2") {
  std::vector<double> ladder;
  for (int k = 4; k <= 7; ++k) ladder.push_back(std::pow(2.0, -k));
  const auto est = disk_coefficient_rd_curve(ladder, 11);
  CHECK(est.slope == doctest::Approx(2.0).epsilon(0.1));
  for (std::size_t k = 1; k < est.points.size(); ++k)
    CHECK(est.points[k].second >= est.points[k - 1].second);
}

TEST_CASE("Kawabata-Dembo probe") {
  const std::vector<double> ladder = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  const auto s1 = kawabata_dembo_probe(1, ladder);
  CHECK(s1.pass);
  CHECK(s1.estimate.slope >= 0.9);
  CHECK(std::isfinite(s1.fitted_k));

  const auto s2 = kawabata_dembo_probe(2, ladder, 9);
  CHECK(s2.pass);
  CHECK(s2.estimate.slope >= 1.9);
}

TEST_CASE("CSV round trips") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path();

  const auto pmf_path = (dir / "pmf_test.csv").string();
  {
    std::ofstream out(pmf_path);
    out << "0.25,0.75\n";
  }
  const Pmf p = pmf_from_csv(pmf_path);
  CHECK(entropy(p) == doctest::Approx(0.81127812445913283));

  const auto joint_path = (dir / "joint_test.csv").string();
  {
    std::ofstream out(joint_path);
    out << "0.4,0.1\n0.1,0.4\n";
  }
  CHECK(mutual_information(joint_from_csv(joint_path)) ==
        doctest::Approx(0.27807190511263774));

  const auto dist_path = (dir / "dist_test.csv").string();
  {
    std::ofstream out(dist_path);
    out << "0,1\n1,0\n";
  }
  const auto d = distortion_from_csv(dist_path);
  CHECK(d.d[0][1] == doctest::Approx(1.0));

  RDEstimate est;
  est.points = {{0.25, 1.0}, {0.125, 2.0}, {0.0625, 3.0}};
  const auto rd_path = (dir / "rd_test.csv").string();
  write_rd_estimate_csv(est, rd_path);
  std::ifstream in(rd_path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "distortion,rate_bits");

  fs::remove(pmf_path);
  fs::remove(joint_path);
  fs::remove(dist_path);
  fs::remove(rd_path);
}

}  // TEST_SUITE
