#include "brodylab/projective.hpp"

#include <algorithm>
#include <cmath>

#include "brodylab/rng.hpp"

namespace brodylab {

ProjectivePoint::ProjectivePoint(std::vector<cplx> coords)
    : coords_(std::move(coords)) {
  if (coords_.empty()) throw InvalidPoint("empty coordinate vector");
  double norm2 = 0.0;
  std::size_t imax = 0;
  double amax = 0.0;
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    const double a = std::norm(coords_[i]);
    if (!std::isfinite(a)) throw InvalidPoint("non-finite coordinate");
    norm2 += a;
    if (a > amax) {
      amax = a;
      imax = i;
    }
  }
  if (norm2 == 0.0) throw InvalidPoint("all coordinates are zero");
  // Rotate so the dominant coordinate is real-positive, then unit-normalize.
  const cplx phase = coords_[imax] / std::abs(coords_[imax]);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& c : coords_) c = c / phase * inv;
  coords_[imax] = cplx(std::abs(coords_[imax]), 0.0);
}

double fs_distance(const ProjectivePoint& p, const ProjectivePoint& q) {
  if (p.dim() != q.dim()) throw InvalidPoint("dimension mismatch");
  cplx inner = 0.0;
  for (std::size_t i = 0; i < p.coords().size(); ++i)
    inner += std::conj(p.coords()[i]) * q.coords()[i];
  // Stored points are unit-norm; clamp absorbs rounding.
  const double c = std::clamp(std::abs(inner), 0.0, 1.0);
  // The sine comes from the residual of one point orthogonal to the other's
  // line rather than from sqrt(1 - c^2): near-identical points would
  // otherwise lose half the digits to cancellation and bottom out around
  // 1e-8. Both residuals are averaged so the result is exactly symmetric.
  double s2_pq = 0.0, s2_qp = 0.0;
  for (std::size_t i = 0; i < p.coords().size(); ++i) {
    s2_pq += std::norm(q.coords()[i] - p.coords()[i] * inner);
    s2_qp += std::norm(p.coords()[i] - q.coords()[i] * std::conj(inner));
  }
  const double s2 = 0.5 * (s2_pq + s2_qp);
  return std::atan2(std::sqrt(s2), c) / std::sqrt(kPi);
}

namespace {

// Uniform point of CP^N: normalized standard complex Gaussian vector.
ProjectivePoint random_point(int N, Rng& rng) {
  std::vector<cplx> v(static_cast<std::size_t>(N) + 1);
  for (auto& c : v) {
    // Box-Muller.
    double u1 = rng.uniform();
    while (u1 == 0.0) u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    c = cplx(r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2));
  }
  return ProjectivePoint(std::move(v));
}

}  // namespace

std::vector<ProjectivePoint> fs_spanning_set(int N, double eps,
                                             std::uint64_t seed) {
  if (eps <= 0.0) throw InvalidParameter("fs_spanning_set: eps must be > 0");
  if (N < 1) throw InvalidParameter("fs_spanning_set: N must be >= 1");

  // At or above the diameter sqrt(pi)/2 a single point covers everything.
  if (eps >= std::sqrt(kPi) / 2.0) {
    std::vector<cplx> v(static_cast<std::size_t>(N) + 1, cplx(0.0, 0.0));
    v[0] = 1.0;
    return {ProjectivePoint(std::move(v))};
  }

  // Candidate cloud, dense relative to eps but capped. The basis points are
  // seeded first so the coordinate strata are always represented.
  const double per_dim = std::max(8.0, 6.0 / eps);
  std::size_t want = static_cast<std::size_t>(
      std::min(2.0e5, std::pow(per_dim, 2.0 * N) * 4.0));
  want = std::max<std::size_t>(want, 2000);

  std::vector<ProjectivePoint> cloud;
  cloud.reserve(want + N + 1);
  for (int i = 0; i <= N; ++i) {
    std::vector<cplx> v(static_cast<std::size_t>(N) + 1, cplx(0.0, 0.0));
    v[static_cast<std::size_t>(i)] = 1.0;
    cloud.emplace_back(std::move(v));
  }
  Rng rng(stream_key(seed, 0xA11CE));
  for (std::size_t i = 0; i < want; ++i) cloud.push_back(random_point(N, rng));

  // Greedy farthest-point insertion until the cloud itself is covered with
  // slack, so fresh probe points still land within eps.
  const double target = 0.8 * eps;
  std::vector<ProjectivePoint> chosen;
  chosen.push_back(cloud[0]);
  std::vector<double> dist(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    dist[i] = fs_distance(cloud[i], chosen[0]);
  for (;;) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < cloud.size(); ++i)
      if (dist[i] > dist[far]) far = i;
    if (dist[far] <= target) break;
    chosen.push_back(cloud[far]);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      dist[i] = std::min(dist[i], fs_distance(cloud[i], chosen.back()));
  }
  return chosen;
}

}  // namespace brodylab
