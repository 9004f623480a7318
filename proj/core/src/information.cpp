#include "brodylab/information.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace brodylab {

namespace {

constexpr double kLog2E = 1.4426950408889634;  // 1/ln 2

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

void check_prob_vector(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw InvalidParameter(std::string(what) + ": empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InvalidParameter(std::string(what) + ": negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidParameter(std::string(what) + ": does not sum to 1");
}

}  // namespace

Pmf Pmf::validated(std::vector<double> probs) {
  check_prob_vector(probs, "Pmf");
  return Pmf{std::move(probs)};
}

JointPmf JointPmf::validated(std::vector<std::vector<double>> probs) {
  if (probs.empty() || probs[0].empty())
    throw InvalidParameter("JointPmf: empty");
  std::vector<double> flat;
  for (const auto& row : probs) {
    if (row.size() != probs[0].size())
      throw InvalidParameter("JointPmf: ragged rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  check_prob_vector(flat, "JointPmf");
  return JointPmf{std::move(probs)};
}

Pmf JointPmf::marginal_x() const {
  std::vector<double> m(nx(), 0.0);
  for (std::size_t i = 0; i < nx(); ++i)
    for (double v : p[i]) m[i] += v;
  return Pmf{std::move(m)};
}

Pmf JointPmf::marginal_y() const {
  std::vector<double> m(ny(), 0.0);
  for (const auto& row : p)
    for (std::size_t j = 0; j < ny(); ++j) m[j] += row[j];
  return Pmf{std::move(m)};
}

DistortionMatrix DistortionMatrix::validated(
    std::vector<std::vector<double>> vals) {
  if (vals.empty() || vals[0].empty())
    throw InvalidParameter("DistortionMatrix: empty");
  for (const auto& row : vals) {
    if (row.size() != vals[0].size())
      throw InvalidParameter("DistortionMatrix: ragged rows");
    for (double v : row)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InvalidParameter("DistortionMatrix: entries must be finite, >= 0");
  }
  return DistortionMatrix{std::move(vals)};
}

double entropy(const Pmf& pmf) {
  check_prob_vector(pmf.p, "entropy");
  double h = 0.0;
  for (double v : pmf.p) h -= xlog2x(v);
  return h;
}

double mutual_information(const JointPmf& joint) {
  const Pmf px = joint.marginal_x();
  const Pmf py = joint.marginal_y();
  double hxy = 0.0;
  for (const auto& row : joint.p)
    for (double v : row) hxy -= xlog2x(v);
  return std::max(0.0, entropy(px) + entropy(py) - hxy);
}

BAPoint blahut_arimoto(const Pmf& source, const DistortionMatrix& d,
                       double slope, int max_iterations, double tolerance) {
  if (slope < 0.0) throw InvalidParameter("blahut_arimoto: slope must be >= 0");
  const std::size_t nx = source.size();
  const std::size_t ny = d.d[0].size();
  if (d.d.size() != nx) throw InvalidParameter("blahut_arimoto: shape mismatch");

  // Row-wise shift keeps exp() away from total underflow at large slopes.
  std::vector<std::vector<double>> A(nx, std::vector<double>(ny));
  for (std::size_t x = 0; x < nx; ++x) {
    const double dmin = *std::min_element(d.d[x].begin(), d.d[x].end());
    for (std::size_t y = 0; y < ny; ++y)
      A[x][y] = std::exp(-slope * (d.d[x][y] - dmin));
  }

  std::vector<double> q(ny, 1.0 / ny);
  std::vector<std::vector<double>> w(nx, std::vector<double>(ny, 0.0));
  BAPoint point;
  point.slope = slope;
  double prev_objective = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iterations; ++it) {
    for (std::size_t x = 0; x < nx; ++x) {
      double z = 0.0;
      for (std::size_t y = 0; y < ny; ++y) z += q[y] * A[x][y];
      if (z <= 0.0) throw NumericError("blahut_arimoto: degenerate partition");
      for (std::size_t y = 0; y < ny; ++y) w[x][y] = q[y] * A[x][y] / z;
    }
    std::vector<double> qn(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) qn[y] += source.p[x] * w[x][y];
    q = std::move(qn);

    double rate = 0.0, dist = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        const double m = source.p[x] * w[x][y];
        if (m > 0.0 && q[y] > 0.0) rate += m * std::log2(w[x][y] / q[y]);
        dist += m * d.d[x][y];
      }
    point.rate_bits = std::max(0.0, rate);
    point.distortion = dist;
    point.iterations = it;
    const double objective = rate + slope * kLog2E * dist;
    if (std::abs(objective - prev_objective) <=
        tolerance * std::max(1.0, std::abs(objective))) {
      point.converged = true;
      break;
    }
    prev_objective = objective;
  }
  return point;
}

namespace {

double zero_rate_distortion(const Pmf& source, const DistortionMatrix& d) {
  // Best distortion with an X-independent output: a point mass.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < d.d[0].size(); ++y) {
    double v = 0.0;
    for (std::size_t x = 0; x < source.size(); ++x)
      v += source.p[x] * d.d[x][y];
    best = std::min(best, v);
  }
  return best;
}

double min_distortion(const Pmf& source, const DistortionMatrix& d) {
  double v = 0.0;
  for (std::size_t x = 0; x < source.size(); ++x)
    v += source.p[x] * *std::min_element(d.d[x].begin(), d.d[x].end());
  return v;
}

}  // namespace

BAPoint ba_at_distortion(const Pmf& source, const DistortionMatrix& d,
                         double distortion_target) {
  if (distortion_target < min_distortion(source, d) - 1e-12)
    throw TargetUnreachable("distortion target below the achievable minimum");
  if (distortion_target >= zero_rate_distortion(source, d)) {
    BAPoint point;
    point.distortion = distortion_target;
    point.converged = true;
    return point;
  }
  double lo = 0.0, hi = 1.0;
  BAPoint at_hi = blahut_arimoto(source, d, hi);
  int guard = 0;
  while (at_hi.distortion > distortion_target && ++guard <= 60) {
    lo = hi;
    hi *= 2.0;
    at_hi = blahut_arimoto(source, d, hi);
  }
  if (at_hi.distortion > distortion_target)
    throw NumericError("ba_at_distortion: slope search failed");
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const BAPoint at_mid = blahut_arimoto(source, d, mid);
    if (at_mid.distortion > distortion_target) {
      lo = mid;
    } else {
      hi = mid;
      at_hi = at_mid;
    }
  }
  return at_hi;  // feasible side of the bracket
}

namespace {

struct RateDist {
  double rate = 0.0;
  double dist = 0.0;
};

RateDist channel_rate_dist(const Pmf& source,
                           const std::vector<std::vector<double>>& d,
                           const std::vector<std::vector<double>>& w) {
  const std::size_t nx = source.size(), ny = d[0].size();
  std::vector<double> q(ny, 0.0);
  RateDist out;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      const double m = source.p[x] * w[x][y];
      q[y] += m;
      out.dist += m * d[x][y];
    }
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      const double m = source.p[x] * w[x][y];
      if (m > 0.0 && q[y] > 0.0) out.rate += m * std::log2(w[x][y] / q[y]);
    }
  return out;
}

// Minimize rate + s * distortion over channels (s in bits per distortion
// unit) by multiplicative-weights descent with a backtracking step size.
// The update keeps each row strictly inside its simplex, so the entropy
// part of the gradient stays finite. `w` carries the warm start in and the
// minimizer out.
double lagrangian_min(const Pmf& source,
                      const std::vector<std::vector<double>>& d, double s,
                      std::vector<std::vector<double>>& w) {
  const std::size_t nx = source.size(), ny = d[0].size();
  const auto value = [&](const std::vector<std::vector<double>>& ch) {
    const RateDist rd = channel_rate_dist(source, d, ch);
    return rd.rate + s * rd.dist;
  };
  double obj = value(w);
  std::vector<std::vector<double>> grad(nx, std::vector<double>(ny));
  double eta = 0.5 / (1.0 + s);
  for (int it = 0; it < 2000 && eta > 1e-18; ++it) {
    std::vector<double> q(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) q[y] += source.p[x] * w[x][y];
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        grad[x][y] = source.p[x] *
                     (std::log2(std::max(w[x][y], 1e-300) /
                                std::max(q[y], 1e-300)) +
                      s * d[x][y]);
    std::vector<std::vector<double>> cand(nx, std::vector<double>(ny));
    for (std::size_t x = 0; x < nx; ++x) {
      double sum = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        const double e = std::clamp(-eta * grad[x][y], -50.0, 50.0);
        cand[x][y] = w[x][y] * std::exp(e);
        sum += cand[x][y];
      }
      // Renormalize with a tiny uniform floor: a coordinate that underflows
      // to zero could never revive multiplicatively, and the floor costs
      // ~1e-11 bits in the objective.
      for (double& v : cand[x])
        v = (1.0 - 1e-12) * v / sum + 1e-12 / static_cast<double>(ny);
    }
    const double cand_obj = value(cand);
    if (cand_obj < obj) {
      obj = cand_obj;
      w = cand;
      eta *= 1.3;
    } else {
      eta *= 0.5;
    }
  }
  return obj;
}

// Lagrange dual of the rate-distortion problem on a fixed output alphabet:
// g(s) = min_w [I + s E d] - s D, concave in s with sup_s g(s) = R(D).
double rd_dual_value(const Pmf& source,
                     const std::vector<std::vector<double>>& d,
                     double distortion_target, int slope_steps) {
  const std::size_t nx = source.size(), ny = d[0].size();
  // Cold start each evaluation: carrying the previous minimizer between
  // slopes looks attractive but drags along whatever support the last slope
  // favored, and a revived coordinate converges slower than a fresh start.
  const auto g = [&](double s) {
    std::vector<std::vector<double>> w(
        nx, std::vector<double>(ny, 1.0 / static_cast<double>(ny)));
    return lagrangian_min(source, d, s, w) - s * distortion_target;
  };

  // Bracket the concave maximum by doubling the slope until g turns over.
  double best = g(0.0);
  double s_hi = 1.0;
  double g_hi = g(s_hi);
  best = std::max(best, g_hi);
  while (s_hi < 1048576.0) {
    const double g_next = g(2.0 * s_hi);
    s_hi *= 2.0;
    best = std::max(best, g_next);
    if (g_next < g_hi) break;
    g_hi = g_next;
  }

  // Golden-section refinement on [0, s_hi].
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = s_hi;
  double s1 = b - phi * (b - a), s2 = a + phi * (b - a);
  double g1 = g(s1), g2 = g(s2);
  for (int it = 0; it < std::max(40, 8 * slope_steps); ++it) {
    if (g1 < g2) {
      a = s1;
      s1 = s2;
      g1 = g2;
      s2 = a + phi * (b - a);
      g2 = g(s2);
    } else {
      b = s2;
      s2 = s1;
      g2 = g1;
      s1 = b - phi * (b - a);
      g1 = g(s1);
    }
    best = std::max(best, std::max(g1, g2));
  }
  return std::max(0.0, best);
}

}  // namespace

double rd_brute_force(const Pmf& source, const DistortionMatrix& d,
                      double distortion_target, int grid_resolution) {
  const std::size_t nx = source.size(), ny = d.d[0].size();
  if (nx * ny > 9)
    throw InvalidParameter("rd_brute_force: alphabets larger than 3x3");
  if (distortion_target < min_distortion(source, d) - 1e-12)
    throw TargetUnreachable("distortion target below the achievable minimum");

  // The optimum often leaves an output letter unused, and a descent that
  // keeps every column alive crawls toward the boundary without reaching
  // it. Enumerate output sub-alphabets explicitly and keep the cheapest
  // feasible one; restricting the alphabet can only raise the rate, so the
  // minimum over masks is the full-alphabet value.
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << ny); ++mask) {
    std::vector<std::size_t> cols;
    for (std::size_t y = 0; y < ny; ++y)
      if (mask & (1u << y)) cols.push_back(y);
    std::vector<std::vector<double>> sub(nx, std::vector<double>(cols.size()));
    double sub_dmin = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      double row_min = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < cols.size(); ++j) {
        sub[x][j] = d.d[x][cols[j]];
        row_min = std::min(row_min, sub[x][j]);
      }
      sub_dmin += source.p[x] * row_min;
    }
    if (sub_dmin > distortion_target + 1e-12) continue;  // infeasible subset
    best = std::min(
        best, rd_dual_value(source, sub, distortion_target, grid_resolution));
  }
  return best;
}

RDEstimate fit_rd_points(std::vector<std::pair<double, double>> points) {
  if (points.size() < 3)
    throw InvalidParameter("fit_rd_points: need at least 3 points");
  RDEstimate est;
  est.points = std::move(points);
  // Least squares of rate against log2(1/eps).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(est.points.size());
  for (const auto& [eps, rate] : est.points) {
    const double x = std::log2(1.0 / eps);
    sx += x;
    sy += rate;
    sxx += x * x;
    sxy += x * rate;
  }
  est.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  est.intercept = (sy - est.slope * sx) / n;
  double rss = 0.0;
  for (const auto& [eps, rate] : est.points) {
    const double fit = est.slope * std::log2(1.0 / eps) + est.intercept;
    rss += (rate - fit) * (rate - fit);
  }
  est.fit_residual = std::sqrt(rss / n);
  return est;
}

RDEstimate rd_curve(const Pmf& source, const DistortionMatrix& d,
                    const std::vector<double>& eps_ladder) {
  if (eps_ladder.size() < 3)
    throw InvalidParameter("rd_curve: need at least 3 distortion levels");
  std::vector<std::pair<double, double>> points;
  for (double eps : eps_ladder)
    points.emplace_back(eps, ba_at_distortion(source, d, eps).rate_bits);
  return fit_rd_points(std::move(points));
}

double rdim_slope(const RDEstimate& est) { return est.slope; }

namespace {

// Warm-startable core of the banded 1-D solver; `q` carries the output
// distribution between calls at nearby slopes.
BAPoint ba_1d_solve(const std::vector<double>& xs, const Pmf& source,
                    double slope, int max_iterations, double tolerance,
                    std::vector<double>& q);

}  // namespace

BAPoint ba_1d_quantized(const std::vector<double>& xs, const Pmf& source,
                        double slope, int max_iterations, double tolerance) {
  std::vector<double> q(xs.size(), 1.0 / static_cast<double>(xs.size()));
  return ba_1d_solve(xs, source, slope, max_iterations, tolerance, q);
}

namespace {

BAPoint ba_1d_solve(const std::vector<double>& xs, const Pmf& source,
                    double slope, int max_iterations, double tolerance,
                    std::vector<double>& q) {
  const std::size_t n = xs.size();
  if (source.size() != n) throw InvalidParameter("ba_1d_quantized: size mismatch");
  if (slope < 0.0) throw InvalidParameter("ba_1d_quantized: slope must be >= 0");
  const double dx = xs[1] - xs[0];
  if (slope * dx <= 0.0) {
    // Zero-rate limit: point mass at the 1-D median.
    BAPoint point;
    point.converged = true;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < n; ++y) {
      double v = 0.0;
      for (std::size_t x = 0; x < n; ++x)
        v += source.p[x] * std::abs(xs[x] - xs[y]);
      best = std::min(best, v);
    }
    point.distortion = best;
    return point;
  }

  // exp(-13.8) ~ 1e-6: weights below that move the rate by far less than
  // the 1e-3-bit resolution anything downstream asks for.
  const int band = std::min<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(n),
      static_cast<std::ptrdiff_t>(std::ceil(13.8 / (slope * dx))));
  std::vector<double> kernel(band + 1);
  for (int k = 0; k <= band; ++k) kernel[k] = std::exp(-slope * k * dx);

  std::vector<double> z(n, 0.0), ratio(n, 0.0);
  BAPoint point;
  point.slope = slope;
  double prev_objective = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iterations; ++it) {
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t lo = x >= static_cast<std::size_t>(band) ? x - band : 0;
      const std::size_t hi = std::min(n - 1, x + band);
      double zx = 0.0;
      for (std::size_t y = lo; y <= hi; ++y)
        zx += q[y] * kernel[std::abs(static_cast<std::ptrdiff_t>(y) -
                                     static_cast<std::ptrdiff_t>(x))];
      z[x] = zx;
      ratio[x] = source.p[x] / zx;
    }
    // q'_y = q_y * sum_x p_x K(x,y) / z_x, plus rate/distortion in one pass.
    std::vector<double> qn(n, 0.0);
    double rate = 0.0, dist = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t lo = x >= static_cast<std::size_t>(band) ? x - band : 0;
      const std::size_t hi = std::min(n - 1, x + band);
      for (std::size_t y = lo; y <= hi; ++y) {
        const int k = std::abs(static_cast<int>(y) - static_cast<int>(x));
        const double w = q[y] * kernel[k] / z[x];  // w(y|x)
        const double m = source.p[x] * w;
        qn[y] += m;
        dist += m * k * dx;
        // log2(w/q_y) = log2(kernel/z_x) = (-slope*k*dx - ln z_x)/ln 2
        if (m > 0.0) rate += m * (-slope * k * dx - std::log(z[x])) * kLog2E;
      }
    }
    q = std::move(qn);
    point.rate_bits = std::max(0.0, rate);
    point.distortion = dist;
    point.iterations = it;
    const double objective = rate + slope * kLog2E * dist;
    if (std::abs(objective - prev_objective) <=
        tolerance * std::max(1.0, std::abs(objective))) {
      point.converged = true;
      break;
    }
    prev_objective = objective;
  }
  return point;
}

}  // namespace

BAPoint ba_1d_at_distortion(const std::vector<double>& xs, const Pmf& source,
                            double distortion_target) {
  if (distortion_target <= 0.0)
    throw InvalidParameter("ba_1d_at_distortion: target must be > 0");
  BAPoint at_zero = ba_1d_quantized(xs, source, 0.0);
  if (at_zero.distortion <= distortion_target) return at_zero;

  // For |x-y| distortion the optimal slope sits near 1/D (nats), so start
  // the bracket there instead of at zero; q is warm-started across evals.
  std::vector<double> q(xs.size(), 1.0 / static_cast<double>(xs.size()));
  // Loose per-solve tolerance: the bisection only needs distortions good
  // to ~1e-3 relative, and the warm-started q keeps refining across evals.
  const auto eval = [&](double s) {
    return ba_1d_solve(xs, source, s, 400, 1e-7, q);
  };
  double lo = 0.25 / distortion_target, hi = lo;
  BAPoint at_hi = eval(hi);
  if (at_hi.distortion > distortion_target) {
    int guard = 0;
    while (at_hi.distortion > distortion_target && ++guard <= 40) {
      lo = hi;
      hi *= 2.0;
      at_hi = eval(hi);
    }
  } else {
    while (lo > 1e-9) {
      lo *= 0.25;
      const BAPoint at_lo = eval(lo);
      if (at_lo.distortion > distortion_target) break;
      hi = lo;
      at_hi = at_lo;
    }
  }
  for (int it = 0; it < 40 && (hi - lo) > 1e-3 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const BAPoint at_mid = eval(mid);
    if (at_mid.distortion > distortion_target) {
      lo = mid;
    } else {
      hi = mid;
      at_hi = at_mid;
    }
  }
  if (!(at_hi.distortion <= distortion_target)) at_hi = eval(hi);
  return at_hi;
}

namespace {

std::vector<double> unit_interval_grid(int grid_bits, double a, double b) {
  const int n = 1 << grid_bits;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i)
    xs[i] = a + (b - a) * (i + 0.5) / n;
  return xs;
}

Pmf semicircle_pmf(const std::vector<double>& xs) {
  std::vector<double> p(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    p[i] = std::sqrt(std::max(0.0, 1.0 - xs[i] * xs[i]));
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return Pmf{std::move(p)};
}

}  // namespace

double disk_coefficient_rate(double eps, int grid_bits) {
  if (eps <= 0.0) throw InvalidParameter("disk_coefficient_rate: eps must be > 0");
  if (eps >= 2.0) return 0.0;  // at or above the value-space diameter
  // Grid fine enough for ~16 cells per distortion budget, capped by
  // grid_bits; a fixed maximal grid would make coarse budgets needlessly
  // expensive (the kernel band scales inversely with slope * dx).
  int bits = 9;
  while ((1 << bits) < 32.0 / eps && bits < grid_bits) ++bits;
  const std::vector<double> xs = unit_interval_grid(bits, -1.0, 1.0);
  const Pmf marginal = semicircle_pmf(xs);
  // Product coding: |dx| + |dy| bounds the Euclidean error, so an eps/2
  // budget per coordinate meets the disk budget.
  return 2.0 * ba_1d_at_distortion(xs, marginal, eps / 2.0).rate_bits;
}

RDEstimate disk_coefficient_rd_curve(const std::vector<double>& eps_ladder,
                                     int grid_bits) {
  if (eps_ladder.size() < 3)
    throw InvalidParameter("disk_coefficient_rd_curve: need >= 3 levels");
  std::vector<std::pair<double, double>> points;
  for (double eps : eps_ladder)
    points.emplace_back(eps, disk_coefficient_rate(eps, grid_bits));
  return fit_rd_points(std::move(points));
}

KawabataDemboReport kawabata_dembo_probe(int s,
                                         const std::vector<double>& eps_ladder,
                                         int grid_bits) {
  if (s != 1 && s != 2)
    throw InvalidParameter("kawabata_dembo_probe: s must be 1 or 2");
  const std::vector<double> xs = unit_interval_grid(grid_bits, 0.0, 1.0);
  const Pmf uniform = Pmf{std::vector<double>(xs.size(), 1.0 / xs.size())};

  KawabataDemboReport report;
  report.s = s;
  std::vector<std::pair<double, double>> points;
  for (double eps : eps_ladder) {
    double rate;
    if (s == 1) {
      rate = ba_1d_at_distortion(xs, uniform, eps).rate_bits;
    } else {
      // Product coding of [0,1]^2 under the max metric: eps/2 per
      // coordinate keeps the expected max below eps.
      rate = 2.0 * ba_1d_at_distortion(xs, uniform, eps / 2.0).rate_bits;
    }
    points.emplace_back(eps, rate);
  }
  report.estimate = fit_rd_points(std::move(points));
  // I >= s log(1/eps) - K(s+1): the fitted K, reported not asserted.
  double k_sum = 0.0;
  for (const auto& [eps, rate] : report.estimate.points)
    k_sum += (s * std::log2(1.0 / eps) - rate) / (s + 1);
  report.fitted_k = k_sum / static_cast<double>(report.estimate.points.size());
  report.pass = report.estimate.slope >= s - 0.1;
  return report;
}

namespace {

std::vector<std::vector<double>> rows_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NumericError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Pmf pmf_from_csv(const std::string& path) {
  std::vector<double> flat;
  for (const auto& row : rows_from_csv(path))
    flat.insert(flat.end(), row.begin(), row.end());
  return Pmf::validated(std::move(flat));
}

JointPmf joint_from_csv(const std::string& path) {
  return JointPmf::validated(rows_from_csv(path));
}

DistortionMatrix distortion_from_csv(const std::string& path) {
  return DistortionMatrix::validated(rows_from_csv(path));
}

void write_rd_estimate_csv(const RDEstimate& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NumericError("cannot open " + path);
  out << "distortion,rate_bits\n";
  out.precision(17);
  for (const auto& [eps, rate] : est.points) out << eps << ',' << rate << '\n';
}

nlohmann::json rd_estimate_fit_json(const RDEstimate& est) {
  nlohmann::json j;
  j["slope"] = est.slope;
  j["intercept"] = est.intercept;
  j["fit_residual"] = est.fit_residual;
  j["points"] = nlohmann::json::array();
  for (const auto& [eps, rate] : est.points)
    j["points"].push_back({{"distortion", eps}, {"rate_bits", rate}});
  return j;
}

}  // namespace brodylab
