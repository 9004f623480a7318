#include "brodylab/curve_space.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "brodylab/parallel.hpp"

namespace brodylab {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct Field {
  int n = 0;       // points per side (endpoints included)
  double h = 0.0;  // spacing
  std::vector<double> v;  // row-major n x n

  double at(int i, int j) const { return v[static_cast<std::size_t>(j) * n + i]; }
};

// d_FS(f(z), g(z)) sampled on square.corner + [0, side]^2 at spacing h.
Field distance_field(const CurveRep& f, const CurveRep& g, cplx corner,
                     double side, double h) {
  Field field;
  field.h = h;
  field.n = static_cast<int>(std::lround(side / h)) + 1;
  field.v.resize(static_cast<std::size_t>(field.n) * field.n);
  const int n = field.n;
  parallel_for(n, [&](std::size_t j) {
    for (int i = 0; i < n; ++i) {
      const cplx z = corner + cplx(i * h, static_cast<double>(j) * h);
      field.v[j * n + i] = fs_distance(evaluate(f, z), evaluate(g, z));
    }
  });
  return field;
}

// Sliding max over windows of `w` consecutive entries, per row then per
// column; out[j][i] = max over the w x w block starting at (i, j).
std::vector<double> window_max(const Field& field, int w) {
  const int n = field.n;
  const int m = n - w + 1;  // windows per side
  std::vector<double> rows(static_cast<std::size_t>(n) * m);
  for (int j = 0; j < n; ++j) {
    std::deque<int> dq;
    for (int i = 0; i < n; ++i) {
      while (!dq.empty() && field.at(dq.back(), j) <= field.at(i, j))
        dq.pop_back();
      dq.push_back(i);
      if (dq.front() <= i - w) dq.pop_front();
      if (i >= w - 1) rows[static_cast<std::size_t>(j) * m + (i - w + 1)] =
          field.at(dq.front(), j);
    }
  }
  std::vector<double> out(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) {
    std::deque<int> dq;
    for (int j = 0; j < n; ++j) {
      const double val = rows[static_cast<std::size_t>(j) * m + i];
      while (!dq.empty() && rows[static_cast<std::size_t>(dq.back()) * m + i] <= val)
        dq.pop_back();
      dq.push_back(j);
      if (dq.front() <= j - w) dq.pop_front();
      if (j >= w - 1) out[static_cast<std::size_t>(j - w + 1) * m + i] = val;
    }
  }
  return out;
}

int checked_per_unit(double h) {
  const double m = 1.0 / h;
  if (std::abs(m - std::lround(m)) > 1e-9 || m < 2)
    throw InvalidParameter("grid_spacing must evenly divide 1");
  return static_cast<int>(std::lround(m));
}

}  // namespace

MetricInterval metric_eval(const DynMetricSpec& spec, const CurveRep& f,
                           const CurveRep& g) {
  if (f.dim() != g.dim()) throw InvalidPoint("metric_eval: dimension mismatch");
  const double h = spec.grid_spacing;
  const int m = checked_per_unit(h);
  const double margin = kSqrt2 * h;
  const int L = std::max(1, spec.L);

  switch (spec.kind) {
    case DynMetricKind::kD: {
      Field field = distance_field(f, g, cplx(0.0, 0.0), 1.0, h);
      const double mx = *std::max_element(field.v.begin(), field.v.end());
      return {mx, mx + margin};
    }
    case DynMetricKind::kDL: {
      Field field = distance_field(f, g, cplx(0.0, 0.0), L + 1.0, h);
      const double mx = *std::max_element(field.v.begin(), field.v.end());
      return {mx, mx + margin};
    }
    case DynMetricKind::kDbarL: {
      Field field = distance_field(f, g, cplx(0.0, 0.0), L + 1.0, h);
      std::vector<double> wm = window_max(field, m + 1);
      const int per_side = L * m;  // translate grid over [0,L)^2
      const int stride = field.n - m;
      double sum = 0.0;
      for (int j = 0; j < per_side; ++j)
        for (int i = 0; i < per_side; ++i)
          sum += wm[static_cast<std::size_t>(j) * stride + i];
      const double avg = sum / (static_cast<double>(per_side) * per_side);
      return {std::max(0.0, avg - 2.0 * margin), avg + 3.0 * margin};
    }
    case DynMetricKind::kDbar1ZL: {
      // L here follows the paper's [L] = {0,...,L-1}^2 translate set.
      Field field = distance_field(f, g, cplx(0.0, 0.0), L + 1.0, h);
      std::vector<double> wm = window_max(field, m + 1);
      const int stride = field.n - m;
      double best = 0.0;
      for (int uj = 0; uj < L; ++uj)
        for (int ui = 0; ui < L; ++ui) {
          double sum = 0.0;
          for (int vj = 0; vj < m; ++vj)
            for (int vi = 0; vi < m; ++vi)
              sum += wm[static_cast<std::size_t>(uj * m + vj) * stride +
                        (ui * m + vi)];
          best = std::max(best, sum / (static_cast<double>(m) * m));
        }
      return {std::max(0.0, best - 2.0 * margin), best + 3.0 * margin};
    }
  }
  throw InvalidParameter("unknown metric kind");
}

MetricComparisonReport metric_comparison_check(const CurveRep& f,
                                               const CurveRep& g, int L,
                                               double grid_spacing,
                                               double slack) {
  if (L < 1) throw InvalidParameter("metric_comparison_check: L must be >= 1");
  const double h = grid_spacing;
  checked_per_unit(h);
  const double margin = kSqrt2 * h;
  if (slack < 0.0) slack = 21.0 * margin;

  MetricComparisonReport report;
  report.slack = slack;

  // Left side: d_{a+[0,L]^2} with a = 1/2 + i/2 is the plain sup of d_FS
  // over a + [0, L+1]^2.
  Field field = distance_field(f, g, cplx(0.5, 0.5), L + 1.0, h);
  report.left_lower = *std::max_element(field.v.begin(), field.v.end());
  report.left_upper = report.left_lower + margin;

  // Right side: (dbar_1)^Z_{L+1}, i.e. translates u in {0,...,L}^2.
  DynMetricSpec right_spec{DynMetricKind::kDbar1ZL, L + 1, grid_spacing};
  const MetricInterval right = metric_eval(right_spec, f, g);
  report.right_lower = right.lower;
  report.right_upper = right.upper;

  report.holds = report.left_upper <= 4.0 * report.right_lower + slack;
  return report;
}

CurveGrid sample_curve_grid(const CurveRep& curve, const Square& square,
                            int n) {
  if (n < 2) throw InvalidParameter("sample_curve_grid: n must be >= 2");
  CurveGrid grid{square, n, {}};
  grid.pts.reserve(static_cast<std::size_t>(n) * n);
  const double h = square.side / (n - 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      grid.pts.push_back(evaluate(curve, square.corner + cplx(i * h, j * h)));
  return grid;
}

double dbar1_lower(const CurveGrid& fg, const CurveGrid& gg) {
  if (fg.n != gg.n || fg.n < 3 || fg.n % 2 == 0)
    throw InvalidParameter("dbar1_lower: grids must match, n odd >= 3");
  const int n = fg.n;
  const int m = (n - 1) / 2;  // subdivisions per unit over [0,2]^2

  Field field;
  field.n = n;
  field.h = fg.square.side / (n - 1);
  field.v.resize(static_cast<std::size_t>(n) * n);
  for (std::size_t k = 0; k < field.v.size(); ++k)
    field.v[k] = fs_distance(fg.pts[k], gg.pts[k]);

  std::vector<double> wm = window_max(field, m + 1);
  const int stride = n - m;
  double sum = 0.0;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      sum += wm[static_cast<std::size_t>(j) * stride + i];
  return sum / (static_cast<double>(m) * m);
}

std::vector<std::vector<double>> ensemble_dbar1_matrix(
    const std::vector<CurveRep>& curves, int m) {
  const std::size_t n = curves.size();
  std::vector<CurveGrid> grids(n, CurveGrid{});
  parallel_for(n, [&](std::size_t i) {
    grids[i] =
        sample_curve_grid(curves[i], {cplx(0.0, 0.0), 2.0}, 2 * m + 1);
  });

  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double d = dbar1_lower(grids[i], grids[j]);
    dist[i][j] = d;
    dist[j][i] = d;
  });
  return dist;
}

}  // namespace brodylab
