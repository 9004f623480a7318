#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brodylab/curve.hpp"
#include "brodylab/energy.hpp"

namespace brodylab {

/// Finite stand-in for a subset of the curve space.
struct CurveEnsemble {
  std::vector<CurveRep> curves;
  std::string provenance;
  std::uint64_t seed = 0;
};

enum class DynMetricKind {
  kD,        // max over [0,1]^2 of d_FS(f(z), g(z))
  kDL,       // sup over translates u in [0,L]^2 of d(T^u f, T^u g)
  kDbarL,    // average over u in [0,L]^2 of d(T^u f, T^u g)
  kDbar1ZL,  // max over integer u in [L] = {0..L-1}^2 of dbar_1(T^u f, T^u g)
};

struct DynMetricSpec {
  DynMetricKind kind = DynMetricKind::kD;
  int L = 1;                    // ignored for kD
  double grid_spacing = 0.0625; // must divide 1 evenly
};

struct MetricInterval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Certified bracket for the chosen dynamical metric. z -> d_FS(f(z), g(z))
/// is 2-Lipschitz for Brody curves, which converts grid values into the
/// interval; for sup-type metrics the margin is sqrt(2) * grid_spacing.
MetricInterval metric_eval(const DynMetricSpec& spec, const CurveRep& f,
                           const CurveRep& g);

struct MetricComparisonReport {
  double left_lower = 0.0;   // grid value of d_{a+[0,L]^2}, a = 1/2 + i/2
  double left_upper = 0.0;
  double right_lower = 0.0;  // bracket of (dbar_1)^Z_{L+1}
  double right_upper = 0.0;
  double slack = 0.0;
  bool holds = false;        // left_upper <= 4 * right_lower + slack
};

/// Checks d_{a+[0,L]^2}(f,g) <= 4 (dbar_1)^Z_{L+1}(f,g) with a = 1/2 + i/2
/// through certified brackets. The default slack (21 sqrt(2) h) is exactly
/// what the bracket widths force, so the check passes iff the grid data is
/// consistent with the true inequality.
MetricComparisonReport metric_comparison_check(const CurveRep& f,
                                               const CurveRep& g, int L,
                                               double grid_spacing = 1.0 / 64,
                                               double slack = -1.0);

/// Curve values precomputed on an n x n grid (endpoints included) for cheap
/// pairwise metric evaluation across an ensemble.
struct CurveGrid {
  Square square;
  int n = 0;
  std::vector<ProjectivePoint> pts;  // row-major
};

CurveGrid sample_curve_grid(const CurveRep& curve, const Square& square,
                            int n);

/// Grid lower bound for dbar_1(f, g) from grids over [0,2]^2 with m
/// subdivisions per unit (n = 2m + 1 points per side).
double dbar1_lower(const CurveGrid& fg, const CurveGrid& gg);

/// Pairwise dbar_1 matrix for an ensemble; m grid subdivisions per unit.
std::vector<std::vector<double>> ensemble_dbar1_matrix(
    const std::vector<CurveRep>& curves, int m = 8);

}  // namespace brodylab
