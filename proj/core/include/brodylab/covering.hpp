#pragma once

#include <string>
#include <vector>

#include "brodylab/common.hpp"

namespace brodylab {

using DistanceMatrix = std::vector<std::vector<double>>;

/// Minimum number of sets of diameter < eps covering the finite point set.
/// Exact (bitmask DP over diameter-feasible subsets) for <= 12 points;
/// deterministic greedy upper bound otherwise.
int covering_number(const DistanceMatrix& dist, double eps);

/// Weighted cover cost inf sum_i (1/eps)^{sup_{U_i} phi} over covers by
/// sets of diameter < eps. Exact for <= 10 points, greedy otherwise.
double covering_number_with_potential(const DistanceMatrix& dist,
                                      const std::vector<double>& phi,
                                      double eps);

struct TameGrowthRow {
  double eps = 0.0;
  double log2_count = 0.0;
  double profile = 0.0;  // eps^delta * log2_count
};

struct TameGrowthProfile {
  double delta = 0.5;
  std::vector<TameGrowthRow> rows;
  bool consistent = false;  // nonincreasing over the last three rungs
};

TameGrowthProfile tame_growth_profile(const DistanceMatrix& dist,
                                      const std::vector<double>& eps_ladder,
                                      double delta = 0.5);

/// CSV export with header `epsilon,log_count,profile`.
void write_profile_csv(const TameGrowthProfile& profile,
                       const std::string& path);

}  // namespace brodylab
