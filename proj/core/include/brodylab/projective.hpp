#pragma once

#include <cstdint>
#include <vector>

#include "brodylab/common.hpp"

namespace brodylab {

/// A point of CP^N in homogeneous coordinates. On construction the vector
/// is normalized to unit Euclidean norm with the largest-modulus coordinate
/// rotated to be real and positive, so proportional inputs store identical
/// representatives.
class ProjectivePoint {
 public:
  explicit ProjectivePoint(std::vector<cplx> coords);

  const std::vector<cplx>& coords() const { return coords_; }
  int dim() const { return static_cast<int>(coords_.size()) - 1; }

 private:
  std::vector<cplx> coords_;
};

/// Geodesic Fubini-Study distance in the unit-area normalization:
/// (1/sqrt(pi)) * arccos(|<p,q>| / (|p||q|)). Range [0, sqrt(pi)/2].
double fs_distance(const ProjectivePoint& p, const ProjectivePoint& q);

/// An epsilon-spanning set of CP^N built by greedy farthest-point insertion
/// over a stratified random sample. Deterministic for a fixed seed.
std::vector<ProjectivePoint> fs_spanning_set(int N, double eps,
                                             std::uint64_t seed = 7);

}  // namespace brodylab
