#pragma once

#include <string>
#include <vector>

#include "brodylab/common.hpp"

#include <json.hpp>

namespace brodylab {

/// Finite probability vector; validated to be nonnegative and sum to 1.
struct Pmf {
  std::vector<double> p;

  static Pmf validated(std::vector<double> probs);
  std::size_t size() const { return p.size(); }
};

struct JointPmf {
  std::vector<std::vector<double>> p;  // |X| x |Y|

  static JointPmf validated(std::vector<std::vector<double>> probs);
  std::size_t nx() const { return p.size(); }
  std::size_t ny() const { return p.empty() ? 0 : p[0].size(); }
  Pmf marginal_x() const;
  Pmf marginal_y() const;
};

struct DistortionMatrix {
  std::vector<std::vector<double>> d;  // |X| x |Yhat|

  static DistortionMatrix validated(std::vector<std::vector<double>> vals);
};

/// Shannon entropy in bits (0 log 0 = 0).
double entropy(const Pmf& p);

/// I(X;Y) = H(X) + H(Y) - H(X,Y), in bits; clamped at 0 from below.
double mutual_information(const JointPmf& j);

struct BAPoint {
  double distortion = 0.0;
  double rate_bits = 0.0;
  double slope = 0.0;  // the Lagrange parameter that produced the point
  bool converged = false;
  int iterations = 0;
};

/// One point of the rate-distortion curve by alternating minimization of
/// the Lagrangian R + slope * D (slope in nats per distortion unit).
BAPoint blahut_arimoto(const Pmf& source, const DistortionMatrix& d,
                       double slope, int max_iterations = 10000,
                       double tolerance = 1e-10);

/// Rate at a distortion budget, by bisection on the slope.
BAPoint ba_at_distortion(const Pmf& source, const DistortionMatrix& d,
                         double distortion_target);

/// Exhaustive oracle: min mutual information over a refined grid of test
/// channels meeting the budget. Alphabets |X| * |Yhat| <= 9 only.
double rd_brute_force(const Pmf& source, const DistortionMatrix& d,
                      double distortion_target, int grid_resolution = 20);

struct RDEstimate {
  std::vector<std::pair<double, double>> points;  // (epsilon or D, rate bits)
  double slope = 0.0;      // of rate against log2(1/eps)
  double intercept = 0.0;  // the fitted finite constant (reported, not asserted)
  double fit_residual = 0.0;
};

/// Least-squares fit of rate against log2(1/eps) over (eps, rate) points.
RDEstimate fit_rd_points(std::vector<std::pair<double, double>> points);

RDEstimate rd_curve(const Pmf& source, const DistortionMatrix& d,
                    const std::vector<double>& eps_ladder);
double rdim_slope(const RDEstimate& est);

/// Matrix-free banded Blahut-Arimoto for a 1-D quantized source on `xs`
/// with absolute-error distortion and the reproduction alphabet equal to
/// the source grid. The kernel exp(-slope |x-y|) is truncated where it
/// drops below ~1e-6, past which the discarded mass no longer moves the
/// rate at the solver tolerance.
BAPoint ba_1d_quantized(const std::vector<double>& xs, const Pmf& source,
                        double slope, int max_iterations = 2000,
                        double tolerance = 1e-9);
BAPoint ba_1d_at_distortion(const std::vector<double>& xs, const Pmf& source,
                            double distortion_target);

/// Rate in bits to code one coefficient uniform on the unit disk within
/// expected Euclidean distortion eps, by product coding: each coordinate
/// (semicircle marginal) is coded within eps/2 in absolute error.
double disk_coefficient_rate(double eps, int grid_bits = 12);

/// R(eps) ladder for the disk coefficient; slope is the 2-D information
/// dimension proxy.
RDEstimate disk_coefficient_rd_curve(const std::vector<double>& eps_ladder,
                                     int grid_bits = 12);

struct KawabataDemboReport {
  int s = 1;
  RDEstimate estimate;
  double fitted_k = 0.0;  // from I >= s log(1/eps) - K(s+1)
  bool pass = false;      // slope >= s - 0.1
};

/// Uniform measure on [0,1]^s with the max metric; R(eps) by (product of)
/// 1-D quantized BA, slope fitted against log2(1/eps).
KawabataDemboReport kawabata_dembo_probe(int s,
                                         const std::vector<double>& eps_ladder,
                                         int grid_bits = 10);

Pmf pmf_from_csv(const std::string& path);
JointPmf joint_from_csv(const std::string& path);
DistortionMatrix distortion_from_csv(const std::string& path);
void write_rd_estimate_csv(const RDEstimate& est, const std::string& path);
nlohmann::json rd_estimate_fit_json(const RDEstimate& est);

}  // namespace brodylab
