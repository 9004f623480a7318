#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "brodylab/curve.hpp"
#include "brodylab/energy.hpp"

#include <json.hpp>

namespace brodylab {

/// Parameters of the lattice-sum random family: coefficients u_lambda
/// uniform on the disk |u - a_center| <= 1, offset w uniform on [0,L]^2.
struct FamilyParams {
  double L = 100.0;
  double a_center = 2.0;
  int cells = 3;  // window half-width in cells
  int N = 1;
  std::uint64_t seed = 0;
};

class MeasureSampler;

struct LatticeFamily {
  FamilyParams params;
};

struct PeriodicOrbit {
  CurveRep curve;  // numerically Lambda-periodic
  double L;
};

struct TranslatedAverage {
  std::shared_ptr<const MeasureSampler> base;
  double Ln;
};

struct RescaledFamily {
  std::shared_ptr<const MeasureSampler> base;
  double lambda;
};

class MeasureSampler {
 public:
  using Node =
      std::variant<LatticeFamily, PeriodicOrbit, TranslatedAverage,
                   RescaledFamily>;
  explicit MeasureSampler(Node node) : node_(std::move(node)) {}
  const Node& node() const { return node_; }

 private:
  Node node_;
};

MeasureSampler lattice_family(FamilyParams params);
MeasureSampler periodic_orbit(CurveRep curve, double L);
MeasureSampler translated_average(MeasureSampler base, double Ln);
MeasureSampler rescaled_family(MeasureSampler base, double lambda);

/// Deterministic draw number `index` for the given seed.
CurveRep sample_curve(const MeasureSampler& sampler, std::uint64_t seed,
                      std::uint64_t index);

struct ExpectationResult {
  double mean = 0.0;
  double ci_half_width = 0.0;  // 95% normal approximation
  std::size_t n = 0;
};

ExpectationResult expectation(
    const MeasureSampler& sampler, std::uint64_t seed,
    const std::function<double(const CurveRep&)>& observable, std::size_t n);

/// E[psi] with the offset w integrated out exactly: conditionally on the
/// coefficients, E_w psi = (2(N+1)/L^2) * (energy of one cell), which the
/// quadrature computes per sample. Unbiased with far smaller variance than
/// the pointwise psi. Lattice families only (possibly rescaled).
ExpectationResult psi_expectation_conditional(const MeasureSampler& sampler,
                                              std::uint64_t seed,
                                              std::size_t n);

struct InvarianceReport {
  ExpectationResult base;
  ExpectationResult shifted;
  bool pass = false;  // CIs overlap
};

InvarianceReport invariance_test(
    const MeasureSampler& sampler, std::uint64_t seed,
    const std::function<double(const CurveRep&)>& observable, cplx shift,
    std::size_t n);

/// lambda = sqrt(c / (2(N+1) rho_hat(g))) targeting energy density c for
/// the rescaled curve; rho_hat estimated by energy_density at scale L.
double design_rescaling(const CurveRep& g, double c, double L);

struct ErgodicAverageRow {
  double R = 0.0;
  double normalized_mean = 0.0;  // mean of (4(N+1)/(pi R^2)) T(R, f)
  double gap = 0.0;              // vs the E[psi] reference
  double rel_gap = 0.0;
};

struct ErgodicAverageReport {
  double e_psi = 0.0;  // conditional-estimator reference
  std::vector<ErgodicAverageRow> rows;
  bool gaps_shrink = false;
  double final_rel_gap = 0.0;
};

/// Mean over samples of the normalized NSA characteristic against E[psi].
/// The offset w is drawn from stratum midpoints of a k x k grid (n = k^2),
/// a quasi-random choice that removes the dominant pole-position noise;
/// the coefficients stay random.
ErgodicAverageReport ergodic_average_check(const MeasureSampler& sampler,
                                           std::uint64_t seed,
                                           const std::vector<double>& R_ladder,
                                           std::size_t n);

struct DynamicalRDReport {
  std::vector<std::pair<double, double>> points;  // (eps, rate per unit area)
  double slope_per_area = 0.0;  // rdim proxy: fitted per-cell slope / L^2
  std::string assumptions;      // the modeling shortcut, stamped
};

/// R(eps, A)/m(A) proxy for samplers with explicit parameter structure:
/// the lattice family contributes one disk coefficient per cell of area
/// L^2 (the 2-D offset w adds nothing per unit area in the large-window
/// limit); a periodic orbit is deterministic up to w, hence rate 0.
DynamicalRDReport dynamical_rd_estimate(const MeasureSampler& sampler,
                                        const std::vector<double>& eps_ladder,
                                        int grid_bits = 12);

nlohmann::json sampler_to_json(const MeasureSampler& sampler);
nlohmann::json expectation_report_json(const std::string& observable,
                                       const ExpectationResult& result,
                                       std::uint64_t seed);

}  // namespace brodylab
