#include "brodylab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "brodylab/information.hpp"
#include "brodylab/parallel.hpp"
#include "brodylab/rng.hpp"

namespace brodylab {

namespace {

constexpr std::uint64_t kSaltOffset = 0x0FF5E7;
constexpr std::uint64_t kSaltCoeff = 0xC0EFF;
constexpr std::uint64_t kSaltOrbit = 0x0B17;
constexpr std::uint64_t kSaltTranslate = 0x7A51;

std::uint64_t pack_mn(int m, int n) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(m)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(n));
}

void check_family(const FamilyParams& p) {
  if (p.L <= 0.0) throw InvalidParameter("FamilyParams: L must be > 0");
  if (p.a_center <= 0.0)
    throw InvalidParameter("FamilyParams: a_center must be > 0");
  if (p.cells < 3) throw InvalidParameter("FamilyParams: cells must be >= 3");
  if (p.N != 1)
    throw UnsupportedMeasure("lattice family is defined for N = 1");
}

// Lattice-sum draw with an explicit offset; coefficient streams depend only
// on (seed, index, lattice coordinate), never on w.
CurveRep lattice_draw(const FamilyParams& p, std::uint64_t seed,
                      std::uint64_t index, cplx w) {
  LatticeSumNode node;
  node.L = p.L;
  node.window_radius = p.cells * p.L;
  node.offset_w = w;
  node.coeffs.reserve(static_cast<std::size_t>(2 * p.cells + 1) *
                      (2 * p.cells + 1));
  for (int m = -p.cells; m <= p.cells; ++m)
    for (int n = -p.cells; n <= p.cells; ++n) {
      Rng rng(stream_key(seed, index, kSaltCoeff, pack_mn(m, n)));
      node.coeffs.push_back({m, n, p.a_center + rng.unit_disk()});
    }
  return make_lattice_sum(std::move(node));
}

}  // namespace

MeasureSampler lattice_family(FamilyParams params) {
  check_family(params);
  return MeasureSampler(LatticeFamily{params});
}

MeasureSampler periodic_orbit(CurveRep curve, double L) {
  if (L <= 0.0) throw InvalidParameter("periodic_orbit: L must be > 0");
  // The orbit measure only makes sense for Lambda-periodic curves.
  Rng probe(stream_key(0x9E81, 0));
  for (int k = 0; k < 8; ++k) {
    const cplx z(probe.uniform(0.0, L), probe.uniform(0.0, L));
    const cplx period = (k % 2 == 0) ? cplx(L, 0.0) : cplx(0.0, L);
    if (fs_distance(evaluate(curve, z), evaluate(curve, z + period)) > 1e-9)
      throw InvalidParameter("periodic_orbit: curve is not Lambda-periodic");
  }
  return MeasureSampler(PeriodicOrbit{std::move(curve), L});
}

MeasureSampler translated_average(MeasureSampler base, double Ln) {
  if (Ln <= 0.0) throw InvalidParameter("translated_average: Ln must be > 0");
  return MeasureSampler(TranslatedAverage{
      std::make_shared<const MeasureSampler>(std::move(base)), Ln});
}

MeasureSampler rescaled_family(MeasureSampler base, double lambda) {
  if (lambda <= 0.0)
    throw InvalidParameter("rescaled_family: lambda must be > 0");
  return MeasureSampler(RescaledFamily{
      std::make_shared<const MeasureSampler>(std::move(base)), lambda});
}

CurveRep sample_curve(const MeasureSampler& sampler, std::uint64_t seed,
                      std::uint64_t index) {
  return std::visit(
      [&](const auto& node) -> CurveRep {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, LatticeFamily>) {
          Rng rng(stream_key(seed, index, kSaltOffset));
          const cplx w(rng.uniform(0.0, node.params.L),
                       rng.uniform(0.0, node.params.L));
          return lattice_draw(node.params, seed, index, w);
        } else if constexpr (std::is_same_v<T, PeriodicOrbit>) {
          Rng rng(stream_key(seed, index, kSaltOrbit));
          return translate(node.curve, cplx(rng.uniform(0.0, node.L),
                                            rng.uniform(0.0, node.L)));
        } else if constexpr (std::is_same_v<T, TranslatedAverage>) {
          CurveRep inner = sample_curve(*node.base, seed, index);
          Rng rng(stream_key(seed, index, kSaltTranslate));
          return translate(inner, cplx(rng.uniform(0.0, node.Ln),
                                       rng.uniform(0.0, node.Ln)));
        } else {
          return rescale(sample_curve(*node.base, seed, index), node.lambda);
        }
      },
      sampler.node());
}

namespace {

ExpectationResult summarize(const std::vector<double>& values) {
  ExpectationResult result;
  result.n = values.size();
  result.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - result.mean;
      sq[i] = d * d;
    }
    const double var =
        pairwise_sum(sq) / static_cast<double>(values.size() - 1);
    result.ci_half_width =
        1.959963984540054 * std::sqrt(var / static_cast<double>(values.size()));
  }
  return result;
}

}  // namespace

ExpectationResult expectation(
    const MeasureSampler& sampler, std::uint64_t seed,
    const std::function<double(const CurveRep&)>& observable, std::size_t n) {
  if (n < 2) throw InvalidParameter("expectation: n must be >= 2");
  std::vector<double> values(n, 0.0);
  std::mutex err_mutex;
  std::string error;
  parallel_for(n, [&](std::size_t i) {
    try {
      const double v = observable(sample_curve(sampler, seed, i));
      if (!std::isfinite(v))
        throw NumericError("non-finite observable value");
      values[i] = v;
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (error.empty())
        error = "sample " + std::to_string(i) + ": " + e.what();
    }
  });
  if (!error.empty()) throw NumericError("expectation: " + error);
  return summarize(values);
}

namespace {

// Unwraps (possibly rescaled) lattice families; total lambda multiplies.
struct UnwrappedFamily {
  FamilyParams params;
  double lambda = 1.0;
};

UnwrappedFamily unwrap_lattice(const MeasureSampler& sampler) {
  if (const auto* fam = std::get_if<LatticeFamily>(&sampler.node()))
    return {fam->params, 1.0};
  if (const auto* scaled = std::get_if<RescaledFamily>(&sampler.node())) {
    UnwrappedFamily inner = unwrap_lattice(*scaled->base);
    inner.lambda *= scaled->lambda;
    return inner;
  }
  throw UnsupportedMeasure(
      "operation needs a (possibly rescaled) lattice family");
}

}  // namespace

ExpectationResult psi_expectation_conditional(const MeasureSampler& sampler,
                                              std::uint64_t seed,
                                              std::size_t n) {
  if (n < 2) throw InvalidParameter("n must be >= 2");
  const UnwrappedFamily fam = unwrap_lattice(sampler);
  const double L = fam.params.L;
  const int base_res = std::max(
      32, std::min(128, static_cast<int>(std::lround(2.0 * L / 3.0))));
  const double scale = fam.lambda * fam.lambda * 2.0 * (fam.params.N + 1) /
                       (L * L);

  std::vector<double> values(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const CurveRep curve = lattice_draw(fam.params, seed, i, cplx(0.0, 0.0));
    values[i] = scale * cell_energy_adaptive(curve, {cplx(0.0, 0.0), L},
                                             base_res, 8, 0.005);
  });
  ExpectationResult result = summarize(values);

  // The per-sample values carry a common quadrature bias that the
  // statistical CI knows nothing about. Measure it on a subsample against
  // a 4x-finer reference grid, recenter the mean by the signed difference,
  // and widen the half-width by 1.5x its size to cover what the reference
  // grid itself still misses.
  const std::size_t probe = std::min<std::size_t>(n, 8);
  std::vector<double> diffs(probe, 0.0);
  parallel_for(probe, [&](std::size_t i) {
    const CurveRep curve = lattice_draw(fam.params, seed, i, cplx(0.0, 0.0));
    const double refined = scale * cell_energy_adaptive(
                               curve, {cplx(0.0, 0.0), L}, 4 * base_res, 16,
                               0.001);
    diffs[i] = refined - values[i];
  });
  const double bias = pairwise_sum(diffs) / static_cast<double>(probe);
  result.mean += bias;
  result.ci_half_width += 1.5 * std::abs(bias);
  return result;
}

InvarianceReport invariance_test(
    const MeasureSampler& sampler, std::uint64_t seed,
    const std::function<double(const CurveRep&)>& observable, cplx shift,
    std::size_t n) {
  if (n < 100) throw InvalidParameter("invariance_test: n must be >= 100");
  InvarianceReport report;
  report.base = expectation(sampler, seed, observable, n);
  report.shifted = expectation(
      sampler, seed,
      [&](const CurveRep& f) { return observable(translate(f, shift)); }, n);
  report.pass = std::abs(report.base.mean - report.shifted.mean) <=
                report.base.ci_half_width + report.shifted.ci_half_width +
                    1e-15;
  return report;
}

double design_rescaling(const CurveRep& g, double c, double L) {
  const double rho = energy_density(g, L);
  const double bound = 2.0 * (g.dim() + 1) * rho;
  if (!(c > 0.0) || c > bound * (1.0 + 1e-9))
    throw TargetUnreachable("design_rescaling: need 0 < c <= 2(N+1) rho(g)");
  return std::min(1.0, std::sqrt(c / bound));
}

ErgodicAverageReport ergodic_average_check(const MeasureSampler& sampler,
                                           std::uint64_t seed,
                                           const std::vector<double>& R_ladder,
                                           std::size_t n) {
  if (R_ladder.size() < 2 || R_ladder.front() < 4.0)
    throw InvalidParameter("ergodic_average_check: ladder must start at R >= 4");
  for (std::size_t k = 1; k < R_ladder.size(); ++k)
    if (R_ladder[k] <= R_ladder[k - 1])
      throw InvalidParameter("ergodic_average_check: ladder must increase");

  ErgodicAverageReport report;
  const double Rmax = R_ladder.back();
  const int resolution = static_cast<int>(std::lround(2.0 * Rmax));

  const bool lattice =
      std::holds_alternative<LatticeFamily>(sampler.node());
  std::size_t n_used = n;
  std::size_t strata = 0;
  if (lattice) {
    strata = static_cast<std::size_t>(std::floor(std::sqrt(
        static_cast<double>(n))));
    n_used = strata * strata;
  }

  int dim = 1;
  std::vector<std::vector<double>> normalized(R_ladder.size(),
                                              std::vector<double>(n_used));
  {
    // Probe the dimension once (all draws share it).
    dim = sample_curve(sampler, seed, 0).dim();
  }
  parallel_for(n_used, [&](std::size_t i) {
    CurveRep curve = [&] {
      if (lattice) {
        const auto& fam = std::get<LatticeFamily>(sampler.node());
        const double L = fam.params.L;
        const std::size_t a = i % strata, b = i / strata;
        const cplx w((a + 0.5) * L / strata, (b + 0.5) * L / strata);
        return lattice_draw(fam.params, seed, i, w);
      }
      return sample_curve(sampler, seed, i);
    }();
    const std::vector<double> Ts =
        nsa_characteristic_ladder(curve, R_ladder, resolution);
    for (std::size_t k = 0; k < R_ladder.size(); ++k)
      normalized[k][i] =
          4.0 * (dim + 1) / (kPi * R_ladder[k] * R_ladder[k]) * Ts[k];
  });

  // Reference E[psi].
  if (lattice) {
    report.e_psi =
        psi_expectation_conditional(sampler, seed, std::min<std::size_t>(
                                                       n_used, 256))
            .mean;
  } else {
    report.e_psi = expectation(sampler, seed,
                               [](const CurveRep& f) { return psi(f); },
                               std::max<std::size_t>(n_used, 2))
                       .mean;
  }

  report.gaps_shrink = true;
  for (std::size_t k = 0; k < R_ladder.size(); ++k) {
    ErgodicAverageRow row;
    row.R = R_ladder[k];
    row.normalized_mean =
        pairwise_sum(normalized[k]) / static_cast<double>(n_used);
    row.gap = std::abs(row.normalized_mean - report.e_psi);
    row.rel_gap = report.e_psi != 0.0 ? row.gap / report.e_psi
                                      : (row.normalized_mean != 0.0 ? 1.0 : 0.0);
    if (k > 0 && row.gap > report.rows.back().gap + 1e-15)
      report.gaps_shrink = false;
    report.rows.push_back(row);
  }
  report.final_rel_gap = report.rows.back().rel_gap;
  return report;
}

DynamicalRDReport dynamical_rd_estimate(const MeasureSampler& sampler,
                                        const std::vector<double>& eps_ladder,
                                        int grid_bits) {
  DynamicalRDReport report;
  if (std::holds_alternative<PeriodicOrbit>(sampler.node())) {
    // Deterministic up to the 2-D offset, which contributes no rate per
    // unit area in the large-window limit.
    for (double eps : eps_ladder) report.points.emplace_back(eps, 0.0);
    report.assumptions = "delta orbit: zero-rate parameter process";
    return report;
  }
  const UnwrappedFamily fam = unwrap_lattice(sampler);
  const double area = fam.params.L * fam.params.L / (fam.lambda * fam.lambda);
  const RDEstimate per_cell = disk_coefficient_rd_curve(eps_ladder, grid_bits);
  for (const auto& [eps, rate] : per_cell.points)
    report.points.emplace_back(eps, rate / area);
  report.slope_per_area = per_cell.slope / area;
  report.assumptions =
      "parameter-process proxy: one i.i.d. disk coefficient per lattice "
      "cell, product coding per coordinate; offset w contributes 0";
  return report;
}

nlohmann::json sampler_to_json(const MeasureSampler& sampler) {
  return std::visit(
      [&](const auto& node) -> nlohmann::json {
        using T = std::decay_t<decltype(node)>;
        nlohmann::json j;
        if constexpr (std::is_same_v<T, LatticeFamily>) {
          j["kind"] = "lattice_family";
          j["L"] = node.params.L;
          j["a_center"] = node.params.a_center;
          j["cells"] = node.params.cells;
          j["N"] = node.params.N;
        } else if constexpr (std::is_same_v<T, PeriodicOrbit>) {
          j["kind"] = "periodic_orbit";
          j["L"] = node.L;
          j["curve"] = curve_to_json(node.curve);
        } else if constexpr (std::is_same_v<T, TranslatedAverage>) {
          j["kind"] = "translated_average";
          j["Ln"] = node.Ln;
          j["base"] = sampler_to_json(*node.base);
        } else {
          j["kind"] = "rescaled_family";
          j["lambda"] = node.lambda;
          j["base"] = sampler_to_json(*node.base);
        }
        return j;
      },
      sampler.node());
}

nlohmann::json expectation_report_json(const std::string& observable,
                                       const ExpectationResult& result,
                                       std::uint64_t seed) {
  nlohmann::json j;
  j["observable"] = observable;
  j["n"] = result.n;
  j["mean"] = result.mean;
  j["ci"] = result.ci_half_width;
  j["seed"] = seed;
  return j;
}

}  // namespace brodylab
