#include "brodylab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "brodylab/covering.hpp"
#include "brodylab/curve.hpp"
#include "brodylab/curve_space.hpp"
#include "brodylab/energy.hpp"
#include "brodylab/information.hpp"
#include "brodylab/measures.hpp"
#include "brodylab/rng.hpp"

namespace brodylab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

bool ExperimentConfig::has(const std::string& key) const {
  return params.count(key) != 0;
}

double ExperimentConfig::get_real(const std::string& key,
                                  double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::size_t pos = 0;
  const double v = std::stod(it->second, &pos);
  if (trim(it->second.substr(pos)) != "")
    throw InvalidParameter("config: bad real for '" + key + "'");
  return v;
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::size_t pos = 0;
  const int v = std::stoi(it->second, &pos);
  if (trim(it->second.substr(pos)) != "")
    throw InvalidParameter("config: bad integer for '" + key + "'");
  return v;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::vector<double> ExperimentConfig::get_real_list(
    const std::string& key, const std::vector<double>& fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw InvalidParameter("config: empty list for '" + key + "'");
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidParameter("config line " + std::to_string(lineno) +
                             ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw InvalidParameter("config line " + std::to_string(lineno) +
                             ": empty key");
    if (key == "seed")
      cfg.seed = std::stoull(value);
    else
      cfg.params[key] = value;
  }
  return cfg;
}

bool ExperimentReport::all_pass() const {
  if (verdicts.empty()) return false;
  for (const auto& [name, verdict] : verdicts)
    if (verdict != "pass") return false;
  return true;
}

namespace {

void dump_impl(const nlohmann::json& j, std::string& out, int indent,
               int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad1(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad1 + nlohmann::json(it.key()).dump() + ": ";
        dump_impl(it.value(), out, indent, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad1;
        dump_impl(v, out, indent, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
      out += buf;
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump_impl(j, out, indent, 0);
  out += "\n";
  return out;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = report.name;
  j["anchor"] = report.anchor;
  j["seed"] = report.seed;
  j["config"] = report.config_echo;
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [name, m] : report.metrics)
    metrics[name] = {{"value", m.value}, {"uncertainty", m.uncertainty}};
  j["metrics"] = metrics;
  j["verdicts"] = report.verdicts;
  j["runtime_seconds"] = report.runtime_seconds;
  j["artifacts"] = report.artifacts;
  return j;
}

namespace {

using Runner = std::function<void(const ExperimentConfig&, ExperimentReport&)>;

FamilyParams family_from_config(const ExperimentConfig& cfg) {
  FamilyParams fam;
  fam.L = cfg.get_real("L", 100.0);
  fam.a_center = cfg.get_real("a_center", 2.0);
  fam.cells = cfg.get_int("cells", 3);
  return fam;
}

std::string artifact_path(const ExperimentConfig& cfg,
                          const std::string& file) {
  return (std::filesystem::path(cfg.output_dir) / file).string();
}

void verdict_from(ExperimentReport& rep, const std::string& name, bool ok) {
  rep.verdicts[name] = ok ? "pass" : "fail";
}

// ---- example-random-family ------------------------------------------------

void run_example_random_family(const ExperimentConfig& cfg,
                               ExperimentReport& rep) {
  const FamilyParams fam = family_from_config(cfg);
  const std::size_t n =
      static_cast<std::size_t>(cfg.get_int("n", 10000));
  const MeasureSampler sampler = lattice_family(fam);

  const ExpectationResult e =
      psi_expectation_conditional(sampler, cfg.seed, n);
  const double scale = fam.L * fam.L;
  rep.metrics["e_psi_scaled"] = {e.mean * scale, e.ci_half_width * scale};
  const double dev = std::abs(e.mean * scale - 12.0);
  verdict_from(rep, "e_psi_within_5pct", dev <= 0.6);
  verdict_from(rep, "e_psi_ci_contains_12", dev <= e.ci_half_width * scale);

  const std::vector<double> ladder = cfg.get_real_list(
      "eps_ladder", {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256});
  const RDEstimate est = disk_coefficient_rd_curve(ladder);
  rep.metrics["rdim_scaled"] = {est.slope, est.fit_residual};
  verdict_from(rep, "rdim_within_10pct", std::abs(est.slope - 2.0) <= 0.2);

  const std::string csv = artifact_path(cfg, "rd_curve.csv");
  write_rd_estimate_csv(est, csv);
  rep.artifacts.push_back(std::filesystem::path(csv).filename().string());
}

// ---- ruelle-check ---------------------------------------------------------

void run_ruelle_check(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const FamilyParams fam = family_from_config(cfg);
  const std::size_t n = static_cast<std::size_t>(cfg.get_int("n", 512));
  const MeasureSampler base = lattice_family(fam);

  const std::vector<double> ladder = cfg.get_real_list(
      "eps_ladder", {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256});
  const double per_cell_slope = disk_coefficient_rd_curve(ladder).slope;

  const ExpectationResult e_base =
      psi_expectation_conditional(base, cfg.seed, n);

  const std::vector<double> lambdas =
      cfg.get_real_list("lambdas", {1.0, 1.0 / std::sqrt(2.0), 0.5});
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double lam = lambdas[k];
    const std::string tag = "lambda" + std::to_string(k);
    // Independent estimate on the rescaled family (fresh seed stream)
    // against the analytic lambda^2 scaling of the base estimate.
    const MeasureSampler scaled = rescaled_family(base, lam);
    const ExpectationResult e_lam =
        psi_expectation_conditional(scaled, cfg.seed + 1 + k, n);
    // Rescaling stretches the lattice cell to side L/lambda; the per-cell
    // coefficient rate is unchanged, so the per-area proxy picks up lambda^2.
    const double proxy = lam * lam * per_cell_slope / (fam.L * fam.L);
    rep.metrics[tag + "_e_psi"] = {e_lam.mean, e_lam.ci_half_width};
    rep.metrics[tag + "_rdim_proxy"] = {proxy, 0.0};
    verdict_from(rep, tag + "_ruelle", proxy <= e_lam.mean);
    const double predicted = lam * lam * e_base.mean;
    verdict_from(rep, tag + "_scaling",
                 std::abs(e_lam.mean - predicted) <= 0.05 * predicted);
  }
  rep.metrics["margin_factor"] = {
      e_base.mean * fam.L * fam.L / per_cell_slope, 0.0};
}

// ---- brody-bound ----------------------------------------------------------

void run_brody_bound(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const std::string kind = cfg.get_string("curve", "family");
  const double margin = cfg.get_real("margin", 1e-6);
  if (kind == "constant") {
    std::vector<cplx> v(2, cplx(0.0, 0.0));
    v[0] = 1.0;
    const CurveRep c = make_constant(ProjectivePoint(v));
    const BrodyReport br = brody_verify(c, {cplx(-5.0, -5.0), 10.0}, 64, margin);
    rep.metrics["max_df"] = {br.grid_max, br.uncertainty};
    verdict_from(rep, "all_certified", br.verdict == "pass");
    return;
  }
  const FamilyParams fam = family_from_config(cfg);
  const MeasureSampler sampler = lattice_family(fam);
  const std::size_t n = static_cast<std::size_t>(cfg.get_int("n", 100));
  const int resolution = cfg.get_int("resolution", 512);
  const Square region{cplx(-fam.L, -fam.L), 2.0 * fam.L};

  std::size_t passed = 0;
  double max_df = 0.0, max_unc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const CurveRep f = sample_curve(sampler, cfg.seed, i);
    const BrodyReport br = brody_verify(f, region, resolution, margin);
    if (br.verdict == "pass") ++passed;
    if (br.grid_max > max_df) {
      max_df = br.grid_max;
      max_unc = br.uncertainty;
    }
  }
  rep.metrics["max_df"] = {max_df, max_unc};
  rep.metrics["passed"] = {static_cast<double>(passed), 0.0};
  verdict_from(rep, "all_certified", passed == n);
}

// ---- metric-lemma ---------------------------------------------------------

CurveRep sample_with_pole_in_window(const MeasureSampler& sampler,
                                    std::uint64_t seed, std::uint64_t index,
                                    double family_L, double window_side) {
  const CurveRep f = sample_curve(sampler, seed, index);
  // Locate the pole nearest the origin and translate it to a uniform spot
  // inside the comparison window, so the pair is not trivially constant
  // on the tiny region the dynamical metrics look at.
  const auto& node = std::get<LatticeSumNode>(f.node());
  const cplx w = node.offset_w;
  const double mL = std::round(w.real() / family_L) * family_L;
  const double nL = std::round(w.imag() / family_L) * family_L;
  const cplx pole = cplx(mL, nL) - w;
  Rng rng(stream_key(seed, index, 0x90CE));
  const cplx target(rng.uniform(0.0, window_side),
                    rng.uniform(0.0, window_side));
  return translate(f, pole - target);
}

void run_metric_lemma(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const FamilyParams fam = family_from_config(cfg);
  const MeasureSampler sampler = lattice_family(fam);
  const std::size_t n_pairs =
      static_cast<std::size_t>(cfg.get_int("n_pairs", 100));
  const std::vector<double> Ls_real = cfg.get_real_list("Ls", {1.0, 2.0, 4.0});
  const double h = cfg.get_real("grid_spacing", 1.0 / 64);

  std::size_t checks = 0, held = 0;
  double worst_ratio = 0.0;  // left_upper / (4 right_lower + slack)
  for (std::size_t i = 0; i < n_pairs; ++i) {
    for (double Lr : Ls_real) {
      const int L = static_cast<int>(std::lround(Lr));
      const CurveRep f = sample_with_pole_in_window(sampler, cfg.seed, 2 * i,
                                                    fam.L, L + 1.0);
      const CurveRep g = sample_with_pole_in_window(sampler, cfg.seed,
                                                    2 * i + 1, fam.L, L + 1.0);
      const MetricComparisonReport mc = metric_comparison_check(f, g, L, h);
      ++checks;
      if (mc.holds) ++held;
      const double denom = 4.0 * mc.right_lower + mc.slack;
      if (denom > 0.0)
        worst_ratio = std::max(worst_ratio, mc.left_upper / denom);
    }
  }
  rep.metrics["checks"] = {static_cast<double>(checks), 0.0};
  rep.metrics["held"] = {static_cast<double>(held), 0.0};
  rep.metrics["worst_ratio"] = {worst_ratio, 0.0};
  verdict_from(rep, "lemma_holds", held == checks);
}

// ---- tame-growth ----------------------------------------------------------

void run_tame_growth(const ExperimentConfig& cfg, ExperimentReport& rep) {
  FamilyParams fam = family_from_config(cfg);
  // Small cells spread the ensemble out under dbar_1 (the default L = 100
  // family is nearly constant on the unit windows the metric looks at);
  // L = 2 keeps typical pairwise distances near the 0.2 rung.
  if (!cfg.has("L")) fam.L = 2.0;
  const std::size_t n = static_cast<std::size_t>(cfg.get_int("n", 1000));
  const int m = cfg.get_int("grid_subdivisions", 8);
  const std::vector<double> ladder =
      cfg.get_real_list("eps_ladder", {0.2, 0.1, 0.05, 0.025});
  const double delta = cfg.get_real("delta", 0.5);

  const MeasureSampler sampler = lattice_family(fam);
  std::vector<CurveRep> curves;
  curves.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    curves.push_back(sample_curve(sampler, cfg.seed, i));

  const DistanceMatrix dist = ensemble_dbar1_matrix(curves, m);
  const TameGrowthProfile profile = tame_growth_profile(dist, ladder, delta);
  for (std::size_t k = 0; k < profile.rows.size(); ++k)
    rep.metrics["profile_" + std::to_string(k)] = {profile.rows[k].profile,
                                                   0.0};
  verdict_from(rep, "profile_nonincreasing", profile.consistent);

  const std::string csv = artifact_path(cfg, "tame_growth.csv");
  write_profile_csv(profile, csv);
  rep.artifacts.push_back(std::filesystem::path(csv).filename().string());
}

// ---- nsa-ergodic ----------------------------------------------------------

void run_nsa_ergodic(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const FamilyParams fam = family_from_config(cfg);
  const std::size_t n = static_cast<std::size_t>(cfg.get_int("n", 1024));
  const std::vector<double> ladder =
      cfg.get_real_list("R_ladder", {25.0, 50.0, 100.0});
  const MeasureSampler sampler = lattice_family(fam);

  const ErgodicAverageReport er =
      ergodic_average_check(sampler, cfg.seed, ladder, n);
  rep.metrics["e_psi"] = {er.e_psi, 0.0};
  for (std::size_t k = 0; k < er.rows.size(); ++k) {
    const auto& row = er.rows[k];
    rep.metrics["rel_gap_R" + std::to_string(static_cast<int>(row.R))] = {
        row.rel_gap, 0.0};
  }
  verdict_from(rep, "gaps_shrink", er.gaps_shrink);
  verdict_from(rep, "final_gap_below_10pct", er.final_rel_gap < 0.10);

  const std::string csv = artifact_path(cfg, "nsa_gaps.csv");
  std::ofstream out(csv);
  out.precision(17);
  out << "R,normalized_mean,gap,rel_gap\n";
  for (const auto& row : er.rows)
    out << row.R << "," << row.normalized_mean << "," << row.gap << ","
        << row.rel_gap << "\n";
  rep.artifacts.push_back(std::filesystem::path(csv).filename().string());
}

// ---- rescale-family -------------------------------------------------------

void run_rescale_family(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const double L = cfg.get_real("L", 10.0);
  const int cells = cfg.get_int("cells", 3);
  const double a = cfg.get_real("a_center", 2.0);
  // Deterministic near-periodic representative: all coefficients at the
  // window center, pole kept away from the cell boundary.
  LatticeSumNode node;
  node.L = L;
  node.window_radius = cells * L;
  node.offset_w = cplx(L / 2, L / 2);
  for (int m = -cells; m <= cells; ++m)
    for (int n = -cells; n <= cells; ++n) node.coeffs.push_back({m, n, a});
  const CurveRep g = make_lattice_sum(std::move(node));

  const double rho = energy_density(g, L);
  rep.metrics["rho_hat_scaled"] = {rho * L * L, 0.0};

  const double c = cfg.get_real("c", 6.0 / (L * L));
  const double lambda = design_rescaling(g, c, L);
  rep.metrics["lambda"] = {lambda, 0.0};

  const CurveRep h = rescale(g, lambda);
  const double rho2 = energy_density(h, L / lambda);
  const double achieved = 2.0 * (g.dim() + 1) * rho2;
  rep.metrics["achieved_c"] = {achieved, 0.0};
  verdict_from(rep, "target_within_2pct", std::abs(achieved - c) <= 0.02 * c);
}

// ---- glue-decay -----------------------------------------------------------

void run_glue_decay(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const std::string inner = cfg.get_string("inner", "constant");
  CurveRep f = [&]() -> CurveRep {
    if (inner == "constant") {
      std::vector<cplx> v(2, cplx(0.0, 0.0));
      v[0] = 1.0;
      return make_constant(ProjectivePoint(v));
    }
    const FamilyParams fam = family_from_config(cfg);
    return sample_curve(lattice_family(fam), cfg.seed, 0);
  }();
  const cplx p(cfg.get_real("p_re", 0.0), cfg.get_real("p_im", 0.0));
  const ProjectivePoint q = evaluate(f, p);
  const GlueConfig gcfg;
  const CurveRep glued = glue(f, p, q, gcfg);

  // Decay of the perturbation along [1, 50], max over a few angles.
  const int n_radii = cfg.get_int("n_radii", 25);
  std::vector<double> logr(n_radii), logd(n_radii);
  std::ofstream out;
  const std::string csv = artifact_path(cfg, "glue_decay.csv");
  out.open(csv);
  out.precision(17);
  out << "radius,distance\n";
  for (int i = 0; i < n_radii; ++i) {
    const double r =
        std::exp(std::log(1.0) + (std::log(50.0) - std::log(1.0)) * i /
                                     (n_radii - 1));
    double d = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double th = 2.0 * kPi * k / 8;
      const cplx z = p + std::polar(r, th);
      d = std::max(d, fs_distance(evaluate(f, z), evaluate(glued, z)));
    }
    logr[i] = std::log(r);
    logd[i] = std::log(d);
    out << r << "," << d << "\n";
  }
  rep.artifacts.push_back(std::filesystem::path(csv).filename().string());

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n_radii; ++i) {
    sx += logr[i];
    sy += logd[i];
    sxx += logr[i] * logr[i];
    sxy += logr[i] * logd[i];
  }
  const double slope =
      (n_radii * sxy - sx * sy) / (n_radii * sxx - sx * sx);
  rep.metrics["decay_slope"] = {slope, 0.0};
  verdict_from(rep, "slope_minus_3", std::abs(slope + 3.0) <= 0.3);

  // Calibration: the perturbation norm over the far field hits the target.
  double achieved = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double th = 2.0 * kPi * k / 8;
    const cplx z = p + std::polar(gcfg.far_field_radius, th);
    achieved =
        std::max(achieved, fs_distance(evaluate(f, z), evaluate(glued, z)));
  }
  rep.metrics["tail_norm"] = {achieved, 0.0};
  verdict_from(rep, "norm_calibrated",
               std::abs(achieved - gcfg.target) <= 1e-6);
}

struct Entry {
  ExperimentInfo info;
  Runner run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {{"example-random-family",
        "lattice family potential and rate targets: E[psi] = 12/L^2, "
        "rdim = 2/L^2"},
       run_example_random_family},
      {{"ruelle-check",
        "rate-dimension inequality urdim(B^N, T, d, mu) <= integral of psi "
        "d mu"},
       run_ruelle_check},
      {{"brody-bound", "defining bound |df|(z) <= 1 for all z"},
       run_brody_bound},
      {{"metric-lemma",
        "window comparison d_{a+[0,L]^2} <= 4 (dbar_1)^Z_{L+1}"},
       run_metric_lemma},
      {{"tame-growth",
        "tame growth of covering numbers: eps^delta log #(X, d, eps) -> 0"},
       run_tame_growth},
      {{"nsa-ergodic",
        "T(R, f) = (pi R^2 / 4(N+1)) integral of psi d mu + o(R^2)"},
       run_nsa_ergodic},
      {{"rescale-family",
        "energy-density design lambda = sqrt(c / (2(N+1) rho(g)))"},
       run_rescale_family},
      {{"glue-decay", "glued-tail perturbation bound <= C_4 / |z-p|^3"},
       run_glue_decay},
  };
  return entries;
}

}  // namespace

const std::vector<ExperimentInfo>& registered_experiments() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const auto& e : registry()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const Entry* entry = nullptr;
  for (const auto& e : registry())
    if (e.info.name == config.name) entry = &e;
  if (!entry)
    throw InvalidParameter("unknown experiment: " + config.name);

  ExperimentReport report;
  report.name = config.name;
  report.anchor = entry->info.anchor;
  report.seed = config.seed;
  report.config_echo = config.params;

  std::filesystem::create_directories(config.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    entry->run(config, report);
  } catch (const std::exception& e) {
    report.metrics.clear();
    report.verdicts.clear();
    report.verdicts["experiment"] = "inconclusive";
    report.config_echo["error"] = e.what();
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::ofstream out(artifact_path(config, "report.json"));
  out << dump_json(report_to_json(report));
  return report;
}

}  // namespace brodylab
