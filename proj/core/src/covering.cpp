#include "brodylab/covering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace brodylab {

namespace {

void check_matrix(const DistanceMatrix& dist) {
  if (dist.empty()) throw InvalidParameter("empty point set");
  for (const auto& row : dist)
    if (row.size() != dist.size())
      throw InvalidParameter("distance matrix is not square");
}

// valid[mask] == the subset has diameter < eps.
std::vector<char> feasible_subsets(const DistanceMatrix& dist, double eps) {
  const int n = static_cast<int>(dist.size());
  std::vector<char> valid(std::size_t{1} << n, 0);
  valid[0] = 1;
  for (std::size_t mask = 1; mask < valid.size(); ++mask) {
    const int h = 31 - __builtin_clz(static_cast<unsigned>(mask));
    const std::size_t rest = mask ^ (std::size_t{1} << h);
    if (!valid[rest]) continue;
    bool ok = true;
    for (int i = 0; i < h && ok; ++i)
      if (rest >> i & 1) ok = dist[h][i] < eps;
    valid[mask] = ok;
  }
  return valid;
}

int greedy_cover(const DistanceMatrix& dist, double eps) {
  const int n = static_cast<int>(dist.size());
  const double r = 0.5 * eps * (1.0 - 1e-9);  // ball radius => diameter < eps
  std::vector<char> covered(n, 0);
  int remaining = n, count = 0;
  while (remaining > 0) {
    int best = -1, best_gain = -1;
    for (int p = 0; p < n; ++p) {
      int gain = 0;
      for (int x = 0; x < n; ++x)
        if (!covered[x] && dist[p][x] <= r) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best = p;
      }
    }
    for (int x = 0; x < n; ++x)
      if (!covered[x] && dist[best][x] <= r) {
        covered[x] = 1;
        --remaining;
      }
    ++count;
  }
  return count;
}

}  // namespace

int covering_number(const DistanceMatrix& dist, double eps) {
  if (eps <= 0.0) throw InvalidParameter("covering_number: eps must be > 0");
  check_matrix(dist);
  const int n = static_cast<int>(dist.size());
  if (n > 12) return greedy_cover(dist, eps);

  const std::vector<char> valid = feasible_subsets(dist, eps);
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<int> f(full + 1, n + 1);
  f[0] = 0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    const std::size_t low = mask & (~mask + 1);
    for (std::size_t sub = mask; sub; sub = (sub - 1) & mask)
      if ((sub & low) && valid[sub]) f[mask] = std::min(f[mask], f[mask ^ sub] + 1);
  }
  return f[full];
}

double covering_number_with_potential(const DistanceMatrix& dist,
                                      const std::vector<double>& phi,
                                      double eps) {
  if (eps <= 0.0 || eps >= 1.0)
    throw InvalidParameter("covering_number_with_potential: eps in (0,1)");
  check_matrix(dist);
  const int n = static_cast<int>(dist.size());
  if (phi.size() != dist.size())
    throw InvalidParameter("phi size mismatch");
  auto cost_of = [&](double sup_phi) { return std::pow(1.0 / eps, sup_phi); };

  if (n <= 10) {
    const std::vector<char> valid = feasible_subsets(dist, eps);
    const std::size_t full = (std::size_t{1} << n) - 1;
    std::vector<double> sup(full + 1, 0.0);
    for (std::size_t mask = 1; mask <= full; ++mask) {
      double s = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1) s = std::max(s, phi[i]);
      sup[mask] = s;
    }
    std::vector<double> f(full + 1, std::numeric_limits<double>::infinity());
    f[0] = 0.0;
    for (std::size_t mask = 1; mask <= full; ++mask) {
      const std::size_t low = mask & (~mask + 1);
      for (std::size_t sub = mask; sub; sub = (sub - 1) & mask)
        if ((sub & low) && valid[sub])
          f[mask] = std::min(f[mask], f[mask ^ sub] + cost_of(sup[sub]));
    }
    return f[full];
  }

  // Greedy: highest covered-per-cost ball first.
  const double r = 0.5 * eps * (1.0 - 1e-9);
  std::vector<char> covered(n, 0);
  int remaining = n;
  double total = 0.0;
  while (remaining > 0) {
    int best = -1;
    double best_score = -1.0;
    for (int p = 0; p < n; ++p) {
      int gain = 0;
      double sup_phi = -std::numeric_limits<double>::infinity();
      for (int x = 0; x < n; ++x)
        if (!covered[x] && dist[p][x] <= r) {
          ++gain;
          sup_phi = std::max(sup_phi, phi[x]);
        }
      if (gain == 0) continue;
      const double score = gain / cost_of(sup_phi);
      if (score > best_score) {
        best_score = score;
        best = p;
      }
    }
    double sup_phi = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < n; ++x)
      if (!covered[x] && dist[best][x] <= r) {
        covered[x] = 1;
        sup_phi = std::max(sup_phi, phi[x]);
        --remaining;
      }
    total += cost_of(sup_phi);
  }
  return total;
}

TameGrowthProfile tame_growth_profile(const DistanceMatrix& dist,
                                      const std::vector<double>& eps_ladder,
                                      double delta) {
  if (eps_ladder.empty())
    throw InvalidParameter("tame_growth_profile: empty ladder");
  for (std::size_t k = 1; k < eps_ladder.size(); ++k)
    if (!(eps_ladder[k] < eps_ladder[k - 1]) || eps_ladder[k] <= 0.0 ||
        eps_ladder[0] >= 1.0)
      throw InvalidParameter(
          "tame_growth_profile: ladder must be strictly decreasing in (0,1)");

  TameGrowthProfile profile;
  profile.delta = delta;
  for (double eps : eps_ladder) {
    const int count = covering_number(dist, eps);
    TameGrowthRow row;
    row.eps = eps;
    row.log2_count = std::log2(static_cast<double>(count));
    row.profile = std::pow(eps, delta) * row.log2_count;
    profile.rows.push_back(row);
  }
  profile.consistent = profile.rows.size() >= 3;
  const std::size_t n = profile.rows.size();
  for (std::size_t k = n >= 3 ? n - 2 : 1; k < n; ++k)
    if (profile.rows[k].profile > profile.rows[k - 1].profile + 1e-12)
      profile.consistent = false;
  return profile;
}

void write_profile_csv(const TameGrowthProfile& profile,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NumericError("cannot open " + path);
  out << "epsilon,log_count,profile\n";
  out.precision(17);
  for (const auto& row : profile.rows)
    out << row.eps << ',' << row.log2_count << ',' << row.profile << '\n';
}

}  // namespace brodylab
