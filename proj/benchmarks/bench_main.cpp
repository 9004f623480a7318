#include <benchmark/benchmark.h>

#include "brodylab/curve.hpp"
#include "brodylab/energy.hpp"
#include "brodylab/information.hpp"
#include "brodylab/measures.hpp"
#include "brodylab/projective.hpp"
#include "brodylab/rng.hpp"

namespace {

using namespace brodylab;

CurveRep family_sample(double L) {
  FamilyParams fam;
  fam.L = L;
  return sample_curve(lattice_family(fam), 42, 0);
}

void BM_LatticeJet(benchmark::State& state) {
  const CurveRep f = family_sample(100.0);
  Rng rng(1);
  std::vector<cplx> pts;
  for (int i = 0; i < 256; ++i)
    pts.emplace_back(rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(jet(f, pts[i++ % pts.size()]));
  }
}
BENCHMARK(BM_LatticeJet);

void BM_LocalLipschitz(benchmark::State& state) {
  const CurveRep f = family_sample(100.0);
  Rng rng(2);
  std::vector<cplx> pts;
  for (int i = 0; i < 256; ++i)
    pts.emplace_back(rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(local_lipschitz(f, pts[i++ % pts.size()]));
  }
}
BENCHMARK(BM_LocalLipschitz);

void BM_FsDistance(benchmark::State& state) {
  Rng rng(3);
  std::vector<ProjectivePoint> pts;
  for (int i = 0; i < 128; ++i) {
    std::vector<cplx> v;
    for (int k = 0; k < 2; ++k)
      v.emplace_back(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    pts.emplace_back(v);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fs_distance(pts[i % pts.size()], pts[(i + 7) % pts.size()]));
    ++i;
  }
}
BENCHMARK(BM_FsDistance);

void BM_CellEnergy(benchmark::State& state) {
  const CurveRep f = family_sample(100.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cell_energy_adaptive(f, {cplx(0.0, 0.0), 100.0}, 64));
  }
}
BENCHMARK(BM_CellEnergy)->Unit(benchmark::kMillisecond);

void BM_BlahutArimoto1d(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> xs(n), p(n, 1.0 / n);
  for (int i = 0; i < n; ++i) xs[i] = static_cast<double>(i) / (n - 1);
  const Pmf source = Pmf::validated(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ba_1d_quantized(xs, source, 200.0));
  }
}
BENCHMARK(BM_BlahutArimoto1d)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
