#include <benchmark/benchmark.h>

#include <vector>

#include "ptdw/eigensolver.hpp"
#include "ptdw/propagator.hpp"
#include "ptdw/semiclassics.hpp"

using namespace ptdw;

namespace {

void BM_PropagateSeed(benchmark::State& state) {
  const auto spec = ProblemSpec::h_form(0.1);
  const cplx E = wkb_level(0, 0.1, +1).value;
  const auto dirs = decay_directions(spec);
  const double L = truncation_radius(E, spec, dirs.right);
  const auto seed = wkb_seed(E, spec, L * dirs.right, dirs.right);
  const std::vector<cplx> path{L * dirs.right, 0.0};
  PropagatorOptions opt;
  opt.record_samples = false;
  for (auto _ : state) benchmark::DoNotOptimize(propagate(seed, path, E, spec, opt).back());
}
BENCHMARK(BM_PropagateSeed)->Unit(benchmark::kMicrosecond);

void BM_FindLevelPerturbative(benchmark::State& state) {
  const double h = 0.05;
  const cplx guess = wkb_level(int(state.range(0)), h, +1).value;
  for (auto _ : state) benchmark::DoNotOptimize(find_level(guess, ProblemSpec::h_form(h)).energy);
}
BENCHMARK(BM_FindLevelPerturbative)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state) {
  const auto spec = ProblemSpec::k_form(0.0);
  for (auto _ : state) benchmark::DoNotOptimize(oracle_spectrum(spec, int(state.range(0))).levels.size());
}
BENCHMARK(BM_Oracle)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_ScanSpectrum(benchmark::State& state) {
  const auto spec = ProblemSpec::k_form(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(scan_spectrum(Rect{0.0, 12.0, -0.5, 0.5}, spec).levels.size());
}
BENCHMARK(BM_ScanSpectrum)->Unit(benchmark::kMillisecond);

void BM_FindEp(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(find_Ep().E);
}
BENCHMARK(BM_FindEp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
