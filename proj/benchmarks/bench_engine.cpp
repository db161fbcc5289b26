#include <benchmark/benchmark.h>

#include "polsqueeze/gaussian_oracle.hpp"
#include "polsqueeze/metrics.hpp"
#include "polsqueeze/sweep.hpp"
#include "polsqueeze/two_photon.hpp"

using namespace polsq;

namespace {

const OpoParams kTypical = OpoParams::from_squeezed_flux(8e6, 0.93, 2e5, 2e6);

void BM_PairCorrelations(benchmark::State& state) {
  double tau = 0.0;
  for (auto _ : state) {
    tau += 1e-12;
    benchmark::DoNotOptimize(pair_correlations(tau, kTypical));
  }
}
BENCHMARK(BM_PairCorrelations);

void BM_BuildOdm(benchmark::State& state) {
  const auto corr = pair_correlations(1e-9, kTypical);
  for (auto _ : state)
    benchmark::DoNotOptimize(TwoPhotonODM::from_correlations(corr));
}
BENCHMARK(BM_BuildOdm);

void BM_Concurrence(benchmark::State& state) {
  const auto odm =
      TwoPhotonODM::from_correlations(pair_correlations(1e-9, kTypical));
  for (auto _ : state) benchmark::DoNotOptimize(concurrence(odm));
}
BENCHMARK(BM_Concurrence);

void BM_ChshMax(benchmark::State& state) {
  const auto odm =
      TwoPhotonODM::from_correlations(pair_correlations(1e-9, kTypical));
  for (auto _ : state) benchmark::DoNotOptimize(chsh_max(odm));
}
BENCHMARK(BM_ChshMax);

void BM_MomentsTime(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(moments_time(1e-9, kTypical));
}
BENCHMARK(BM_MomentsTime);

void BM_ConcurrenceFlux(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(concurrence_flux(kTypical));
}
BENCHMARK(BM_ConcurrenceFlux);

void BM_EvalPoint(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(eval_point(kTypical, 1e-9, 1e-9));
}
BENCHMARK(BM_EvalPoint);

void BM_Sweep16x16(benchmark::State& state) {
  SweepSpec s;
  s.axes.push_back({SweepParam::phi_c, AxisScale::log, 1e5, 1e8, 16});
  s.axes.push_back({SweepParam::phi_s, AxisScale::log, 1e3, 1e6, 16});
  s.fixed = {{SweepParam::delta_nu, 8e6},
             {SweepParam::eta, 0.93},
             {SweepParam::tau, 1e-9}};
  s.outputs = {OutputField::concurrence};
  s.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(s, false));
}
BENCHMARK(BM_Sweep16x16)->Arg(1)->Arg(4);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
