#include <benchmark/benchmark.h>

#include "waseplab/flows.hpp"
#include "waseplab/fluct.hpp"
#include "waseplab/hydro.hpp"
#include "waseplab/master.hpp"
#include "waseplab/obs.hpp"
#include "waseplab/rng.hpp"
#include "waseplab/wasep.hpp"

using namespace waseplab;

static void BM_Philox(benchmark::State& st) {
  Philox rng(1, 0, 0);
  for (auto _ : st) benchmark::DoNotOptimize(rng());
}
BENCHMARK(BM_Philox);

static void BM_Simulate(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Torus tor(1, n);
  const auto rates = build_rates(VectorFieldSpec::constant(1, {1.0, 0.0, 0.0}), tor);
  DensityField u{tor, std::vector<double>(tor.sites(), 0.5), 0.0};
  std::size_t proposals = 0;
  std::uint64_t r = 0;
  for (auto _ : st) {
    const auto eta = sample_profile_measure(u, 3, r);
    Philox rng(3, r++, 2);
    const auto tr = simulate(eta, rates, 0.001, rng, {});
    proposals += tr.proposals;
  }
  st.counters["proposals/s"] = benchmark::Counter(static_cast<double>(proposals), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Simulate)->Arg(64)->Arg(256);

static void BM_HydroStep(benchmark::State& st) {
  Torus tor(2, static_cast<int>(st.range(0)));
  const auto F = sample_dual_field(VectorFieldSpec::rotational(1.0), tor);
  auto u = sample_profile(TrigSeries::cosine(0.5, 0.2), tor).u;
  const double dt = default_hydro_dt(tor, 1.0);
  for (auto _ : st) {
    u = hydro_rk4_step(u, F, dt);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_HydroStep)->Arg(32)->Arg(128);

static void BM_MasterForward(benchmark::State& st) {
  Torus tor(1, static_cast<int>(st.range(0)));
  const auto rates = build_rates(VectorFieldSpec::fourier(1, {TrigSeries::sine(0.0, 1.0), {}, {}}), tor);
  const auto p = product_measure_vector(sample_profile(TrigSeries::cosine(0.5, 0.2), tor)).p;
  for (auto _ : st) benchmark::DoNotOptimize(apply_forward(p, rates));
}
BENCHMARK(BM_MasterForward)->Arg(8)->Arg(12);

static void BM_QellFlow(benchmark::State& st) {
  const int ell = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(point_to_qell_flow(ell, 2));
}
BENCHMARK(BM_QellFlow)->Arg(8)->Arg(32);

static void BM_FirstStage(benchmark::State& st) {
  Torus tor(1, 256);
  const DensityField u = sample_profile(TrigSeries::cosine(0.5, 0.2), tor);
  const auto eta = sample_profile_measure(u, 5, 0);
  const std::vector<double> G(tor.sites(), 1.0);
  const int ell = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(first_stage(G, LocalSet::origin(1), 0, ell, eta, u));
}
BENCHMARK(BM_FirstStage)->Arg(4)->Arg(16);

BENCHMARK_MAIN();
