#include <benchmark/benchmark.h>

#include "dmqkd/keyrate.hpp"

namespace {

using namespace dmqkd;

ThreeModeSource make_qam_source(int side, double vg, double va) {
  const double r = calibrate_r(side, vg, va);
  return split_on_beamsplitter(
      build_purification(qam_constellation({side, r, vg})), 0.9);
}

ChannelParams mid_channel() {
  ChannelParams ch;
  ch.transmittance = 0.3;
  ch.excess_noise = 0.02;
  return ch;
}

void BM_BuildPurification(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const double vg = side >= 16 ? 11.0 : (side >= 8 ? 6.0 : 4.5);
  const double r = calibrate_r(side, vg, 5.0);
  const auto c = qam_constellation({side, r, vg});
  for (auto _ : state) {
    auto src = build_purification(c);
    benchmark::DoNotOptimize(src.gamma_ad);
  }
}
BENCHMARK(BM_BuildPurification)->Arg(4)->Arg(8)->Arg(16);

void BM_HolevoBound(benchmark::State& state) {
  const auto src = make_qam_source(4, 3.0, 3.0);
  const auto st =
      standardize(apply_channel(src, mid_channel()), Measurement::homodyne_x);
  for (auto _ : state)
    benchmark::DoNotOptimize(st.holevo_at(st.kappa_true_std));
}
BENCHMARK(BM_HolevoBound);

void BM_SupSearch(benchmark::State& state) {
  const auto src = make_qam_source(4, 3.0, 3.0);
  const auto st =
      standardize(apply_channel(src, mid_channel()), Measurement::homodyne_x);
  for (auto _ : state) {
    auto sup = sup_holevo(st);
    benchmark::DoNotOptimize(sup.s_sup);
  }
}
BENCHMARK(BM_SupSearch);

void BM_MutualInformation(benchmark::State& state) {
  const auto src = make_qam_source(16, 11.0, 5.0);
  const auto ch = mid_channel();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mutual_information(src, ch, Measurement::homodyne_x));
}
BENCHMARK(BM_MutualInformation);

void BM_KeyRatePoint(benchmark::State& state) {
  const auto src = make_qam_source(4, 3.0, 3.0);
  const auto ch = mid_channel();
  for (auto _ : state) {
    auto pt = key_rate(src, ch, 0.95, Measurement::homodyne_x);
    benchmark::DoNotOptimize(pt.key_rate);
  }
}
BENCHMARK(BM_KeyRatePoint);

}  // namespace

BENCHMARK_MAIN();
