#include <benchmark/benchmark.h>

#include "isirate/isi_channel.hpp"
#include "isirate/logsnr.hpp"
#include "isirate/parallel.hpp"
#include "isirate/scalar_channel.hpp"
#include "isirate/uniform_input.hpp"

using namespace isirate;

namespace {

const GridSpec kGrid{-10.0, 40.0, 64};

void BM_tabulate(benchmark::State& st) {
  ScalarChannel ch(make_named("256-QAM"));
  for (auto _ : st) benchmark::DoNotOptimize(tabulate(ch, kGrid));
}

void BM_tabulate_serial(benchmark::State& st) {
  ScalarChannel ch(make_named("256-QAM"));
  for (auto _ : st) benchmark::DoNotOptimize(tabulate_serial(ch, kGrid));
}

void BM_tabulate_2d(benchmark::State& st) {
  ScalarChannel ch(make_named("8-PSK"));
  for (auto _ : st) benchmark::DoNotOptimize(tabulate(ch, kGrid));
}

void BM_tabulate_2d_serial(benchmark::State& st) {
  ScalarChannel ch(make_named("8-PSK"));
  for (auto _ : st) benchmark::DoNotOptimize(tabulate_serial(ch, kGrid));
}

void BM_rate_ofdm(benchmark::State& st) {
  ScalarChannel ch(make_named("64-QAM"));
  const IsiChannel c = channel_80211n().scaled_to(db_to_lin(20.0));
  for (auto _ : st) benchmark::DoNotOptimize(rate_ofdm(ch, c));
}

void BM_rate_ofdm_serial(benchmark::State& st) {
  ScalarChannel ch(make_named("64-QAM"));
  const IsiChannel c = channel_80211n().scaled_to(db_to_lin(20.0));
  for (auto _ : st) benchmark::DoNotOptimize(rate_ofdm_serial(ch, c));
}

ProfileOptions coarse() {
  ProfileOptions o;
  o.resolution_bits = 5e-3;
  return o;
}

void BM_build_profile(benchmark::State& st) {
  ScalarChannel ch(make_named("64-QAM"));
  for (auto _ : st) benchmark::DoNotOptimize(build_profile(ch, coarse()));
}

void BM_build_profile_serial(benchmark::State& st) {
  ScalarChannel ch(make_named("64-QAM"));
  for (auto _ : st) benchmark::DoNotOptimize(build_profile_serial(ch, coarse()));
}

}  // namespace

BENCHMARK(BM_tabulate)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_tabulate_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_tabulate_2d)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_tabulate_2d_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_rate_ofdm)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_rate_ofdm_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_build_profile)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_build_profile_serial)->Unit(benchmark::kMillisecond)->UseRealTime();

int main(int argc, char** argv) {
  configure_threads();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
