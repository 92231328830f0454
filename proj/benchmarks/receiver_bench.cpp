#include <benchmark/benchmark.h>

#include "wlanips/capture_engine.hpp"
#include "wlanips/dsss_modem.hpp"
#include "wlanips/rx_chain.hpp"

using namespace wlanips;

namespace {

IqStream one_beacon() {
  ChannelProfile p;
  p.taps = {cf64(0.9, 0.2), cf64(0.3, -0.2), cf64(0.1, 0.05)};
  p.cfo_hz = 20e3;
  p.snr_db = 20.0;
  BeaconSpec spec;
  spec.ssid = "TEST-B";
  const IqStream wave = tx_waveform(build_beacon(spec), kProcessingRateHz);
  IqStream padded{std::vector<cf32>(400, cf32{}), kProcessingRateHz};
  padded.samples.insert(padded.samples.end(), wave.samples.begin(), wave.samples.end());
  padded.samples.resize(padded.samples.size() + 400, cf32{});
  return apply_channel(padded, p, 1, 1.0);
}

void BM_DecodePacket(benchmark::State& state) {
  const IqStream x = one_beacon();
  const auto det = detect_sync(std::span(x.samples).first(2 * kSyncSamples + 400), 0.85);
  RxConfig cfg;
  cfg.eq_level = state.range(0) ? EqLevel::Symbol : EqLevel::Chip;
  for (auto _ : state) benchmark::DoNotOptimize(decode_packet(x.samples, *det, cfg));
}
BENCHMARK(BM_DecodePacket)->Arg(0)->Arg(1);

// One second of 25 MS/s stream, ten beacons, through the two-stage engine.
void BM_EngineOneSecond(benchmark::State& state) {
  SyntheticStreamSpec spec;
  spec.duration_s = 1.0;
  spec.profile.snr_db = 20.0;
  EngineConfig cfg;
  cfg.sleep_enabled = state.range(0) != 0;
  for (auto _ : state) {
    SyntheticBeaconSource src(spec, kSyncSamples * 16);
    benchmark::DoNotOptimize(run(src, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 25'000'000);
}
BENCHMARK(BM_EngineOneSecond)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
