#include "wlanips/survey.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "parallel.hpp"
#include "wlanips/dsss_modem.hpp"
#include "wlanips/phy_frames.hpp"
#include "wlanips/sync_detector.hpp"

namespace wlanips {

SurveyScenario make_survey_scenario(const ChannelModelParams& params, std::uint64_t seed, int beacons_per_rp,
                                    double tap_sigma, double gain_sigma_db) {
  SurveyScenario s;
  s.grid = default_survey_grid();
  s.profile_per_rp = gen_profiles(s.grid, params, seed);
  s.beacons_per_rp = beacons_per_rp;
  s.variation.tap_sigma = tap_sigma;
  s.variation.gain_sigma_db = gain_sigma_db;
  s.variation.pdp = params.power_delay_profile();
  return s;
}

RpMeasurements simulate_rp_records(const SurveyScenario& scenario, int rp_id, const RxConfig& rx,
                                   std::uint64_t seed, const SurveySimOptions& options, RxStats* stats) {
  scenario.validate();
  rx.validate();
  const ChannelProfile& base = scenario.profile_per_rp.at(rp_id);
  std::mt19937_64 rng(rp_seed(seed, rp_id));
  std::uint64_t noise_state = rng() | 1ULL;
  const std::size_t max_beacons =
      options.max_beacons_per_rp != 0 ? options.max_beacons_per_rp : 2 * options.records_per_rp;

  const double fs = kProcessingRateHz;
  const double interval_s = TimeUnit{scenario.beacon_interval_tu}.seconds();
  // The noise floor is fixed by the RP's mean received power.
  const double noise_power = std::isfinite(base.snr_db)
                                 ? std::pow(10.0, base.gain_db / 10.0) * base.tap_energy() /
                                       std::pow(10.0, base.snr_db / 10.0)
                                 : 0.0;
  const std::size_t guard = options.guard_samples;
  const std::size_t search = guard + static_cast<std::size_t>(std::max(0, base.delay_samples)) + 64;

  SyncDetector detector;
  RxStats local;
  RpMeasurements out;
  out.rp_id = rp_id;
  std::vector<cf32> buf;
  for (std::size_t b = 0; b < max_beacons && out.records.size() < options.records_per_rp; ++b) {
    const auto index = static_cast<int>(b);
    const IqStream wave = tx_waveform(build_beacon(survey_beacon(scenario, index)), fs);
    ChannelProfile p = jitter_profile(base, scenario.variation, rng);
    p.cfo_hz = 0.0;
    const std::vector<cf32> y = convolve_channel(wave.samples, fs, p);
    buf.assign(guard + y.size() + guard, cf32{});
    std::copy(y.begin(), y.end(), buf.begin() + static_cast<std::ptrdiff_t>(guard));
    const double t0 = scenario.first_beacon_s + index * interval_s - static_cast<double>(guard) / fs;
    rotate(buf, base.cfo_hz, fs, std::llround(t0 * fs));
    add_table_awgn(buf, noise_power, noise_state);

    const std::size_t window = std::min(buf.size(), search + kSyncSamples + 64);
    const auto det = detector.detect(std::span<const cf32>(buf.data(), window), rx.threshold, search);
    if (!det) continue;
    ++local.detections;
    const DecodeResult r = decode_packet(buf, *det, rx, t0);
    if (r.record) {
      ++local.records;
      out.records.push_back(*r.record);
    } else if (r.reject) {
      local.count(*r.reject);
    }
  }
  if (stats) *stats += local;
  return out;
}

std::vector<RpMeasurements> simulate_survey_records(const SurveyScenario& scenario, const RxConfig& rx,
                                                    std::uint64_t seed, const SurveySimOptions& options,
                                                    RxStats* stats) {
  scenario.validate();
  std::vector<RpMeasurements> out(scenario.grid.size());
  std::vector<RxStats> per(scenario.grid.size());
  detail::parallel_for(scenario.grid.size(), options.threads, [&](std::size_t k, unsigned) {
    out[k] = simulate_rp_records(scenario, scenario.grid[k].rp_id, rx, seed, options, &per[k]);
  });
  if (stats) {
    for (const auto& s : per) *stats += s;
  }
  return out;
}

}  // namespace wlanips
