#pragma once

#include <cstdint>
#include <vector>

#include "wlanips/channel_sim.hpp"
#include "wlanips/radio_map.hpp"
#include "wlanips/rx_chain.hpp"

namespace wlanips {

/// Default per-beacon variation of the synthetic survey.
inline constexpr double kSurveyTapSigma = 0.25;
inline constexpr double kSurveyGainSigmaDb = 1.5;

/// The 69-point 2 ft survey with profiles drawn from `params` under `seed`.
SurveyScenario make_survey_scenario(const ChannelModelParams& params, std::uint64_t seed,
                                    int beacons_per_rp = 600, double tap_sigma = kSurveyTapSigma,
                                    double gain_sigma_db = kSurveyGainSigmaDb);

struct SurveySimOptions {
  std::size_t records_per_rp = 600;
  /// Beacons sent per RP before giving up; 0 means twice records_per_rp.
  std::size_t max_beacons_per_rp = 0;
  /// Noise-only samples around each beacon.
  std::size_t guard_samples = 200;
  unsigned threads = 0;  // 0 = hardware concurrency; results do not depend on it
};

/// Sends one RP's beacon train through its profile and the receive chain,
/// one beacon at a time at 22 MHz, until records_per_rp records decode.
/// Equivalent to decoding the RP's capture file without the file round trip.
RpMeasurements simulate_rp_records(const SurveyScenario& scenario, int rp_id, const RxConfig& rx,
                                   std::uint64_t seed, const SurveySimOptions& options,
                                   RxStats* stats = nullptr);

/// simulate_rp_records over the whole grid, in grid order.
std::vector<RpMeasurements> simulate_survey_records(const SurveyScenario& scenario, const RxConfig& rx,
                                                    std::uint64_t seed, const SurveySimOptions& options,
                                                    RxStats* stats = nullptr);

}  // namespace wlanips
