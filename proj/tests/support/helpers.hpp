#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wlanips/channel_sim.hpp"
#include "wlanips/dsss_modem.hpp"
#include "wlanips/phy_frames.hpp"
#include "wlanips/types.hpp"

namespace testing {

inline wlanips::Bits random_bits(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  wlanips::Bits b(n);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1U);
  return b;
}

inline wlanips::Bytes random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  wlanips::Bytes b(n);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 0xFFU);
  return b;
}

inline wlanips::BeaconSpec test_beacon(std::uint16_t sequence = 0) {
  wlanips::BeaconSpec spec;
  spec.ssid = "TEST-B";
  spec.bssid = wlanips::MacAddress::parse("A4-2B-8C-04-E8-9D");
  spec.sequence = sequence;
  spec.timestamp_us = 35600 + 102400ULL * sequence;
  spec.channel = 1;
  return spec;
}

/// One beacon at 22 MHz with `guard` silent samples on each side, through
/// `profile`. Noise is referenced to the unit-power transmit waveform.
inline wlanips::IqStream beacon_capture(const wlanips::BeaconSpec& spec, const wlanips::ChannelProfile& profile,
                                        std::uint64_t seed, std::size_t guard = 400) {
  using namespace wlanips;
  const IqStream wave = tx_waveform(build_beacon(spec), kProcessingRateHz);
  IqStream padded;
  padded.sample_rate = kProcessingRateHz;
  padded.samples.assign(guard, cf32{});
  padded.samples.insert(padded.samples.end(), wave.samples.begin(), wave.samples.end());
  padded.samples.resize(padded.samples.size() + guard, cf32{});
  return apply_channel(padded, profile, seed, 1.0);
}

/// Scratch directory under the build tree, emptied on construction.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("wlanips_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
