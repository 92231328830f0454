#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wlanips/types.hpp"

namespace wlanips {

/// Streaming rational resampler (up/down) built on a Kaiser-windowed sinc
/// prototype split into `up` polyphase branches of `taps_per_phase` taps.
/// Causal: output n sits at input time n*down/up, delayed by group_delay().
/// One instance per stream; not thread-safe.
class RationalResampler {
 public:
  /// `cutoff_fraction` is the -6 dB edge relative to the lower of the two
  /// Nyquist frequencies.
  RationalResampler(int up, int down, int taps_per_phase = 31, double cutoff_fraction = 0.886,
                    double kaiser_beta = 5.65);

  /// Appends every output sample that the input seen so far can support.
  void process(std::span<const cf32> in, std::vector<cf32>& out);
  std::vector<cf32> process(std::span<const cf32> in);

  /// Clears filter history and counters.
  void reset();

  [[nodiscard]] int up() const { return up_; }
  [[nodiscard]] int down() const { return down_; }
  [[nodiscard]] int taps_per_phase() const { return taps_; }

  /// Prototype filter at the intermediate rate (up x input rate), unit DC gain.
  [[nodiscard]] const std::vector<float>& prototype() const { return prototype_; }

  /// Group delay in input samples.
  [[nodiscard]] double group_delay() const;

  [[nodiscard]] std::uint64_t inputs_consumed() const { return in_count_; }
  [[nodiscard]] std::uint64_t outputs_produced() const { return out_count_; }

 private:
  int up_;
  int down_;
  int taps_;
  int padded_;  // taps rounded up to a multiple of 4
  std::vector<float> prototype_;
  std::vector<float> branches_;  // [phase][2 * padded_] reversed, I/Q duplicated
  std::vector<cf32> work_;
  std::uint64_t in_count_ = 0;
  std::uint64_t out_count_ = 0;
};

/// One-shot conversion between 22 MHz and 25 MHz (either direction).
IqStream resample(const IqStream& in, double out_rate);

/// Capture rate to chip-matched rate. Throws std::invalid_argument unless the
/// input is at 25 MHz.
IqStream resample_25_to_22(const IqStream& in);

}  // namespace wlanips
