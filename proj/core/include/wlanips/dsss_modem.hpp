#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "wlanips/scrambler.hpp"
#include "wlanips/types.hpp"

namespace wlanips {

/// 11-chip Barker word, first chip transmitted first.
inline constexpr std::array<int, kChipsPerSymbol> kBarker = {+1, -1, +1, +1, -1, +1,
                                                              +1, +1, -1, -1, -1};

/// Real +/-1 chips. Length is 11 x symbols x oversample_factor.
struct ChipSequence {
  std::vector<float> chips;
  int oversample_factor = 1;

  [[nodiscard]] std::size_t symbol_count() const {
    return chips.size() / (kChipsPerSymbol * static_cast<std::size_t>(oversample_factor));
  }
};

/// Differential encoding: bit 0 keeps the phase, bit 1 flips it. The first
/// bit is referenced to `initial_phase` (+1 or -1). Returns one +/-1 symbol per bit.
std::vector<int> dbpsk_encode(std::span<const std::uint8_t> bits, int initial_phase = +1);

/// DBPSK-encodes then multiplies every symbol by the Barker word.
ChipSequence barker_spread(std::span<const std::uint8_t> bits, int initial_phase = +1);

/// Repeats every chip `factor` times (rectangular chip pulse).
ChipSequence oversample(const ChipSequence& seq, int factor);

/// Correlates consecutive 11-chip windows starting at `chip_offset` with the
/// Barker word, scaled by 1/11. Input is one sample per chip.
std::vector<cf32> barker_despread(std::span<const cf32> chips, std::size_t chip_offset = 0);
std::vector<cf32> barker_despread(const ChipSequence& chips, std::size_t chip_offset = 0);

/// bit_k = 1 when Re(s_k conj(s_{k-1})) < 0. Produces symbols.size() - 1 bits;
/// needs at least two symbols.
Bits dbpsk_demod(std::span<const cf32> symbols);

/// Aperiodic autocorrelation of the Barker word at chip lag `lag` (0..10).
int barker_autocorrelation(int lag);

/// Integrate-and-dump over each chip: averages `samples_per_chip` samples
/// starting at `offset`. Produces one value per complete chip.
std::vector<cf32> chip_samples(std::span<const cf32> samples, std::size_t offset,
                               std::size_t chip_count, int samples_per_chip = kSamplesPerChip);

/// Transmit chain: scramble, DBPSK, Barker spread, rectangular chips at
/// 22 MHz, then polyphase interpolation when `sample_rate` is 25 MHz. The
/// output has unit mean power. Throws std::invalid_argument for any other rate.
IqStream tx_waveform(std::span<const std::uint8_t> frame_bits,
                     double sample_rate = kProcessingRateHz,
                     std::uint8_t seed = kLongPreambleSeed);

/// Known SYNC after scrambling and DBPSK: 128 +/-1 symbols.
const std::vector<int>& sync_symbols();

/// SYNC chips (128 x 11) at one sample per chip.
const std::vector<float>& sync_chips();

}  // namespace wlanips
