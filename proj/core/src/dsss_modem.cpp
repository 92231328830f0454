#include "wlanips/dsss_modem.hpp"

#include <stdexcept>

#include "wlanips/phy_frames.hpp"
#include "wlanips/resampler.hpp"

namespace wlanips {

std::vector<int> dbpsk_encode(std::span<const std::uint8_t> bits, int initial_phase) {
  std::vector<int> symbols;
  symbols.reserve(bits.size());
  int phase = initial_phase >= 0 ? 1 : -1;
  for (std::uint8_t b : bits) {
    if (b & 1U) phase = -phase;
    symbols.push_back(phase);
  }
  return symbols;
}

ChipSequence barker_spread(std::span<const std::uint8_t> bits, int initial_phase) {
  ChipSequence seq;
  seq.chips.reserve(bits.size() * kChipsPerSymbol);
  for (int s : dbpsk_encode(bits, initial_phase)) {
    for (int c : kBarker) seq.chips.push_back(static_cast<float>(s * c));
  }
  return seq;
}

ChipSequence oversample(const ChipSequence& seq, int factor) {
  if (factor < 1) throw std::invalid_argument("oversample factor must be >= 1");
  ChipSequence out;
  out.oversample_factor = seq.oversample_factor * factor;
  out.chips.reserve(seq.chips.size() * static_cast<std::size_t>(factor));
  for (float c : seq.chips) out.chips.insert(out.chips.end(), static_cast<std::size_t>(factor), c);
  return out;
}

std::vector<cf32> barker_despread(std::span<const cf32> chips, std::size_t chip_offset) {
  std::vector<cf32> symbols;
  if (chip_offset >= chips.size()) return symbols;
  const std::size_t n = (chips.size() - chip_offset) / kChipsPerSymbol;
  symbols.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const cf32* p = chips.data() + chip_offset + s * kChipsPerSymbol;
    cf32 acc{};
    for (int k = 0; k < kChipsPerSymbol; ++k) acc += p[k] * static_cast<float>(kBarker[k]);
    symbols.push_back(acc / static_cast<float>(kChipsPerSymbol));
  }
  return symbols;
}

std::vector<cf32> barker_despread(const ChipSequence& seq, std::size_t chip_offset) {
  std::vector<cf32> chips;
  const auto os = static_cast<std::size_t>(seq.oversample_factor);
  chips.reserve(seq.chips.size() / os);
  for (std::size_t i = 0; i + os <= seq.chips.size(); i += os) {
    float acc = 0.0F;
    for (std::size_t j = 0; j < os; ++j) acc += seq.chips[i + j];
    chips.emplace_back(acc / static_cast<float>(os), 0.0F);
  }
  return barker_despread(chips, chip_offset);
}

Bits dbpsk_demod(std::span<const cf32> symbols) {
  if (symbols.size() < 2) throw std::invalid_argument("dbpsk_demod needs at least two symbols");
  Bits bits;
  bits.reserve(symbols.size() - 1);
  for (std::size_t k = 1; k < symbols.size(); ++k) {
    const float d = (symbols[k] * std::conj(symbols[k - 1])).real();
    bits.push_back(d < 0.0F ? 1 : 0);
  }
  return bits;
}

int barker_autocorrelation(int lag) {
  if (lag < 0) lag = -lag;
  int acc = 0;
  for (int k = 0; k + lag < kChipsPerSymbol; ++k) acc += kBarker[k] * kBarker[k + lag];
  return acc;
}

std::vector<cf32> chip_samples(std::span<const cf32> samples, std::size_t offset,
                               std::size_t chip_count, int samples_per_chip) {
  const auto spc = static_cast<std::size_t>(samples_per_chip);
  std::vector<cf32> out;
  if (offset >= samples.size()) return out;
  chip_count = std::min(chip_count, (samples.size() - offset) / spc);
  out.resize(chip_count);
  const float scale = 1.0F / static_cast<float>(spc);
  for (std::size_t k = 0; k < chip_count; ++k) {
    cf32 acc{};
    for (std::size_t j = 0; j < spc; ++j) acc += samples[offset + k * spc + j];
    out[k] = acc * scale;
  }
  return out;
}

IqStream tx_waveform(std::span<const std::uint8_t> frame_bits, double sample_rate, std::uint8_t seed) {
  if (sample_rate != kProcessingRateHz && sample_rate != kCaptureRateHz) {
    throw std::invalid_argument("tx_waveform supports 22 MHz or 25 MHz output");
  }
  const Bits scrambled = scramble(frame_bits, seed);
  const ChipSequence chips = oversample(barker_spread(scrambled), kSamplesPerChip);
  IqStream out;
  out.sample_rate = kProcessingRateHz;
  out.samples.reserve(chips.chips.size());
  for (float c : chips.chips) out.samples.emplace_back(c, 0.0F);
  if (sample_rate == kCaptureRateHz) out = resample(out, kCaptureRateHz);
  return out;
}

const std::vector<int>& sync_symbols() {
  static const std::vector<int> symbols = [] {
    const Bits ones(kSyncBits, 1);
    return dbpsk_encode(scramble(ones, kLongPreambleSeed));
  }();
  return symbols;
}

const std::vector<float>& sync_chips() {
  static const std::vector<float> chips = [] {
    std::vector<float> out;
    out.reserve(kSyncBits * kChipsPerSymbol);
    for (int s : sync_symbols()) {
      for (int c : kBarker) out.push_back(static_cast<float>(s * c));
    }
    return out;
  }();
  return chips;
}

}  // namespace wlanips
