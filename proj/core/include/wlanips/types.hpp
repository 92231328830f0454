#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace wlanips {

using cf32 = std::complex<float>;
using cf64 = std::complex<double>;

/// One bit per element, values 0 or 1.
using Bits = std::vector<std::uint8_t>;
using Bytes = std::vector<std::uint8_t>;

/// Complex baseband samples tagged with their sample rate.
struct IqStream {
  std::vector<cf32> samples;
  double sample_rate = 0.0;

  [[nodiscard]] double duration_s() const {
    return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

inline constexpr double kChipRateHz = 11e6;
inline constexpr double kSymbolRateHz = 1e6;
inline constexpr double kProcessingRateHz = 22e6;  // 2 samples per chip
inline constexpr double kCaptureRateHz = 25e6;
inline constexpr int kSamplesPerChip = 2;
inline constexpr int kChipsPerSymbol = 11;
inline constexpr int kSamplesPerSymbol = kSamplesPerChip * kChipsPerSymbol;

}  // namespace wlanips
