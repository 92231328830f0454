#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wlanips/types.hpp"

namespace wlanips {

/// Default Luise-Reggiannini lag count over the chip-rate SYNC.
inline constexpr int kDefaultCfoLags = 16;

struct CfoEstimate {
  double hz = 0.0;
  bool reliable = false;  // false for degenerate (all-zero) input
  double magnitude = 0.0;  // |sum of R(m)|, a rough confidence
};

/// Largest offset the estimator can represent for `lags`: 1 / (2 (M+1) T_chip).
double cfo_range_hz(int lags);

/// Luise-Reggiannini estimator over modulation-stripped chips z_k = r_k c_k:
/// f = arg(sum_{m=1..M} R(m)) / (pi (M+1) T), R(m) the lag-m mean of
/// z_{k+m} conj(z_k). `chips` and `reference` are one value per chip.
CfoEstimate luise_reggiannini(std::span<const cf32> chips, std::span<const float> reference,
                              int lags = kDefaultCfoLags, double chip_rate = kChipRateHz);

/// Coarse CFO from 22 MHz samples whose first sample is the SYNC start.
/// Needs the whole SYNC; shorter input uses what is there.
CfoEstimate coarse_cfo_estimate(std::span<const cf32> sync_samples, int lags = kDefaultCfoLags);
CfoEstimate coarse_cfo_estimate(const IqStream& sync_samples, int lags = kDefaultCfoLags);

enum class WipeoffMode { Exact, QuantizedLut };

/// Quarter-wave sine table size and the phase step it resolves (2 pi / 1024).
inline constexpr int kCarrierLutSize = 256;
inline constexpr double kCarrierLutStep = 6.283185307179586 / (4 * kCarrierLutSize);

/// x[n] *= exp(-j 2 pi f (n + first_index) / fs). The LUT mode drives a 32-bit
/// phase accumulator into a quarter-wave table; phase error is at most half
/// a table step.
void carrier_wipeoff(std::span<cf32> x, double freq_hz, double sample_rate, WipeoffMode mode,
                     std::int64_t first_index = 0);
IqStream carrier_wipeoff(const IqStream& stream, double freq_hz, WipeoffMode mode);

/// Angle of sum(x_k r_k); the constant phase a known real reference sees.
double reference_phase(std::span<const cf32> x, std::span<const float> reference);

/// Rotates every element by -reference_phase(x[0 .. reference.size()), reference).
void phase_correct(std::span<cf32> x, std::span<const float> reference);
std::vector<cf32> phase_correct(std::span<const cf32> symbols, std::span<const float> reference);

}  // namespace wlanips
