#include "wlanips/carrier.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "phasor.hpp"
#include "wlanips/dsss_modem.hpp"

namespace wlanips {

double cfo_range_hz(int lags) { return kChipRateHz / (2.0 * (lags + 1)); }

CfoEstimate luise_reggiannini(std::span<const cf32> chips, std::span<const float> reference,
                              int lags, double chip_rate) {
  if (lags < 1) throw std::invalid_argument("CFO lag count must be >= 1");
  const std::size_t n = std::min(chips.size(), reference.size());
  CfoEstimate est;
  if (n < 2) return est;
  const auto m_max = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(lags), n - 1));

  std::vector<cf64> z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = cf64(chips[k]) * static_cast<double>(reference[k]);

  cf64 sum{};
  for (std::size_t m = 1; m <= m_max; ++m) {
    cf64 r{};
    for (std::size_t k = m; k < n; ++k) r += z[k] * std::conj(z[k - m]);
    sum += r / static_cast<double>(n - m);
  }
  est.magnitude = std::abs(sum);
  if (!(est.magnitude > 1e-20)) return est;
  est.hz = std::arg(sum) * chip_rate / (std::numbers::pi * static_cast<double>(m_max + 1));
  est.reliable = true;
  return est;
}

CfoEstimate coarse_cfo_estimate(std::span<const cf32> sync_samples, int lags) {
  const auto& ref = sync_chips();
  const std::vector<cf32> chips = chip_samples(sync_samples, 0, ref.size());
  return luise_reggiannini(chips, ref, lags);
}

CfoEstimate coarse_cfo_estimate(const IqStream& sync_samples, int lags) {
  if (sync_samples.sample_rate != kProcessingRateHz) {
    throw std::invalid_argument("coarse_cfo_estimate expects a 22 MHz stream");
  }
  return coarse_cfo_estimate(std::span<const cf32>(sync_samples.samples), lags);
}

namespace {

const std::array<float, kCarrierLutSize + 1>& quarter_sine() {
  static const auto table = [] {
    std::array<float, kCarrierLutSize + 1> t{};
    for (int i = 0; i <= kCarrierLutSize; ++i) {
      t[static_cast<std::size_t>(i)] =
          static_cast<float>(std::sin(std::numbers::pi / 2.0 * i / kCarrierLutSize));
    }
    return t;
  }();
  return table;
}

// cos + j sin of a 10-bit phase index (quadrant in the top two bits).
inline cf32 lut_carrier(std::uint32_t index) {
  const auto& q = quarter_sine();
  const std::uint32_t quadrant = (index >> 8) & 3U;
  const std::uint32_t i = index & 0xFFU;
  const float s = q[i];
  const float c = q[kCarrierLutSize - i];
  switch (quadrant) {
    case 0: return {c, s};
    case 1: return {-s, c};
    case 2: return {-c, -s};
    default: return {s, -c};
  }
}

}  // namespace

void carrier_wipeoff(std::span<cf32> x, double freq_hz, double sample_rate, WipeoffMode mode,
                     std::int64_t first_index) {
  if (freq_hz == 0.0 || x.empty()) return;
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  const double cycles = -freq_hz / sample_rate;  // cycles per sample
  if (mode == WipeoffMode::Exact) {
    detail::apply_phasor(x, 2.0 * std::numbers::pi * cycles, first_index);
    return;
  }
  constexpr double kTwo32 = 4294967296.0;
  const double frac = cycles - std::floor(cycles);
  const auto step = static_cast<std::uint32_t>(static_cast<std::uint64_t>(std::llround(frac * kTwo32)));
  // Start phase: first_index * step modulo 2^32 (wraps naturally).
  std::uint32_t acc = static_cast<std::uint32_t>(static_cast<std::uint64_t>(first_index)) * step;
  constexpr std::uint32_t kHalfStep = 1U << 21;  // round to the nearest 10-bit index
  for (auto& v : x) {
    v *= lut_carrier((acc + kHalfStep) >> 22);
    acc += step;
  }
}

IqStream carrier_wipeoff(const IqStream& stream, double freq_hz, WipeoffMode mode) {
  IqStream out = stream;
  carrier_wipeoff(out.samples, freq_hz, stream.sample_rate, mode);
  return out;
}

double reference_phase(std::span<const cf32> x, std::span<const float> reference) {
  cf64 acc{};
  const std::size_t n = std::min(x.size(), reference.size());
  for (std::size_t k = 0; k < n; ++k) acc += cf64(x[k]) * static_cast<double>(reference[k]);
  return std::arg(acc);
}

void phase_correct(std::span<cf32> x, std::span<const float> reference) {
  const double phi = reference_phase(x, reference);
  if (phi == 0.0) return;
  const cf32 rot(static_cast<float>(std::cos(-phi)), static_cast<float>(std::sin(-phi)));
  for (auto& v : x) v *= rot;
}

std::vector<cf32> phase_correct(std::span<const cf32> symbols, std::span<const float> reference) {
  std::vector<cf32> out(symbols.begin(), symbols.end());
  phase_correct(std::span<cf32>(out), reference);
  return out;
}

}  // namespace wlanips
