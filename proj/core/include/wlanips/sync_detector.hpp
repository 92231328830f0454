#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "wlanips/types.hpp"

namespace wlanips {

/// SYNC length at 22 MHz: 128 symbols x 22 samples.
inline constexpr std::size_t kSyncSamples = 128 * kSamplesPerSymbol;

/// Number of chip-spaced path lags combined when scoring a detection.
inline constexpr int kRakeFingers = 5;

struct DetectionResult {
  std::size_t sample_index = 0;  // SYNC start (earliest path), 22 MHz samples
  double peak_ratio = 0.0;       // near 1.0 for a clean SYNC
  std::size_t peak_index = 0;    // strongest path
  double peak_magnitude = 0.0;   // |correlation| at peak_index
  std::complex<double> peak_value{};
};

/// Accepts either 0..1 or the 0..1000 front-panel scale (850 -> 0.85).
double normalize_threshold(double threshold);

/// FFT-based SYNC correlator. Each symbol-length Barker matched-filter output
/// is multiplied by the conjugate of the one before it, which cancels carrier
/// phase and any offset up to a few tens of kHz. The known SYNC differential
/// pattern is then correlated against that sequence with one circular FFT
/// correlation per window. The score is |correlation| over the sum of
/// magnitudes, so a clean SYNC scores 1 and noise scores about 1/sqrt(127).
///
/// Holds FFT buffers; one instance per stream.
class SyncDetector {
 public:
  SyncDetector();
  ~SyncDetector();
  SyncDetector(const SyncDetector&) = delete;
  SyncDetector& operator=(const SyncDetector&) = delete;
  SyncDetector(SyncDetector&&) noexcept;
  SyncDetector& operator=(SyncDetector&&) noexcept;

  /// Searches SYNC starts in [0, search_limit) of `window` (22 MHz). The
  /// window must extend one SYNC beyond the last candidate; shorter windows
  /// just shrink the search range. Returns none below `threshold`.
  std::optional<DetectionResult> detect(std::span<const cf32> window, double threshold,
                                        std::size_t search_limit = static_cast<std::size_t>(-1));

  /// Raw correlation |P[n]| and score for diagnostics and tests, one entry per
  /// candidate start.
  void metrics(std::span<const cf32> window, std::vector<double>& magnitude,
               std::vector<double>& ratio);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot detection over a whole window.
std::optional<DetectionResult> detect_sync(std::span<const cf32> window, double threshold);
std::optional<DetectionResult> detect_sync(const IqStream& window, double threshold);

}  // namespace wlanips
