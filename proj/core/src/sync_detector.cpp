#include "wlanips/sync_detector.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "wlanips/dsss_modem.hpp"

namespace wlanips {

namespace {

constexpr std::size_t kSym = kSamplesPerSymbol;
constexpr std::size_t kTerms = 127;                  // differential products in SYNC
constexpr std::size_t kRefSpan = (kTerms - 1) * kSym;  // last reference tap
constexpr std::size_t kMatchedSpan = kSym - 1;          // y[n] needs x[n .. n+21]

// Plan creation in FFTW is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftwf_free(p); }
};
using FftBuffer = std::unique_ptr<fftwf_complex[], FftwFree>;

FftBuffer make_buffer(std::size_t n) {
  auto* p = static_cast<fftwf_complex*>(fftwf_malloc(sizeof(fftwf_complex) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftBuffer(p);
}

}  // namespace

double normalize_threshold(double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
  if (threshold > 1.0) threshold /= 1000.0;
  if (threshold > 1.0) throw std::invalid_argument("threshold above 1000 on the front-panel scale");
  return threshold;
}

struct SyncDetector::Impl {
  struct Plan {
    std::size_t size = 0;
    FftBuffer time;
    FftBuffer freq;
    FftBuffer ref;  // conj(FFT(reference)) / size
    fftwf_plan forward = nullptr;
    fftwf_plan inverse = nullptr;
  };

  std::map<std::size_t, Plan> plans;
  std::vector<cf32> pair;
  std::vector<cf32> matched;
  std::vector<cf32> diff;
  std::vector<float> corr_mag;
  std::vector<cf32> corr;
  std::vector<double> suffix;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    for (auto& [n, p] : plans) {
      fftwf_destroy_plan(p.forward);
      fftwf_destroy_plan(p.inverse);
    }
  }

  Plan& plan_for(std::size_t n) {
    auto it = plans.find(n);
    if (it != plans.end()) return it->second;
    Plan p;
    p.size = n;
    p.time = make_buffer(n);
    p.freq = make_buffer(n);
    p.ref = make_buffer(n);
    {
      std::lock_guard lock(planner_mutex());
      p.forward = fftwf_plan_dft_1d(static_cast<int>(n), p.time.get(), p.freq.get(), FFTW_FORWARD,
                                    FFTW_ESTIMATE);
      p.inverse = fftwf_plan_dft_1d(static_cast<int>(n), p.freq.get(), p.time.get(), FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
    }
    // Reference: q_k = s_k s_{k-1} placed every symbol.
    const auto& s = sync_symbols();
    std::fill_n(reinterpret_cast<float*>(p.time.get()), 2 * n, 0.0F);
    for (std::size_t k = 0; k < kTerms; ++k) {
      p.time[k * kSym][0] = static_cast<float>(s[k + 1] * s[k]);
    }
    fftwf_execute(p.forward);
    const float inv = 1.0F / static_cast<float>(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.ref[i][0] = p.freq[i][0] * inv;
      p.ref[i][1] = -p.freq[i][1] * inv;
    }
    return plans.emplace(n, std::move(p)).first->second;
  }

  // Fills corr (P[n]) and suffix sums of |u|; returns the number of valid
  // candidate starts.
  std::size_t correlate(std::span<const cf32> x) {
    if (x.size() < kMatchedSpan + 1 + kSym + kRefSpan + 1) return 0;
    // Chip-pair sums, then the Barker matched filter over one symbol.
    const std::size_t n_pair = x.size() - 1;
    pair.resize(n_pair);
    for (std::size_t n = 0; n < n_pair; ++n) pair[n] = x[n] + x[n + 1];
    const std::size_t n_y = x.size() - kMatchedSpan;
    matched.resize(n_y);
    for (std::size_t n = 0; n < n_y; ++n) {
      const cf32* c = pair.data() + n;
      cf32 acc = c[0] - c[2] + c[4] + c[6] - c[8] + c[10] + c[12] + c[14] - c[16] - c[18] - c[20];
      matched[n] = acc * (1.0F / static_cast<float>(kSym));
    }
    const std::size_t n_u = n_y - kSym;
    diff.resize(n_u);
    for (std::size_t n = 0; n < n_u; ++n) diff[n] = std::conj(matched[n]) * matched[n + kSym];
    const std::size_t n_p = n_u - kRefSpan;

    // |u| sums over the 127 reference positions via per-residue suffix sums.
    suffix.assign(n_u + kSym, 0.0);
    for (std::size_t n = n_u; n-- > 0;) {
      const float m = std::sqrt(std::norm(diff[n]));
      suffix[n] = static_cast<double>(m) + suffix[n + kSym];
    }

    // Circular correlation; no wrap for n < n_p because the FFT covers n_u.
    Plan& p = plan_for(std::bit_ceil(n_u));
    std::fill_n(reinterpret_cast<float*>(p.time.get()), 2 * p.size, 0.0F);
    std::copy_n(reinterpret_cast<const float*>(diff.data()), 2 * n_u,
                reinterpret_cast<float*>(p.time.get()));
    fftwf_execute(p.forward);
    for (std::size_t i = 0; i < p.size; ++i) {
      const float a = p.freq[i][0];
      const float b = p.freq[i][1];
      p.freq[i][0] = a * p.ref[i][0] - b * p.ref[i][1];
      p.freq[i][1] = a * p.ref[i][1] + b * p.ref[i][0];
    }
    fftwf_execute(p.inverse);
    corr.resize(n_p);
    corr_mag.resize(n_p);
    for (std::size_t n = 0; n < n_p; ++n) {
      corr[n] = cf32(p.time[n][0], p.time[n][1]);
      corr_mag[n] = std::sqrt(std::norm(corr[n]));
    }
    return n_p;
  }

  [[nodiscard]] double denominator(std::size_t n) const {
    return suffix[n] - suffix[n + kTerms * kSym];
  }
};

SyncDetector::SyncDetector() : impl_(std::make_unique<Impl>()) {}
SyncDetector::~SyncDetector() = default;
SyncDetector::SyncDetector(SyncDetector&&) noexcept = default;
SyncDetector& SyncDetector::operator=(SyncDetector&&) noexcept = default;

std::optional<DetectionResult> SyncDetector::detect(std::span<const cf32> window, double threshold,
                                                    std::size_t search_limit) {
  threshold = normalize_threshold(threshold);
  const std::size_t n_p = impl_->correlate(window);
  if (n_p == 0) return std::nullopt;
  const auto& mag = impl_->corr_mag;

  // Look a little past the limit so a strong late path still anchors a
  // packet whose earliest path sits just inside it.
  constexpr std::size_t kLookahead = 2 * kSamplesPerChip * (kRakeFingers - 1);
  const std::size_t limit = std::min(n_p, search_limit == static_cast<std::size_t>(-1)
                                              ? n_p
                                              : search_limit + kLookahead);
  if (limit == 0) return std::nullopt;
  const auto peak_it = std::max_element(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(limit));
  const auto peak = static_cast<std::size_t>(peak_it - mag.begin());
  const double peak_mag = *peak_it;
  if (!(peak_mag > 0.0)) return std::nullopt;

  // Earliest same-parity path within the finger span carrying >= 10 % of the peak.
  std::size_t start = peak;
  for (int d = 1; d < kRakeFingers; ++d) {
    const auto back = static_cast<std::size_t>(d * kSamplesPerChip);
    if (back > peak) break;
    if (mag[peak - back] >= 0.1 * peak_mag) start = peak - back;
  }
  if (search_limit != static_cast<std::size_t>(-1) && start >= search_limit) return std::nullopt;

  double num = 0.0;
  double den = 0.0;
  for (int d = 0; d < kRakeFingers; ++d) {
    const std::size_t n = start + static_cast<std::size_t>(d * kSamplesPerChip);
    if (n >= n_p) break;
    num += mag[n];
    den += impl_->denominator(n);
  }
  const double ratio = den > 0.0 ? std::min(1.0, num / den) : 0.0;
  if (ratio < threshold) return std::nullopt;

  DetectionResult r;
  r.sample_index = start;
  r.peak_ratio = ratio;
  r.peak_index = peak;
  r.peak_magnitude = peak_mag;
  r.peak_value = impl_->corr[peak];
  return r;
}

void SyncDetector::metrics(std::span<const cf32> window, std::vector<double>& magnitude,
                           std::vector<double>& ratio) {
  const std::size_t n_p = impl_->correlate(window);
  magnitude.resize(n_p);
  ratio.resize(n_p);
  for (std::size_t n = 0; n < n_p; ++n) {
    magnitude[n] = impl_->corr_mag[n];
    const double den = impl_->denominator(n);
    ratio[n] = den > 0.0 ? magnitude[n] / den : 0.0;
  }
}

std::optional<DetectionResult> detect_sync(std::span<const cf32> window, double threshold) {
  SyncDetector det;
  return det.detect(window, threshold);
}

std::optional<DetectionResult> detect_sync(const IqStream& window, double threshold) {
  if (window.sample_rate != 0.0 && window.sample_rate != kProcessingRateHz) {
    throw std::invalid_argument("detect_sync expects a 22 MHz stream");
  }
  return detect_sync(std::span<const cf32>(window.samples), threshold);
}

}  // namespace wlanips
