#include "wlanips/resampler.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace wlanips {

namespace {

std::vector<float> kaiser_lowpass(std::size_t length, double cutoff_cycles, double beta) {
  std::vector<double> h(length);
  const double mid = (static_cast<double>(length) - 1.0) / 2.0;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  double sum = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) - mid;
    const double x = 2.0 * cutoff_cycles * t;
    const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double r = mid > 0.0 ? t / mid : 0.0;
    const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[n] = 2.0 * cutoff_cycles * sinc * w;
    sum += h[n];
  }
  std::vector<float> out(length);
  for (std::size_t n = 0; n < length; ++n) out[n] = static_cast<float>(h[n] / sum);
  return out;
}

}  // namespace

RationalResampler::RationalResampler(int up, int down, int taps_per_phase, double cutoff_fraction,
                                     double kaiser_beta)
    : up_(up), down_(down), taps_(taps_per_phase) {
  if (up < 1 || down < 1 || taps_per_phase < 1) {
    throw std::invalid_argument("resampler factors and tap count must be positive");
  }
  const int g = std::gcd(up, down);
  up_ /= g;
  down_ /= g;
  padded_ = (taps_ + 3) / 4 * 4;

  const double cutoff = cutoff_fraction / (2.0 * std::max(up_, down_));
  prototype_ = kaiser_lowpass(static_cast<std::size_t>(taps_) * up_, cutoff, kaiser_beta);

  branches_.assign(static_cast<std::size_t>(up_) * 2 * padded_, 0.0F);
  for (int p = 0; p < up_; ++p) {
    float* branch = branches_.data() + static_cast<std::size_t>(p) * 2 * padded_;
    for (int t = 0; t < taps_; ++t) {
      const float c = static_cast<float>(up_) * prototype_[static_cast<std::size_t>(p + t * up_)];
      const int u = padded_ - 1 - t;  // oldest sample first
      branch[2 * u] = c;
      branch[2 * u + 1] = c;
    }
  }
  reset();
}

void RationalResampler::reset() {
  work_.assign(static_cast<std::size_t>(padded_ - 1), cf32{});
  in_count_ = 0;
  out_count_ = 0;
}

double RationalResampler::group_delay() const {
  return (static_cast<double>(prototype_.size()) - 1.0) / 2.0 / up_;
}

void RationalResampler::process(std::span<const cf32> in, std::vector<cf32>& out) {
  // work_ holds the last padded_-1 inputs (zeros before the stream starts)
  // followed by the new block.
  const auto hist = static_cast<std::size_t>(padded_ - 1);
  work_.insert(work_.end(), in.begin(), in.end());
  in_count_ += in.size();
  const auto origin = static_cast<std::int64_t>(in_count_) - static_cast<std::int64_t>(work_.size());
  const auto* data = reinterpret_cast<const float*>(work_.data());
  const auto up = static_cast<std::uint64_t>(up_);
  while (true) {
    const std::uint64_t pos = out_count_ * static_cast<std::uint64_t>(down_);
    const std::uint64_t j = pos / up;
    if (j >= in_count_) break;
    const auto phase = static_cast<std::size_t>(pos % up);
    const std::int64_t first = static_cast<std::int64_t>(j) - (padded_ - 1);
    const float* x = data + 2 * static_cast<std::size_t>(first - origin);
    const float* h = branches_.data() + phase * 2 * static_cast<std::size_t>(padded_);
    float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    for (int i = 0; i < 2 * padded_; i += 8) {
      for (int l = 0; l < 8; ++l) acc[l] += h[i + l] * x[i + l];
    }
    out.emplace_back(acc[0] + acc[2] + acc[4] + acc[6], acc[1] + acc[3] + acc[5] + acc[7]);
    ++out_count_;
  }
  work_.erase(work_.begin(), work_.end() - static_cast<std::ptrdiff_t>(hist));
}

std::vector<cf32> RationalResampler::process(std::span<const cf32> in) {
  std::vector<cf32> out;
  out.reserve(in.size() * static_cast<std::size_t>(up_) / static_cast<std::size_t>(down_) + 2);
  process(in, out);
  return out;
}

IqStream resample(const IqStream& in, double out_rate) {
  const auto rin = static_cast<long long>(std::llround(in.sample_rate));
  const auto rout = static_cast<long long>(std::llround(out_rate));
  if (rin <= 0 || rout <= 0) throw std::invalid_argument("resample needs positive rates");
  if (rin == rout) return in;
  const long long g = std::gcd(rin, rout);
  RationalResampler rs(static_cast<int>(rout / g), static_cast<int>(rin / g));
  IqStream out;
  out.sample_rate = out_rate;
  out.samples = rs.process(in.samples);
  return out;
}

IqStream resample_25_to_22(const IqStream& in) {
  if (in.sample_rate != kCaptureRateHz) {
    throw std::invalid_argument("resample_25_to_22 expects a 25 MHz stream");
  }
  return resample(in, kProcessingRateHz);
}

}  // namespace wlanips
