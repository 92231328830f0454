#include "wlanips/channel_estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wlanips {

const char* to_string(EqLevel level) { return level == EqLevel::Chip ? "chip" : "symbol"; }

EqLevel parse_eq_level(const std::string& text) {
  if (text == "chip") return EqLevel::Chip;
  if (text == "symbol") return EqLevel::Symbol;
  throw std::invalid_argument("equalization level must be chip or symbol, got '" + text + "'");
}

std::optional<std::vector<cf64>> solve_loaded_hermitian(std::vector<cf64> a, std::vector<cf64> b,
                                                        double loading) {
  const std::size_t n = b.size();
  if (n == 0 || a.size() != n * n) throw std::invalid_argument("normal matrix shape mismatch");
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += a[i * n + i].real();
  const double lambda = loading * trace / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] += lambda;

  // In-place lower factor: A = L L^H.
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j].real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(a[j * n + k]);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cf64 s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * std::conj(a[j * n + k]);
      a[i * n + j] = s / ljj;
    }
  }
  // L y = b, then L^H x = y.
  for (std::size_t i = 0; i < n; ++i) {
    cf64 s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i].real();
  }
  for (std::size_t i = n; i-- > 0;) {
    cf64 s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= std::conj(a[k * n + i]) * b[k];
    b[i] = s / a[i * n + i].real();
  }
  for (const auto& v : b) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return std::nullopt;
  }
  return b;
}

std::optional<std::vector<cf64>> ls_channel_fit(std::span<const cf32> received,
                                                std::span<const float> known, int n_taps) {
  if (n_taps < 1) throw std::invalid_argument("n_taps must be >= 1");
  const auto l = static_cast<std::size_t>(n_taps);
  const std::size_t n = std::min(received.size(), known.size());
  if (n < l) return std::nullopt;
  std::vector<cf64> a(l * l);
  std::vector<cf64> b(l);
  // A = S^H S, b = S^H r with S[k][d] = c_{k-d}; S is real.
  for (std::size_t k = l - 1; k < n; ++k) {
    const cf64 r = received[k];
    for (std::size_t i = 0; i < l; ++i) {
      const double ci = known[k - i];
      b[i] += ci * r;
      for (std::size_t j = 0; j <= i; ++j) a[i * l + j] += ci * known[k - j];
    }
  }
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j) a[i * l + j] = std::conj(a[j * l + i]);
  }
  return solve_loaded_hermitian(std::move(a), std::move(b));
}

std::optional<ChannelEstimate> estimate_channel(std::span<const cf32> received,
                                                std::span<const float> known, int n_taps,
                                                EqLevel level) {
  auto h = ls_channel_fit(received, known, n_taps);
  if (!h) return std::nullopt;
  const auto l = static_cast<std::size_t>(n_taps);
  const std::size_t n = std::min(received.size(), known.size());

  // R over regressors x_k = [r_k, r_{k-1}, ..., r_{k-L+1}].
  std::vector<cf64> r(l * l);
  for (std::size_t k = l - 1; k < n; ++k) {
    for (std::size_t i = 0; i < l; ++i) {
      const cf64 xi = received[k - i];
      for (std::size_t j = 0; j <= i; ++j) r[i * l + j] += xi * std::conj(cf64(received[k - j]));
    }
  }
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j) r[i * l + j] = std::conj(r[j * l + i]);
  }

  ChannelEstimate best;
  best.taps = std::move(*h);
  best.level = level;
  best.mse = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t delay = 0; delay < l; ++delay) {
    std::vector<cf64> p(l);
    double ref_energy = 0.0;
    std::size_t count = 0;
    for (std::size_t k = l - 1; k < n; ++k) {
      const double c = known[k - delay];
      ref_energy += c * c;
      ++count;
      for (std::size_t i = 0; i < l; ++i) p[i] += cf64(received[k - i]) * c;
    }
    auto w = solve_loaded_hermitian(r, p);
    if (!w) continue;
    cf64 pw{};
    for (std::size_t i = 0; i < l; ++i) pw += std::conj(p[i]) * (*w)[i];
    const double mse = (ref_energy - pw.real()) / static_cast<double>(count);
    if (mse < best.mse) {
      best.mse = mse;
      best.equalizer = std::move(*w);
      best.delay = static_cast<int>(delay);
      found = true;
    }
  }
  if (!found) return std::nullopt;
  return best;
}

std::vector<cf32> equalize(std::span<const cf32> received, const ChannelEstimate& est) {
  const std::size_t n = received.size();
  std::vector<cf32> out(n);
  std::vector<cf32> w(est.equalizer.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = static_cast<cf32>(std::conj(est.equalizer[j]));
  const auto delay = static_cast<std::ptrdiff_t>(est.delay);
  for (std::size_t k = 0; k < n; ++k) {
    cf32 acc{};
    for (std::size_t j = 0; j < w.size(); ++j) {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(k) + delay - static_cast<std::ptrdiff_t>(j);
      if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(n)) acc += w[j] * received[static_cast<std::size_t>(idx)];
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace wlanips
