#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>

namespace wlanips::detail {

// x[n] *= exp(j w (first_index + n)). The phasor advances by a recursive
// multiply and is re-anchored with an exact cos/sin every kAnchor samples,
// which keeps the drift far below float resolution.
inline void apply_phasor(std::span<std::complex<float>> x, double w, std::int64_t first_index) {
  constexpr std::size_t kAnchor = 256;
  const std::complex<double> step(std::cos(w), std::sin(w));
  for (std::size_t base = 0; base < x.size(); base += kAnchor) {
    const double ph = w * static_cast<double>(first_index + static_cast<std::int64_t>(base));
    std::complex<double> z(std::cos(ph), std::sin(ph));
    const std::size_t end = std::min(x.size(), base + kAnchor);
    for (std::size_t n = base; n < end; ++n) {
      const double re = x[n].real();
      const double im = x[n].imag();
      x[n] = std::complex<float>(static_cast<float>(re * z.real() - im * z.imag()),
                                 static_cast<float>(re * z.imag() + im * z.real()));
      z = std::complex<double>(z.real() * step.real() - z.imag() * step.imag(),
                               z.real() * step.imag() + z.imag() * step.real());
    }
  }
}

}  // namespace wlanips::detail
