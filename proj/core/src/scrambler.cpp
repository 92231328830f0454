#include "wlanips/scrambler.hpp"

#include <stdexcept>

namespace wlanips {

namespace {

// Register bit i holds delay element z(i+1); taps at z4 and z7.
inline unsigned taps(unsigned reg) { return ((reg >> 3) ^ (reg >> 6)) & 1U; }
inline unsigned shift_in(unsigned reg, unsigned bit) { return ((reg << 1) | bit) & 0x7FU; }

void check_seed(std::uint8_t seed) {
  if (seed == 0 || seed > 0x7F) {
    throw std::invalid_argument("scrambler seed must be a nonzero 7-bit value");
  }
}

Bits descramble_from(std::span<const std::uint8_t> bits, unsigned reg) {
  Bits out;
  out.reserve(bits.size());
  for (std::uint8_t b : bits) {
    const unsigned in = b & 1U;
    out.push_back(static_cast<std::uint8_t>(in ^ taps(reg)));
    reg = shift_in(reg, in);
  }
  return out;
}

}  // namespace

Bits scramble(std::span<const std::uint8_t> bits, std::uint8_t seed) {
  check_seed(seed);
  unsigned reg = seed;
  Bits out;
  out.reserve(bits.size());
  for (std::uint8_t b : bits) {
    const unsigned s = (b & 1U) ^ taps(reg);
    out.push_back(static_cast<std::uint8_t>(s));
    reg = shift_in(reg, s);
  }
  return out;
}

Bits descramble(std::span<const std::uint8_t> bits, std::uint8_t seed) {
  check_seed(seed);
  return descramble_from(bits, seed);
}

Bits descramble_self_sync(std::span<const std::uint8_t> bits) {
  if (bits.size() <= 7) return {};
  unsigned reg = 0;
  for (std::size_t i = 0; i < 7; ++i) reg = shift_in(reg, bits[i] & 1U);
  return descramble_from(bits.subspan(7), reg);
}

}  // namespace wlanips
