#pragma once

#include <cstdint>
#include <span>

#include "wlanips/types.hpp"

namespace wlanips {

/// Initial register for the long preamble, [1101100] from z1 to z7. Bit i of a
/// seed holds z(i+1).
inline constexpr std::uint8_t kLongPreambleSeed = 0x1B;

/// Self-synchronizing scrambler with feedback polynomial z^-7 + z^-4 + 1.
/// Throws std::invalid_argument for a zero or wider-than-7-bit seed.
Bits scramble(std::span<const std::uint8_t> bits, std::uint8_t seed = kLongPreambleSeed);

/// Inverse of scramble() when given the same seed.
Bits descramble(std::span<const std::uint8_t> bits, std::uint8_t seed = kLongPreambleSeed);

/// Descrambles without a seed: the first 7 input bits load the register and
/// produce no output, so the result is 7 bits shorter than the input.
Bits descramble_self_sync(std::span<const std::uint8_t> bits);

}  // namespace wlanips
