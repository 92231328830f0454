#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "wlanips/types.hpp"

// Octets travel LSB first on the air; these helpers keep that convention in
// one place.
namespace wlanips::bits {

Bits from_bytes(std::span<const std::uint8_t> bytes);

/// Packs bits (LSB first) into bytes. A trailing partial octet is dropped.
Bytes to_bytes(std::span<const std::uint8_t> bits);

void append_uint(Bits& out, std::uint64_t value, int width);

std::uint64_t read_uint(std::span<const std::uint8_t> bits, std::size_t offset, int width);

/// Index of the first occurrence of `pattern` in `bits` starting in
/// [from, until], or -1.
std::ptrdiff_t find(std::span<const std::uint8_t> bits,
                    std::span<const std::uint8_t> pattern,
                    std::size_t from = 0,
                    std::size_t until = static_cast<std::size_t>(-1));

}  // namespace wlanips::bits
