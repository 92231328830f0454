#include "wlanips/bits.hpp"

#include <stdexcept>

namespace wlanips::bits {

Bits from_bytes(std::span<const std::uint8_t> bytes) {
  Bits out;
  out.reserve(bytes.size() * 8);
  for (std::uint8_t byte : bytes) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((byte >> i) & 1U));
  }
  return out;
}

Bytes to_bytes(std::span<const std::uint8_t> bits) {
  Bytes out(bits.size() / 8, 0);
  for (std::size_t i = 0; i < out.size() * 8; ++i) {
    out[i / 8] |= static_cast<std::uint8_t>((bits[i] & 1U) << (i % 8));
  }
  return out;
}

void append_uint(Bits& out, std::uint64_t value, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>((value >> i) & 1U));
}

std::uint64_t read_uint(std::span<const std::uint8_t> bits, std::size_t offset, int width) {
  if (offset + static_cast<std::size_t>(width) > bits.size()) {
    throw std::out_of_range("bits::read_uint past end of sequence");
  }
  std::uint64_t value = 0;
  for (int i = 0; i < width; ++i) {
    value |= static_cast<std::uint64_t>(bits[offset + i] & 1U) << i;
  }
  return value;
}

std::ptrdiff_t find(std::span<const std::uint8_t> bits,
                    std::span<const std::uint8_t> pattern,
                    std::size_t from,
                    std::size_t until) {
  if (pattern.empty() || bits.size() < pattern.size()) return -1;
  const std::size_t last = std::min(until, bits.size() - pattern.size());
  for (std::size_t i = from; i <= last; ++i) {
    bool match = true;
    for (std::size_t j = 0; j < pattern.size() && match; ++j) match = bits[i + j] == pattern[j];
    if (match) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

}  // namespace wlanips::bits
