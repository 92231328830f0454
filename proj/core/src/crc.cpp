#include "wlanips/crc.hpp"

#include <array>

namespace wlanips {

namespace {

constexpr std::uint16_t kCcittPoly = 0x1021;

std::uint16_t crc16_step(std::uint16_t reg, unsigned bit) {
  const unsigned feedback = ((reg >> 15) & 1U) ^ (bit & 1U);
  reg = static_cast<std::uint16_t>(reg << 1);
  if (feedback) reg ^= kCcittPoly;
  return reg;
}

constexpr std::array<std::uint32_t, 256> make_crc32_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1U) ? 0xEDB88320U ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

constexpr auto kCrc32Table = make_crc32_table();

}  // namespace

std::uint16_t crc16_ccitt(std::span<const std::uint8_t> bytes) {
  std::uint16_t reg = 0xFFFF;
  for (std::uint8_t byte : bytes) {
    for (int i = 7; i >= 0; --i) reg = crc16_step(reg, (byte >> i) & 1U);
  }
  return static_cast<std::uint16_t>(~reg);
}

std::uint16_t crc16_ccitt_bits(std::span<const std::uint8_t> bits) {
  std::uint16_t reg = 0xFFFF;
  for (std::uint8_t bit : bits) reg = crc16_step(reg, bit);
  return static_cast<std::uint16_t>(~reg);
}

std::uint32_t crc32_fcs(std::span<const std::uint8_t> bytes) {
  std::uint32_t c = 0xFFFFFFFFU;
  for (std::uint8_t byte : bytes) c = kCrc32Table[(c ^ byte) & 0xFFU] ^ (c >> 8);
  return c ^ 0xFFFFFFFFU;
}

}  // namespace wlanips
