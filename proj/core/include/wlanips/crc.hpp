#pragma once

#include <cstdint>
#include <span>

namespace wlanips {

/// CRC-16 with the CCITT polynomial x^16 + x^12 + x^5 + 1, register preset to
/// all ones, ones-complement output. Bytes are fed MSB first.
std::uint16_t crc16_ccitt(std::span<const std::uint8_t> bytes);

/// Same CRC over a bit sequence in transmit order. This is the PLCP header
/// check: the result's x^15 coefficient is the MSB and goes on air first.
std::uint16_t crc16_ccitt_bits(std::span<const std::uint8_t> bits);

/// IEEE 802.3 CRC-32 (reflected 0x04C11DB7, init and final XOR 0xFFFFFFFF),
/// which is also the 802.11 frame check sequence.
std::uint32_t crc32_fcs(std::span<const std::uint8_t> bytes);

}  // namespace wlanips
