#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "wlanips/types.hpp"

namespace wlanips {

struct MacAddress {
  std::array<std::uint8_t, 6> octets{};

  /// Accepts "A4-2B-8C-04-E8-9D" or colon-separated hex. Throws
  /// std::invalid_argument on anything else.
  static MacAddress parse(std::string_view text);
  static MacAddress broadcast();

  /// Upper-case, hyphen separated, as the receiver logs it.
  [[nodiscard]] std::string to_string() const;

  auto operator<=>(const MacAddress&) const = default;
};

/// 802.11 time unit: exactly 1024 microseconds.
struct TimeUnit {
  std::int64_t tu_count = 0;

  [[nodiscard]] constexpr std::int64_t microseconds() const { return 1024 * tu_count; }
  [[nodiscard]] constexpr double seconds() const { return static_cast<double>(microseconds()) * 1e-6; }
};

// PPDU layout, long preamble, everything at 1 Mbps DBPSK.
inline constexpr std::size_t kSyncBits = 128;
inline constexpr std::size_t kSfdBits = 16;
inline constexpr std::size_t kPlcpHeaderBits = 48;
inline constexpr std::size_t kPreambleBits = kSyncBits + kSfdBits;
inline constexpr std::size_t kPlcpBits = kPreambleBits + kPlcpHeaderBits;  // 192 us
inline constexpr std::uint16_t kSfd = 0xF3A0;
inline constexpr std::uint8_t kSignal1Mbps = 0x0A;
inline constexpr std::size_t kMaxSsidBytes = 32;

struct PlcpHeader {
  std::uint8_t signal = kSignal1Mbps;
  std::uint8_t service = 0;
  std::uint16_t length_us = 0;
  std::uint16_t crc16 = 0;

  bool operator==(const PlcpHeader&) const = default;
};

struct PlcpHeaderParse {
  PlcpHeader header;
  bool crc_ok = false;
};

/// Frame-control helpers. Type and subtype sit in the first octet.
inline constexpr std::uint16_t make_frame_control(unsigned type, unsigned subtype) {
  return static_cast<std::uint16_t>(((subtype & 0xFU) << 4) | ((type & 0x3U) << 2));
}
inline constexpr unsigned frame_type(std::uint16_t fc) { return (fc >> 2) & 0x3U; }
inline constexpr unsigned frame_subtype(std::uint16_t fc) { return (fc >> 4) & 0xFU; }
inline constexpr std::uint16_t kBeaconFrameControl = make_frame_control(0, 8);

/// Inputs for building a beacon.
struct BeaconSpec {
  std::string ssid;
  MacAddress bssid;
  std::uint16_t sequence = 0;  // 12-bit sequence number
  std::uint64_t timestamp_us = 0;
  std::uint16_t interval_tu = 100;
  std::uint16_t capability = 0x0001;  // ESS
  std::optional<std::uint8_t> channel = 1;  // DS Parameter Set element, omitted when empty
};

struct BeaconMpdu {
  std::uint16_t frame_control = kBeaconFrameControl;
  std::uint16_t duration = 0;
  MacAddress da;
  MacAddress sa;
  MacAddress bssid;
  std::uint16_t seq_ctrl = 0;
  std::uint64_t timestamp_us = 0;
  std::uint16_t beacon_interval_tu = 0;
  std::uint16_t capability = 0;
  std::string ssid;
  std::optional<std::uint8_t> ds_channel;
  std::uint32_t fcs = 0;

  [[nodiscard]] std::uint16_t sequence() const { return static_cast<std::uint16_t>(seq_ctrl >> 4); }
  [[nodiscard]] TimeUnit interval() const { return TimeUnit{beacon_interval_tu}; }

  bool operator==(const BeaconMpdu&) const = default;
};

enum class MpduStatus { Ok, FcsMismatch, NotABeacon, TruncatedFrame };

const char* to_string(MpduStatus status);

struct MpduParse {
  MpduStatus status = MpduStatus::TruncatedFrame;
  std::optional<BeaconMpdu> beacon;
  std::uint16_t frame_control = 0;  // valid whenever the FCS passed
};

/// SYNC (128 ones) followed by the SFD, before scrambling.
Bits build_plcp_preamble();

/// SIGNAL, SERVICE, LENGTH and the CRC-16 over them, before scrambling.
Bits build_plcp_header(std::uint16_t length_us,
                       std::uint8_t signal = kSignal1Mbps,
                       std::uint8_t service = 0);

/// Parses 48 header bits; crc_ok reports the CRC-16 check.
PlcpHeaderParse parse_plcp_header(std::span<const std::uint8_t> bits);

/// MAC header + body + FCS for an arbitrary frame-control value.
Bytes build_mpdu(std::uint16_t frame_control,
                 const MacAddress& da,
                 const MacAddress& sa,
                 const MacAddress& bssid,
                 std::uint16_t sequence,
                 std::span<const std::uint8_t> body);

/// Beacon MPDU bytes including FCS. Throws std::invalid_argument if the SSID
/// exceeds 32 bytes.
Bytes build_beacon_mpdu(const BeaconSpec& spec);

/// Full PPDU bits (preamble, header, MPDU) ahead of scrambling. LENGTH is the
/// MPDU size in bits, which at 1 Mbps is its airtime in microseconds.
Bits build_ppdu(std::span<const std::uint8_t> mpdu);

Bits build_beacon(const BeaconSpec& spec);

/// Parses descrambled MPDU bits. `expected_bits` is the LENGTH from the PLCP
/// header; a shorter input is a truncated frame. Unknown information elements
/// are skipped.
MpduParse parse_beacon(std::span<const std::uint8_t> bits,
                       std::optional<std::size_t> expected_bits = std::nullopt);

}  // namespace wlanips
