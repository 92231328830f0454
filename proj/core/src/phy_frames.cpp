#include "wlanips/phy_frames.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>

#include "wlanips/bits.hpp"
#include "wlanips/crc.hpp"

namespace wlanips {

namespace {

constexpr std::size_t kMacHeaderBytes = 24;
constexpr std::size_t kFixedBodyBytes = 12;  // timestamp, interval, capability
constexpr std::size_t kFcsBytes = 4;

constexpr std::uint8_t kElementSsid = 0;
constexpr std::uint8_t kElementRates = 1;
constexpr std::uint8_t kElementDsParams = 3;

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_mac(Bytes& out, const MacAddress& mac) {
  out.insert(out.end(), mac.octets.begin(), mac.octets.end());
}

std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t off, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[off + i]) << (8 * i);
  return v;
}

MacAddress get_mac(std::span<const std::uint8_t> b, std::size_t off) {
  MacAddress mac;
  for (std::size_t i = 0; i < 6; ++i) mac.octets[i] = b[off + i];
  return mac;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

MacAddress MacAddress::parse(std::string_view text) {
  if (text.size() != 17) throw std::invalid_argument("malformed MAC address: " + std::string(text));
  MacAddress mac;
  for (std::size_t i = 0; i < 6; ++i) {
    const int hi = hex_value(text[3 * i]);
    const int lo = hex_value(text[3 * i + 1]);
    const bool sep_ok = i == 5 || text[3 * i + 2] == '-' || text[3 * i + 2] == ':';
    if (hi < 0 || lo < 0 || !sep_ok) {
      throw std::invalid_argument("malformed MAC address: " + std::string(text));
    }
    mac.octets[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return mac;
}

MacAddress MacAddress::broadcast() {
  MacAddress mac;
  mac.octets.fill(0xFF);
  return mac;
}

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02X-%02X-%02X-%02X-%02X-%02X", octets[0], octets[1], octets[2],
                octets[3], octets[4], octets[5]);
  return buf;
}

const char* to_string(MpduStatus status) {
  switch (status) {
    case MpduStatus::Ok: return "ok";
    case MpduStatus::FcsMismatch: return "fcs-mismatch";
    case MpduStatus::NotABeacon: return "not-a-beacon";
    case MpduStatus::TruncatedFrame: return "truncated-frame";
  }
  return "unknown";
}

Bits build_plcp_preamble() {
  Bits out(kSyncBits, 1);
  bits::append_uint(out, kSfd, 16);
  return out;
}

Bits build_plcp_header(std::uint16_t length_us, std::uint8_t signal, std::uint8_t service) {
  Bits out;
  out.reserve(kPlcpHeaderBits);
  bits::append_uint(out, signal, 8);
  bits::append_uint(out, service, 8);
  bits::append_uint(out, length_us, 16);
  const std::uint16_t crc = crc16_ccitt_bits(out);
  // x^15 goes first.
  for (int i = 15; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((crc >> i) & 1U));
  return out;
}

PlcpHeaderParse parse_plcp_header(std::span<const std::uint8_t> bits) {
  if (bits.size() < kPlcpHeaderBits) throw std::invalid_argument("PLCP header needs 48 bits");
  PlcpHeaderParse parsed;
  parsed.header.signal = static_cast<std::uint8_t>(bits::read_uint(bits, 0, 8));
  parsed.header.service = static_cast<std::uint8_t>(bits::read_uint(bits, 8, 8));
  parsed.header.length_us = static_cast<std::uint16_t>(bits::read_uint(bits, 16, 16));
  std::uint16_t crc = 0;
  for (std::size_t i = 0; i < 16; ++i) crc = static_cast<std::uint16_t>((crc << 1) | (bits[32 + i] & 1U));
  parsed.header.crc16 = crc;
  parsed.crc_ok = crc16_ccitt_bits(bits.first(32)) == crc;
  return parsed;
}

Bytes build_mpdu(std::uint16_t frame_control,
                 const MacAddress& da,
                 const MacAddress& sa,
                 const MacAddress& bssid,
                 std::uint16_t sequence,
                 std::span<const std::uint8_t> body) {
  Bytes out;
  out.reserve(kMacHeaderBytes + body.size() + kFcsBytes);
  put_u16(out, frame_control);
  put_u16(out, 0);  // duration
  put_mac(out, da);
  put_mac(out, sa);
  put_mac(out, bssid);
  put_u16(out, static_cast<std::uint16_t>((sequence & 0x0FFF) << 4));
  out.insert(out.end(), body.begin(), body.end());
  put_u32(out, crc32_fcs(out));
  return out;
}

Bytes build_beacon_mpdu(const BeaconSpec& spec) {
  if (spec.ssid.size() > kMaxSsidBytes) {
    throw std::invalid_argument("SSID longer than 32 bytes");
  }
  Bytes body;
  for (int i = 0; i < 8; ++i) body.push_back(static_cast<std::uint8_t>(spec.timestamp_us >> (8 * i)));
  put_u16(body, spec.interval_tu);
  put_u16(body, spec.capability);
  body.push_back(kElementSsid);
  body.push_back(static_cast<std::uint8_t>(spec.ssid.size()));
  body.insert(body.end(), spec.ssid.begin(), spec.ssid.end());
  // 1, 2, 5.5 and 11 Mbps, basic rates flagged.
  for (std::uint8_t b : {kElementRates, std::uint8_t{4}, std::uint8_t{0x82}, std::uint8_t{0x84},
                         std::uint8_t{0x8B}, std::uint8_t{0x96}}) {
    body.push_back(b);
  }
  if (spec.channel) {
    body.push_back(kElementDsParams);
    body.push_back(1);
    body.push_back(*spec.channel);
  }
  return build_mpdu(kBeaconFrameControl, MacAddress::broadcast(), spec.bssid, spec.bssid,
                    spec.sequence, body);
}

Bits build_ppdu(std::span<const std::uint8_t> mpdu) {
  const std::size_t length_bits = mpdu.size() * 8;
  if (length_bits > 0xFFFF) throw std::invalid_argument("MPDU too long for the LENGTH field");
  Bits out = build_plcp_preamble();
  const Bits header = build_plcp_header(static_cast<std::uint16_t>(length_bits));
  out.insert(out.end(), header.begin(), header.end());
  const Bits payload = bits::from_bytes(mpdu);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Bits build_beacon(const BeaconSpec& spec) { return build_ppdu(build_beacon_mpdu(spec)); }

MpduParse parse_beacon(std::span<const std::uint8_t> bits, std::optional<std::size_t> expected_bits) {
  MpduParse result;
  const std::size_t want = expected_bits.value_or(bits.size());
  if (bits.size() < want || want % 8 != 0 || want < 8 * (kMacHeaderBytes + kFcsBytes)) {
    result.status = MpduStatus::TruncatedFrame;
    return result;
  }
  const Bytes bytes = bits::to_bytes(bits.first(want));
  const std::size_t body_end = bytes.size() - kFcsBytes;
  const auto fcs = static_cast<std::uint32_t>(get_le(bytes, body_end, 4));
  if (crc32_fcs(std::span(bytes).first(body_end)) != fcs) {
    result.status = MpduStatus::FcsMismatch;
    return result;
  }
  result.frame_control = static_cast<std::uint16_t>(get_le(bytes, 0, 2));
  if (frame_type(result.frame_control) != 0 || frame_subtype(result.frame_control) != 8) {
    result.status = MpduStatus::NotABeacon;
    return result;
  }
  if (body_end < kMacHeaderBytes + kFixedBodyBytes) {
    result.status = MpduStatus::TruncatedFrame;
    return result;
  }

  BeaconMpdu b;
  b.frame_control = result.frame_control;
  b.duration = static_cast<std::uint16_t>(get_le(bytes, 2, 2));
  b.da = get_mac(bytes, 4);
  b.sa = get_mac(bytes, 10);
  b.bssid = get_mac(bytes, 16);
  b.seq_ctrl = static_cast<std::uint16_t>(get_le(bytes, 22, 2));
  b.timestamp_us = get_le(bytes, 24, 8);
  b.beacon_interval_tu = static_cast<std::uint16_t>(get_le(bytes, 32, 2));
  b.capability = static_cast<std::uint16_t>(get_le(bytes, 34, 2));
  b.fcs = fcs;

  bool have_ssid = false;
  std::size_t pos = kMacHeaderBytes + kFixedBodyBytes;
  while (pos < body_end) {
    if (pos + 2 > body_end) {
      result.status = MpduStatus::TruncatedFrame;
      return result;
    }
    const std::uint8_t id = bytes[pos];
    const std::size_t len = bytes[pos + 1];
    if (pos + 2 + len > body_end) {
      result.status = MpduStatus::TruncatedFrame;
      return result;
    }
    const auto* value = bytes.data() + pos + 2;
    if (id == kElementSsid && !have_ssid) {
      if (len > kMaxSsidBytes) {
        result.status = MpduStatus::TruncatedFrame;
        return result;
      }
      b.ssid.assign(reinterpret_cast<const char*>(value), len);
      have_ssid = true;
    } else if (id == kElementDsParams && len == 1) {
      b.ds_channel = value[0];
    }
    pos += 2 + len;
  }
  result.status = MpduStatus::Ok;
  result.beacon = std::move(b);
  return result;
}

}  // namespace wlanips
