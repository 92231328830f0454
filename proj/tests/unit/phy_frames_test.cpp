#include "doctest.h"
#include "support/helpers.hpp"
#include "wlanips/bits.hpp"
#include "wlanips/crc.hpp"
#include "wlanips/phy_frames.hpp"

using namespace wlanips;

TEST_CASE("MAC address parsing and formatting") {
  const MacAddress m = MacAddress::parse("a4:2b:8c:04:e8:9d");
  CHECK(m.to_string() == "A4-2B-8C-04-E8-9D");
  CHECK(MacAddress::parse("A4-2B-8C-04-E8-9D") == m);
  CHECK(MacAddress::broadcast().to_string() == "FF-FF-FF-FF-FF-FF");
  CHECK_THROWS_AS(MacAddress::parse("A4-2B-8C-04-E8"), std::invalid_argument);
  CHECK_THROWS_AS(MacAddress::parse("A4-2B-8C-04-E8-GG"), std::invalid_argument);
}

TEST_CASE("time units") {
  CHECK(TimeUnit{100}.microseconds() == 102400);
  CHECK(TimeUnit{100}.seconds() == doctest::Approx(0.1024));
}

TEST_CASE("preamble is 128 ones then the SFD") {
  const Bits p = build_plcp_preamble();
  REQUIRE(p.size() == kPreambleBits);
  CHECK(std::all_of(p.begin(), p.begin() + kSyncBits, [](auto b) { return b == 1; }));
  CHECK(bits::read_uint(p, kSyncBits, 16) == kSfd);
}

TEST_CASE("PLCP header round trip and CRC detection") {
  const Bits h = build_plcp_header(1234);
  REQUIRE(h.size() == kPlcpHeaderBits);
  const auto parsed = parse_plcp_header(h);
  CHECK(parsed.crc_ok);
  CHECK(parsed.header.signal == kSignal1Mbps);
  CHECK(parsed.header.length_us == 1234);
  for (std::size_t i = 0; i < h.size(); ++i) {
    Bits bad = h;
    bad[i] ^= 1U;
    CHECK_FALSE(parse_plcp_header(bad).crc_ok);
  }
}

TEST_CASE("beacon MPDU round trip") {
  const BeaconSpec spec = testing::test_beacon(77);
  const Bytes mpdu = build_beacon_mpdu(spec);
  const MpduParse p = parse_beacon(bits::from_bytes(mpdu), mpdu.size() * 8);
  REQUIRE(p.status == MpduStatus::Ok);
  REQUIRE(p.beacon);
  CHECK(p.beacon->ssid == "TEST-B");
  CHECK(p.beacon->bssid == spec.bssid);
  CHECK(p.beacon->sa == spec.bssid);
  CHECK(p.beacon->da == MacAddress::broadcast());
  CHECK(p.beacon->sequence() == 77);
  CHECK(p.beacon->timestamp_us == spec.timestamp_us);
  CHECK(p.beacon->beacon_interval_tu == 100);
  CHECK(p.beacon->ds_channel == std::optional<std::uint8_t>(1));
  CHECK(p.beacon->fcs == crc32_fcs(std::span(mpdu).first(mpdu.size() - 4)));
}

TEST_CASE("corrupt, foreign and short frames are told apart") {
  const Bytes mpdu = build_beacon_mpdu(testing::test_beacon());
  Bits b = bits::from_bytes(mpdu);
  b[200] ^= 1U;
  CHECK(parse_beacon(b, b.size()).status == MpduStatus::FcsMismatch);

  const Bytes probe = build_mpdu(make_frame_control(0, 5), MacAddress::broadcast(),
                                 MacAddress::parse("02-00-00-00-00-01"), MacAddress::parse("02-00-00-00-00-01"),
                                 3, Bytes(12, 0));
  const MpduParse p = parse_beacon(bits::from_bytes(probe), probe.size() * 8);
  CHECK(p.status == MpduStatus::NotABeacon);
  CHECK(frame_subtype(p.frame_control) == 5);

  const Bits full = bits::from_bytes(mpdu);
  CHECK(parse_beacon(std::span(full).first(full.size() - 16), full.size()).status == MpduStatus::TruncatedFrame);
}

TEST_CASE("SSID limits and the optional DS element") {
  BeaconSpec spec = testing::test_beacon();
  spec.ssid = std::string(32, 'x');
  CHECK_NOTHROW(build_beacon_mpdu(spec));
  spec.ssid = std::string(33, 'x');
  CHECK_THROWS_AS(build_beacon_mpdu(spec), std::invalid_argument);
  spec.ssid = "";
  spec.channel.reset();
  const Bytes mpdu = build_beacon_mpdu(spec);
  const auto p = parse_beacon(bits::from_bytes(mpdu), mpdu.size() * 8);
  REQUIRE(p.beacon);
  CHECK(p.beacon->ssid.empty());
  CHECK_FALSE(p.beacon->ds_channel.has_value());
}

TEST_CASE("PPDU carries LENGTH equal to the MPDU airtime") {
  const Bytes mpdu = build_beacon_mpdu(testing::test_beacon());
  const Bits ppdu = build_ppdu(mpdu);
  CHECK(ppdu.size() == kPlcpBits + mpdu.size() * 8);
  const auto h = parse_plcp_header(std::span(ppdu).subspan(kPreambleBits, kPlcpHeaderBits));
  CHECK(h.crc_ok);
  CHECK(h.header.length_us == mpdu.size() * 8);
}
