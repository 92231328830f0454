#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlanips/carrier.hpp"
#include "wlanips/channel_estimator.hpp"
#include "wlanips/phy_frames.hpp"
#include "wlanips/sync_detector.hpp"
#include "wlanips/types.hpp"

namespace wlanips {

struct RxConfig {
  double threshold = 0.85;          // 0..1, or 0..1000 front-panel scale
  bool lut_carrier = false;         // quantized carrier for the wipe-off
  bool matched_filter = false;      // RRC filter ahead of chip integration
  EqLevel eq_level = EqLevel::Chip;
  int n_taps = 5;
  int cfo_lags = kDefaultCfoLags;
  std::uint8_t wlan_channel = 1;    // reported when the beacon omits DS Parameter Set
  double cal_offset_db = -20.0;     // maps mean power to the dBm scale
  bool record_equalizer = false;    // log Wiener taps w instead of the channel fit h

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct MeasurementRecord {
  double time_s = 0.0;
  std::string ssid;
  MacAddress mac;
  std::uint8_t channel = 1;
  double rssi_dbm = -100.0;
  std::vector<cf64> taps;

  bool operator==(const MeasurementRecord&) const = default;
};

enum class RejectReason : std::uint8_t {
  SfdNotFound,
  HeaderCrcFail,
  UnsupportedRate,
  Truncated,
  FcsFail,
  NotABeacon,
  EstimationFailed,
};
inline constexpr std::size_t kRejectReasonCount = 7;

const char* to_string(RejectReason reason);

struct RxStats {
  std::uint64_t detections = 0;
  std::uint64_t records = 0;
  std::array<std::uint64_t, kRejectReasonCount> rejects{};

  void count(RejectReason reason) { ++rejects[static_cast<std::size_t>(reason)]; }
  [[nodiscard]] std::uint64_t rejected(RejectReason reason) const {
    return rejects[static_cast<std::size_t>(reason)];
  }
  [[nodiscard]] std::uint64_t total_rejects() const;
  RxStats& operator+=(const RxStats& other);
  bool operator==(const RxStats&) const = default;
};

/// Intermediate values of one decode, for diagnostics and tests.
struct DecodeTrace {
  CfoEstimate cfo;
  double phase_rad = 0.0;
  std::vector<cf32> sync_reference_input;  // what the estimator saw (chips or symbols)
  std::optional<ChannelEstimate> estimate;
  std::optional<PlcpHeader> header;
  std::ptrdiff_t sfd_slip_bits = 0;  // SFD position relative to nominal
};

struct DecodeResult {
  std::optional<MeasurementRecord> record;
  std::optional<RejectReason> reject;
  std::optional<BeaconMpdu> beacon;
  /// First sample after the packet (or after the SYNC on early rejects),
  /// relative to the decoded stream.
  std::size_t end_index = 0;
  /// On a Truncated reject: the stream length this packet needs. A
  /// streaming caller can wait for that many samples and retry.
  std::size_t required_size = 0;

  [[nodiscard]] bool ok() const { return record.has_value(); }
};

/// Samples a packet of `mpdu_bits` occupies at 22 MHz.
inline constexpr std::size_t packet_samples(std::size_t mpdu_bits) {
  return (kPlcpBits + mpdu_bits) * kSamplesPerSymbol;
}

/// Longest PPDU the receiver will wait for before decoding (LENGTH limit).
inline constexpr std::size_t kMaxMpduBits = 2346 * 8;

/// 10 log10(mean |x|^2 over [begin, end)) + cal_offset_db, clamped to
/// [-100, 0]. Throws std::invalid_argument for an empty span.
double compute_rssi(std::span<const cf32> stream, std::size_t begin, std::size_t end,
                    double cal_offset_db);

/// Root-raised-cosine taps at 2 samples per chip, unit DC gain.
std::vector<float> rrc_taps(double rolloff = 0.7, int span_chips = 8);

/// Decodes the packet whose SYNC starts at detection.sample_index of a
/// 22 MHz stream. time_offset_s is added to the record timestamp.
DecodeResult decode_packet(std::span<const cf32> stream, const DetectionResult& detection,
                           const RxConfig& config, double time_offset_s = 0.0,
                           DecodeTrace* trace = nullptr);
DecodeResult decode_packet(const IqStream& stream, const DetectionResult& detection,
                           const RxConfig& config, DecodeTrace* trace = nullptr);

/// Detects and decodes every packet of an in-memory 22 MHz stream, skipping
/// past each decoded packet. Convenience for tests and simulation.
std::vector<MeasurementRecord> decode_stream(std::span<const cf32> stream, const RxConfig& config,
                                             RxStats* stats = nullptr);

}  // namespace wlanips
