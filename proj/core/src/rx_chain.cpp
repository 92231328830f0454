#include "wlanips/rx_chain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wlanips/bits.hpp"
#include "wlanips/dsss_modem.hpp"
#include "wlanips/scrambler.hpp"

namespace wlanips {

void RxConfig::validate() const {
  (void)normalize_threshold(threshold);
  if (n_taps < 1 || n_taps > 64) throw std::invalid_argument("n_taps must be in [1, 64]");
  if (cfo_lags < 1 || cfo_lags > 1000) throw std::invalid_argument("cfo_lags must be in [1, 1000]");
  if (wlan_channel < 1 || wlan_channel > 14) throw std::invalid_argument("wlan channel must be in [1, 14]");
  if (!std::isfinite(cal_offset_db)) throw std::invalid_argument("cal_offset_db must be finite");
}

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::SfdNotFound: return "sfd_not_found";
    case RejectReason::HeaderCrcFail: return "header_crc_fail";
    case RejectReason::UnsupportedRate: return "unsupported_rate";
    case RejectReason::Truncated: return "truncated";
    case RejectReason::FcsFail: return "fcs_fail";
    case RejectReason::NotABeacon: return "not_a_beacon";
    case RejectReason::EstimationFailed: return "estimation_failed";
  }
  return "unknown";
}

std::uint64_t RxStats::total_rejects() const {
  std::uint64_t n = 0;
  for (auto v : rejects) n += v;
  return n;
}

RxStats& RxStats::operator+=(const RxStats& other) {
  detections += other.detections;
  records += other.records;
  for (std::size_t i = 0; i < rejects.size(); ++i) rejects[i] += other.rejects[i];
  return *this;
}

double compute_rssi(std::span<const cf32> stream, std::size_t begin, std::size_t end,
                    double cal_offset_db) {
  end = std::min(end, stream.size());
  if (begin >= end) throw std::invalid_argument("RSSI span is empty");
  double p = 0.0;
  for (std::size_t n = begin; n < end; ++n) p += std::norm(stream[n]);
  p /= static_cast<double>(end - begin);
  if (!(p > 0.0)) return -100.0;
  return std::clamp(10.0 * std::log10(p) + cal_offset_db, -100.0, 0.0);
}

std::vector<float> rrc_taps(double rolloff, int span_chips) {
  const int sps = kSamplesPerChip;
  const int n = span_chips * sps + 1;
  const double mid = (n - 1) / 2.0;
  std::vector<double> h(static_cast<std::size_t>(n));
  const double b = rolloff;
  for (int i = 0; i < n; ++i) {
    const double t = (i - mid) / sps;  // in chips
    double v = 0.0;
    if (std::abs(t) < 1e-12) {
      v = 1.0 - b + 4.0 * b / std::numbers::pi;
    } else if (b > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-9) {
      v = b / std::numbers::sqrt2 *
          ((1.0 + 2.0 / std::numbers::pi) * std::sin(std::numbers::pi / (4.0 * b)) +
           (1.0 - 2.0 / std::numbers::pi) * std::cos(std::numbers::pi / (4.0 * b)));
    } else {
      const double num = std::sin(std::numbers::pi * t * (1.0 - b)) +
                         4.0 * b * t * std::cos(std::numbers::pi * t * (1.0 + b));
      const double den = std::numbers::pi * t * (1.0 - 16.0 * b * b * t * t);
      v = num / den;
    }
    h[static_cast<std::size_t>(i)] = v;
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  std::vector<float> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = static_cast<float>(h[i] / sum);
  return out;
}

namespace {

constexpr std::size_t kSym = kSamplesPerSymbol;
constexpr std::size_t kNominalSfd = kSyncBits - 7;  // descrambler drops 7 bits
constexpr std::ptrdiff_t kSfdSearch = 8;
constexpr int kFineCfoLags = 8;  // +/-55 kHz at the symbol rate

// Everything learned from the SYNC that the payload demodulation reuses.
struct Front {
  double cfo_hz = 0.0;
  cf32 derotate{1.0F, 0.0F};
  ChannelEstimate estimate;
};

// Zero-phase FIR with the stream beyond the segment treated as silence.
std::vector<cf32> filter_centered(std::span<const cf32> x, const std::vector<float>& h) {
  const auto half = static_cast<std::ptrdiff_t>(h.size() / 2);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<cf32> y(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    cf32 acc{};
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(h.size()); ++k) {
      const std::ptrdiff_t j = i + half - k;
      if (j >= 0 && j < n) acc += h[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

// CFO wipe-off, optional matched filter and chip integration over
// [start, start + n_chips) chips, with `tail` extra chips when available.
std::vector<cf32> front_chips(std::span<const cf32> stream, std::size_t start, std::size_t n_chips,
                              double cfo_hz, const RxConfig& cfg) {
  const std::size_t want = n_chips * kSamplesPerChip;
  const std::size_t avail = std::min(want, stream.size() - std::min(stream.size(), start));
  std::vector<cf32> seg(stream.begin() + static_cast<std::ptrdiff_t>(start),
                        stream.begin() + static_cast<std::ptrdiff_t>(start + avail));
  carrier_wipeoff(seg, cfo_hz, kProcessingRateHz,
                  cfg.lut_carrier ? WipeoffMode::QuantizedLut : WipeoffMode::Exact);
  if (cfg.matched_filter) {
    static const std::vector<float> rrc = rrc_taps();
    seg = filter_centered(seg, rrc);
  }
  return chip_samples(seg, 0, n_chips);
}

std::vector<float> sync_symbol_reference() {
  const auto& s = sync_symbols();
  return {s.begin(), s.end()};
}

bool estimate_front(std::span<const cf32> stream, std::size_t i0, std::size_t peak, const RxConfig& cfg,
                    Front& f, DecodeTrace* trace) {
  // The CFO reference is aligned with the strongest path; against a weak
  // first arrival the echoes bias the lag correlations.
  const std::size_t cfo_at = peak >= i0 && peak + kSyncSamples <= stream.size() ? peak : i0;
  const std::span<const cf32> sync = stream.subspan(cfo_at, std::min(kSyncSamples, stream.size() - cfo_at));
  CfoEstimate cfo = coarse_cfo_estimate(sync, cfg.cfo_lags);
  const auto& ref_chips = sync_chips();
  // Fine pass on despread symbols, where the Barker gain suppresses the
  // echoes that bias the chip-level estimate.
  {
    const std::vector<cf32> pk = front_chips(stream, cfo_at, ref_chips.size(), cfo.hz, cfg);
    const std::vector<cf32> symbols = barker_despread(std::span<const cf32>(pk));
    static const std::vector<float> ref = sync_symbol_reference();
    const CfoEstimate fine = luise_reggiannini(symbols, ref, kFineCfoLags, kSymbolRateHz);
    if (fine.reliable) cfo.hz += fine.hz;
  }
  f.cfo_hz = cfo.hz;
  std::vector<cf32> chips = front_chips(stream, i0, ref_chips.size(), f.cfo_hz, cfg);
  const double phi = reference_phase(chips, ref_chips);
  f.derotate = cf32(static_cast<float>(std::cos(-phi)), static_cast<float>(std::sin(-phi)));
  for (auto& c : chips) c *= f.derotate;
  if (trace != nullptr) {
    trace->cfo = cfo;
    trace->phase_rad = phi;
  }

  std::optional<ChannelEstimate> est;
  if (cfg.eq_level == EqLevel::Chip) {
    est = estimate_channel(chips, ref_chips, cfg.n_taps, EqLevel::Chip);
    if (trace != nullptr) trace->sync_reference_input = chips;
  } else {
    const std::vector<cf32> symbols = barker_despread(std::span<const cf32>(chips));
    const std::vector<float> ref = sync_symbol_reference();
    est = estimate_channel(symbols, ref, cfg.n_taps, EqLevel::Symbol);
    if (trace != nullptr) trace->sync_reference_input = symbols;
  }
  if (trace != nullptr) trace->estimate = est;
  if (!est) return false;
  for (const auto& t : est->taps) {
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) return false;
  }
  f.estimate = std::move(*est);
  return true;
}

// Descrambled bits for the first n_symbols of the packet; the first
// scrambled bit is read against the SYNC phase reference.
Bits demod_bits(std::span<const cf32> stream, std::size_t i0, std::size_t n_symbols, const Front& f,
                const RxConfig& cfg) {
  const std::size_t tail = static_cast<std::size_t>(cfg.n_taps) * kChipsPerSymbol;
  std::vector<cf32> chips = front_chips(stream, i0, n_symbols * kChipsPerSymbol + tail, f.cfo_hz, cfg);
  for (auto& c : chips) c *= f.derotate;
  std::vector<cf32> symbols;
  if (cfg.eq_level == EqLevel::Chip) {
    symbols = barker_despread(std::span<const cf32>(equalize(chips, f.estimate)));
  } else {
    symbols = equalize(barker_despread(std::span<const cf32>(chips)), f.estimate);
  }
  symbols.resize(std::min(symbols.size(), n_symbols));
  if (symbols.size() < 2) return {};
  Bits scrambled;
  scrambled.reserve(symbols.size());
  scrambled.push_back(symbols[0].real() < 0.0F ? 1 : 0);
  const Bits rest = dbpsk_demod(symbols);
  scrambled.insert(scrambled.end(), rest.begin(), rest.end());
  return descramble_self_sync(scrambled);
}

const Bits& sfd_pattern() {
  static const Bits sfd = [] {
    Bits b;
    bits::append_uint(b, kSfd, 16);
    return b;
  }();
  return sfd;
}

}  // namespace

DecodeResult decode_packet(std::span<const cf32> stream, const DetectionResult& detection,
                           const RxConfig& cfg, double time_offset_s, DecodeTrace* trace) {
  DecodeResult out;
  const std::size_t i0 = detection.sample_index;
  out.end_index = std::min(stream.size(), i0 + kSyncSamples);
  auto reject = [&out](RejectReason r) {
    out.reject = r;
    return out;
  };
  const std::size_t tail = static_cast<std::size_t>(cfg.n_taps) * kChipsPerSymbol * kSamplesPerChip;
  const std::size_t head_symbols = kPlcpBits + kSfdSearch;
  if (i0 + head_symbols * kSym + tail > stream.size()) {
    out.required_size = i0 + head_symbols * kSym + tail;
    if (i0 + kPlcpBits * kSym > stream.size()) return reject(RejectReason::Truncated);
  }

  Front f;
  if (!estimate_front(stream, i0, detection.peak_index, cfg, f, trace)) return reject(RejectReason::EstimationFailed);

  // Pass 1: preamble and header with room for the SFD search.
  const Bits head = demod_bits(stream, i0, std::min(head_symbols, (stream.size() - i0) / kSym), f, cfg);
  const auto lo = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(kNominalSfd) - kSfdSearch);
  const std::ptrdiff_t sfd = bits::find(head, sfd_pattern(), lo, kNominalSfd + kSfdSearch + kSfdBits);
  if (sfd < 0) return reject(RejectReason::SfdNotFound);
  const auto sfd_at = static_cast<std::size_t>(sfd);
  if (trace != nullptr) trace->sfd_slip_bits = sfd - static_cast<std::ptrdiff_t>(kNominalSfd);
  const std::size_t header_at = sfd_at + kSfdBits;
  if (header_at + kPlcpHeaderBits > head.size()) return reject(RejectReason::Truncated);
  const PlcpHeaderParse hdr =
      parse_plcp_header(std::span<const std::uint8_t>(head).subspan(header_at, kPlcpHeaderBits));
  if (trace != nullptr) trace->header = hdr.header;
  if (!hdr.crc_ok) return reject(RejectReason::HeaderCrcFail);
  if (hdr.header.signal != kSignal1Mbps) return reject(RejectReason::UnsupportedRate);
  const std::size_t length = hdr.header.length_us;
  if (length > kMaxMpduBits) return reject(RejectReason::Truncated);

  // Pass 2: the whole LENGTH-bounded packet.
  const std::size_t mpdu_at = header_at + kPlcpHeaderBits;
  const std::size_t need_symbols = mpdu_at + 7 + length;
  out.end_index = std::min(stream.size(), i0 + need_symbols * kSym);
  if (i0 + need_symbols * kSym + tail > stream.size()) {
    out.required_size = i0 + need_symbols * kSym + tail;
    if (i0 + need_symbols * kSym > stream.size()) return reject(RejectReason::Truncated);
  }
  const Bits all = demod_bits(stream, i0, need_symbols, f, cfg);
  if (all.size() < mpdu_at + length) return reject(RejectReason::Truncated);
  const MpduParse parsed =
      parse_beacon(std::span<const std::uint8_t>(all).subspan(mpdu_at, length), length);
  switch (parsed.status) {
    case MpduStatus::Ok: break;
    case MpduStatus::FcsMismatch: return reject(RejectReason::FcsFail);
    case MpduStatus::NotABeacon: return reject(RejectReason::NotABeacon);
    case MpduStatus::TruncatedFrame: return reject(RejectReason::Truncated);
  }

  const BeaconMpdu& b = *parsed.beacon;
  MeasurementRecord rec;
  rec.time_s = time_offset_s + static_cast<double>(i0) / kProcessingRateHz;
  rec.ssid = b.ssid;
  rec.mac = b.bssid;
  rec.channel = b.ds_channel.value_or(cfg.wlan_channel);
  rec.rssi_dbm = compute_rssi(stream, i0, i0 + packet_samples(length), cfg.cal_offset_db);
  rec.taps = cfg.record_equalizer ? f.estimate.equalizer : f.estimate.taps;
  out.record = std::move(rec);
  out.beacon = b;
  return out;
}

DecodeResult decode_packet(const IqStream& stream, const DetectionResult& detection,
                           const RxConfig& config, DecodeTrace* trace) {
  if (stream.sample_rate != kProcessingRateHz) {
    throw std::invalid_argument("decode_packet expects a 22 MHz stream");
  }
  return decode_packet(std::span<const cf32>(stream.samples), detection, config, 0.0, trace);
}

std::vector<MeasurementRecord> decode_stream(std::span<const cf32> stream, const RxConfig& config,
                                             RxStats* stats) {
  config.validate();
  std::vector<MeasurementRecord> records;
  SyncDetector detector;
  constexpr std::size_t kHop = kSyncSamples;
  constexpr std::size_t kWindow = kHop + kSyncSamples + 64;
  std::size_t pos = 0;
  RxStats local;
  while (pos + kSyncSamples <= stream.size()) {
    const std::size_t len = std::min(kWindow, stream.size() - pos);
    const auto det = detector.detect(stream.subspan(pos, len), config.threshold, kHop);
    if (!det) {
      pos += kHop;
      continue;
    }
    ++local.detections;
    DetectionResult abs = *det;
    abs.sample_index += pos;
    abs.peak_index += pos;
    const DecodeResult r = decode_packet(stream, abs, config);
    if (r.record) {
      ++local.records;
      records.push_back(*r.record);
    } else {
      local.count(*r.reject);
    }
    pos = std::max(r.end_index, abs.sample_index + kSyncSamples);
  }
  if (stats != nullptr) *stats += local;
  return records;
}

}  // namespace wlanips
