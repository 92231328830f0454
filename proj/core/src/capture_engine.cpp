#include "wlanips/capture_engine.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "wlanips/dsss_modem.hpp"
#include "wlanips/records.hpp"
#include "wlanips/resampler.hpp"
#include "wlanips/sync_detector.hpp"

namespace wlanips {

// ---- sources ---------------------------------------------------------------

IqFileSource::IqFileSource(const std::filesystem::path& path, std::size_t block_size)
    : meta_(read_capture_meta(path)), reader_(path, meta_.full_scale), block_size_(block_size) {
  if (block_size_ == 0) throw std::invalid_argument("block size must be positive");
}

bool IqFileSource::next(SampleBlock& block) {
  block.stream_offset = offset_;
  block.sample_rate = meta_.sample_rate;
  const std::size_t n = reader_.read(block.samples, block_size_);
  offset_ += n;
  return n > 0;
}

MemorySource::MemorySource(IqStream stream, std::size_t block_size)
    : stream_(std::move(stream)), block_size_(block_size) {
  if (block_size_ == 0) throw std::invalid_argument("block size must be positive");
}

bool MemorySource::next(SampleBlock& block) {
  if (offset_ >= stream_.samples.size()) return false;
  const std::size_t n = std::min(block_size_, stream_.samples.size() - offset_);
  block.samples.assign(stream_.samples.begin() + static_cast<std::ptrdiff_t>(offset_),
                       stream_.samples.begin() + static_cast<std::ptrdiff_t>(offset_ + n));
  block.stream_offset = offset_;
  block.sample_rate = stream_.sample_rate;
  offset_ += n;
  return true;
}


SyntheticBeaconSource::SyntheticBeaconSource(SyntheticStreamSpec spec, std::size_t block_size)
    : spec_(std::move(spec)), block_size_(block_size), rng_state_(rp_seed(spec_.seed, 0) | 1ULL) {
  if (block_size_ == 0) throw std::invalid_argument("block size must be positive");
  if (spec_.sample_rate != kProcessingRateHz && spec_.sample_rate != kCaptureRateHz) {
    throw std::invalid_argument("synthetic source runs at 22 MHz or 25 MHz");
  }
  spec_.profile.validate();
  total_ = static_cast<std::uint64_t>(std::llround(spec_.duration_s * spec_.sample_rate));
  const double interval = TimeUnit{spec_.beacon_interval_tu}.seconds();
  for (int k = 0;; ++k) {
    const double t = spec_.first_beacon_s + k * interval;
    const auto idx = static_cast<std::uint64_t>(std::llround(t * spec_.sample_rate));
    if (idx >= total_) break;
    starts_.push_back(idx);
  }
  if (std::isfinite(spec_.profile.snr_db)) {
    const double p_sig = std::pow(10.0, spec_.profile.gain_db / 10.0) * spec_.profile.tap_energy();
    noise_sigma_ = std::sqrt(p_sig / std::pow(10.0, spec_.profile.snr_db / 10.0) / 2.0);
  }
}

bool SyntheticBeaconSource::next(SampleBlock& block) {
  if (offset_ >= total_) return false;
  const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(block_size_, total_ - offset_));
  block.stream_offset = offset_;
  block.sample_rate = spec_.sample_rate;
  block.samples.resize(n);

  std::fill(block.samples.begin(), block.samples.end(), cf32{});
  add_table_awgn(block.samples, 2.0 * noise_sigma_ * noise_sigma_, rng_state_);

  const std::uint64_t end = offset_ + n;
  while (next_burst_ < starts_.size() && starts_[next_burst_] < end) {
    const int k = static_cast<int>(next_burst_);
    BeaconSpec b;
    b.ssid = spec_.ssid;
    b.bssid = spec_.bssid;
    b.sequence = static_cast<std::uint16_t>(k & 0x0FFF);
    b.interval_tu = static_cast<std::uint16_t>(spec_.beacon_interval_tu);
    b.timestamp_us = static_cast<std::uint64_t>(
        std::llround((spec_.first_beacon_s + k * TimeUnit{spec_.beacon_interval_tu}.seconds()) * 1e6));
    b.channel = spec_.channel;
    IqStream wave = tx_waveform(build_beacon(b), kProcessingRateHz);
    ChannelProfile p = spec_.profile;
    p.cfo_hz = 0.0;
    wave.samples = convolve_channel(wave.samples, kProcessingRateHz, p);
    if (spec_.sample_rate != kProcessingRateHz) wave = resample(wave, spec_.sample_rate);
    Burst burst;
    burst.start = starts_[next_burst_];
    burst.samples = std::move(wave.samples);
    rotate(burst.samples, spec_.profile.cfo_hz, spec_.sample_rate,
           static_cast<std::int64_t>(burst.start));
    active_.push_back(std::move(burst));
    ++next_burst_;
  }
  for (const auto& burst : active_) {
    const std::uint64_t b0 = std::max(burst.start, offset_);
    const std::uint64_t b1 = std::min<std::uint64_t>(burst.start + burst.samples.size(), end);
    for (std::uint64_t t = b0; t < b1; ++t) block.samples[t - offset_] += burst.samples[t - burst.start];
  }
  while (!active_.empty() && active_.front().start + active_.front().samples.size() <= end) {
    active_.pop_front();
  }

  // INT16 round trip, as if the block came from a capture file.
  // Adding 1.5 x 2^23 rounds to the nearest integer without a conversion.
  const float k = 32767.0F / static_cast<float>(spec_.full_scale);
  const float inv = 1.0F / k;
  constexpr float kMagic = 12582912.0F;
  auto* f = reinterpret_cast<float*>(block.samples.data());
  for (std::size_t j = 0; j < 2 * n; ++j) {
    const float c = std::min(std::max(f[j] * k, -32768.0F), 32767.0F);
    f[j] = ((c + kMagic) - kMagic) * inv;
  }

  offset_ = end;
  return true;
}

// ---- engine ----------------------------------------------------------------

void EngineConfig::validate() const {
  rx.validate();
  if (buffer_size < 64) throw std::invalid_argument("buffer size must be at least 64 samples");
  if (!(sleep_ms >= 0.0) || !std::isfinite(sleep_ms)) throw std::invalid_argument("sleep_ms must be >= 0");
  if (max_packets < -1 || max_packets == 0) throw std::invalid_argument("max_packets must be -1 or positive");
  if (queue_depth == 0) throw std::invalid_argument("queue depth must be positive");
}

double EngineSummary::packets_per_stream_second() const {
  return stream_seconds > 0.0 ? static_cast<double>(records.size()) / stream_seconds : 0.0;
}

double EngineSummary::realtime_factor() const {
  return wall_seconds > 0.0 ? stream_seconds / wall_seconds : 0.0;
}

std::uint64_t sleep_gate(double detection_time_s, double sleep_ms, double packet_end_s,
                         double sample_rate, std::uint64_t alignment) {
  const double wake_s = std::max(detection_time_s + sleep_ms / 1000.0, packet_end_s);
  const auto idx = static_cast<std::uint64_t>(std::ceil(std::max(0.0, wake_s) * sample_rate - 1e-6));
  if (alignment <= 1) return idx;
  return (idx + alignment - 1) / alignment * alignment;
}

namespace {

class Consumer {
 public:
  Consumer(const EngineConfig& cfg, double in_rate) : cfg_(cfg), in_rate_(in_rate) {
    const auto rin = std::llround(in_rate);
    const auto rout = std::llround(kProcessingRateHz);
    if (rin <= 0) throw std::invalid_argument("source sample rate must be positive");
    const auto g = std::gcd(rin, rout);
    up_ = static_cast<std::uint64_t>(rout / g);
    down_ = static_cast<std::uint64_t>(rin / g);
    if (up_ != down_) {
      resampler_.emplace(static_cast<int>(up_), static_cast<int>(down_));
      delay_s_ = resampler_->group_delay() / in_rate;
    }
    hop_ = cfg.buffer_size;
    window_ = hop_ + kSyncSamples + 64;
    threshold_ = normalize_threshold(cfg.rx.threshold);
  }

  void feed(const SampleBlock& block) {
    if (block.sample_rate != in_rate_) throw std::runtime_error("sample rate changed mid-stream");
    summary.samples_in += block.samples.size();
    if (stopping) return;
    if (block.stream_offset != expected_) need_reset_ = true;  // gap from a dropped block
    expected_ = block.stream_offset + block.samples.size();

    std::uint64_t from = std::max(block.stream_offset, skip_until_);
    while (!stopping && from < expected_) {
      if (need_reset_) restart(from);
      const auto s0 = static_cast<std::size_t>(from - block.stream_offset);
      const std::span<const cf32> part = std::span<const cf32>(block.samples).subspan(s0);
      summary.samples_processed += part.size();
      if (resampler_) {
        resampler_->process(part, buf_);
      } else {
        buf_.insert(buf_.end(), part.begin(), part.end());
      }
      scan(false);
      if (!need_reset_) break;
      // Went to sleep inside this block; resume here if the wake index is too.
      from = skip_until_;
    }
  }

  void finish() {
    if (!stopping) scan(true);
  }

  EngineSummary summary;
  bool stopping = false;

 private:
  void restart(std::uint64_t input_index) {
    if (resampler_) resampler_->reset();
    buf_.clear();
    origin_ = input_index * up_ / down_;
    pos_ = origin_;
    pending_.reset();
    need_reset_ = false;
  }

  [[nodiscard]] double time_of(std::uint64_t abs_index) const {
    return static_cast<double>(abs_index) / kProcessingRateHz - delay_s_;
  }

  void scan(bool final) {
    const std::size_t tail = static_cast<std::size_t>(cfg_.rx.n_taps) * kSamplesPerSymbol;
    constexpr std::size_t kMinWindow = kSyncSamples + 2 * kSamplesPerSymbol;
    while (!stopping && !need_reset_) {
      const auto rel = static_cast<std::size_t>(pos_ - origin_);
      if (!pending_) {
        std::size_t len = window_;
        if (rel + len > buf_.size()) {
          if (!final || rel + kMinWindow > buf_.size()) break;
          len = buf_.size() - rel;
        }
        const auto det = detector_.detect(std::span<const cf32>(buf_).subspan(rel, len), threshold_, hop_);
        if (!det) {
          pos_ += hop_;
          trim();
          continue;
        }
        DetectionResult d = *det;
        d.sample_index += rel;
        d.peak_index += rel;
        pending_ = d;
        pending_need_ = d.sample_index + (kPlcpBits + 8) * kSamplesPerSymbol + tail;
        ++summary.stats.detections;
      }
      // Decode once the header is buffered; a longer packet asks for more.
      if (!final && pending_need_ > buf_.size()) break;
      const DetectionResult d = *pending_;
      const DecodeResult r = decode_packet(buf_, d, cfg_.rx, time_of(origin_));
      if (!final && r.required_size > buf_.size()) {
        pending_need_ = r.required_size;
        break;
      }
      pending_.reset();
      const std::uint64_t det_abs = origin_ + d.sample_index;
      if (!r.record) {
        summary.stats.count(*r.reject);
        pos_ = det_abs + kSyncSamples;
        trim();
        continue;
      }
      ++summary.stats.records;
      summary.records.push_back(*r.record);
      if (cfg_.max_packets > 0 && static_cast<long long>(summary.records.size()) >= cfg_.max_packets) {
        stopping = true;
        break;
      }
      const std::uint64_t end_abs = origin_ + r.end_index;
      if (cfg_.sleep_enabled) {
        skip_until_ = sleep_gate(time_of(det_abs), cfg_.sleep_ms, time_of(end_abs),
                                 in_rate_, down_);
        need_reset_ = true;
        buf_.clear();
        break;
      }
      pos_ = std::max(end_abs, det_abs + kSyncSamples);
      trim();
    }
  }

  void trim() {
    const auto rel = static_cast<std::size_t>(pos_ - origin_);
    if (rel < (1U << 20) || rel > buf_.size()) return;
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(rel));
    origin_ = pos_;
  }

  const EngineConfig& cfg_;
  double in_rate_;
  std::uint64_t up_ = 1;
  std::uint64_t down_ = 1;
  std::optional<RationalResampler> resampler_;
  double delay_s_ = 0.0;
  std::size_t hop_ = kSyncSamples;
  std::size_t window_ = 0;
  double threshold_ = 0.85;
  SyncDetector detector_;

  std::vector<cf32> buf_;      // 22 MHz samples starting at origin_
  std::uint64_t origin_ = 0;   // absolute 22 MHz index of buf_[0]
  std::uint64_t pos_ = 0;      // next window start
  std::optional<DetectionResult> pending_;
  std::size_t pending_need_ = 0;  // buffer length the pending decode waits for
  std::uint64_t skip_until_ = 0;  // source index where the receiver wakes
  std::uint64_t expected_ = 0;
  bool need_reset_ = false;
};

}  // namespace

EngineSummary run(SampleSource& source, const EngineConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Consumer consumer(config, source.sample_rate());

  if (!config.threaded) {
    SampleBlock block;
    while (!consumer.stopping && source.next(block)) consumer.feed(block);
  } else {
    BoundedQueue<SampleBlock> queue(config.queue_depth, config.overflow);
    std::exception_ptr producer_error;
    std::thread producer([&] {
      try {
        SampleBlock block;
        while (source.next(block)) {
          if (!queue.push(std::move(block))) break;
          block = SampleBlock{};
        }
      } catch (...) {
        producer_error = std::current_exception();
      }
      queue.close();
    });
    try {
      while (!consumer.stopping) {
        auto block = queue.pop();
        if (!block) break;
        consumer.feed(*block);
      }
    } catch (...) {
      queue.close();
      producer.join();
      throw;
    }
    queue.close();
    producer.join();
    if (producer_error) std::rethrow_exception(producer_error);
    consumer.summary.blocks_dropped = queue.dropped();
  }
  consumer.finish();

  EngineSummary out = std::move(consumer.summary);
  out.stream_seconds = static_cast<double>(out.samples_in) / source.sample_rate();
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!config.output_path.empty()) write_records(out.records, config.output_path, config.rx.n_taps);
  return out;
}

EngineSummary run_file(const std::filesystem::path& path, const EngineConfig& config) {
  IqFileSource source(path, config.buffer_size);
  return run(source, config);
}

}  // namespace wlanips
