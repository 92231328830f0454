#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wlanips/channel_sim.hpp"
#include "wlanips/iq_file.hpp"
#include "wlanips/rx_chain.hpp"
#include "wlanips/types.hpp"

namespace wlanips {

struct SampleBlock {
  std::vector<cf32> samples;
  std::uint64_t stream_offset = 0;  // index of samples[0] in the source stream
  double sample_rate = 0.0;
};

/// Gapless producer of sample blocks. next() returns false at end of stream.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual bool next(SampleBlock& block) = 0;
  [[nodiscard]] virtual double sample_rate() const = 0;
};

/// INT16 capture file; sample rate and full scale come from the sidecar.
class IqFileSource final : public SampleSource {
 public:
  IqFileSource(const std::filesystem::path& path, std::size_t block_size);
  bool next(SampleBlock& block) override;
  [[nodiscard]] double sample_rate() const override { return meta_.sample_rate; }
  [[nodiscard]] std::uint64_t total_samples() const { return reader_.total_samples(); }

 private:
  CaptureMeta meta_;
  IqFileReader reader_;
  std::size_t block_size_;
  std::uint64_t offset_ = 0;
};

/// Serves an in-memory stream in fixed-size blocks.
class MemorySource final : public SampleSource {
 public:
  MemorySource(IqStream stream, std::size_t block_size);
  bool next(SampleBlock& block) override;
  [[nodiscard]] double sample_rate() const override { return stream_.sample_rate; }

 private:
  IqStream stream_;
  std::size_t block_size_;
  std::size_t offset_ = 0;
};

struct SyntheticStreamSpec {
  double duration_s = 10.0;
  double first_beacon_s = 0.1;
  int beacon_interval_tu = 100;
  double sample_rate = kCaptureRateHz;
  ChannelProfile profile;  // taps, gain, CFO, SNR (relative to the unit-power beacon)
  std::string ssid = "TEST-B";
  MacAddress bssid = MacAddress::parse("A4-2B-8C-04-E8-9D");
  std::uint8_t channel = 1;
  double full_scale = 4.0;  // INT16 quantization, as if read from a capture
  std::uint64_t seed = 1;
};

/// Beacon train generated on the fly, INT16-quantized, never touching disk.
/// Noise comes from a Gaussian lookup table driven by a 64-bit generator,
/// which keeps ten seconds at 25 MS/s cheap.
class SyntheticBeaconSource final : public SampleSource {
 public:
  SyntheticBeaconSource(SyntheticStreamSpec spec, std::size_t block_size);
  bool next(SampleBlock& block) override;
  [[nodiscard]] double sample_rate() const override { return spec_.sample_rate; }
  [[nodiscard]] int beacon_count() const { return static_cast<int>(starts_.size()); }

 private:
  struct Burst {
    std::uint64_t start = 0;
    std::vector<cf32> samples;
  };
  SyntheticStreamSpec spec_;
  std::size_t block_size_;
  std::uint64_t total_ = 0;
  std::uint64_t offset_ = 0;
  std::vector<std::uint64_t> starts_;
  std::size_t next_burst_ = 0;
  std::deque<Burst> active_;
  double noise_sigma_ = 0.0;
  std::uint64_t rng_state_;
};

enum class OverflowPolicy { Block, DropOldest };

/// Bounded FIFO between producer and consumer. Block waits for room;
/// DropOldest evicts the head and counts it.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity, OverflowPolicy policy = OverflowPolicy::Block)
      : capacity_(capacity == 0 ? 1 : capacity), policy_(policy) {}

  /// Returns false if the queue was closed.
  bool push(T item) {
    std::unique_lock lock(mutex_);
    if (policy_ == OverflowPolicy::Block) {
      not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    } else if (items_.size() >= capacity_ && !closed_) {
      items_.pop_front();
      ++dropped_;
    }
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  /// Blocks until an item arrives or the queue is closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  /// No more pushes; pending items can still be popped.
  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  [[nodiscard]] std::uint64_t dropped() const {
    std::lock_guard lock(mutex_);
    return dropped_;
  }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  OverflowPolicy policy_;
  mutable std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  bool closed_ = false;
  std::uint64_t dropped_ = 0;
};

struct EngineConfig {
  std::size_t buffer_size = kSyncSamples;  // block size and detection hop, in samples
  bool sleep_enabled = false;
  double sleep_ms = 90.0;
  long long max_packets = -1;  // -1 = unlimited
  RxConfig rx;
  std::size_t queue_depth = 64;
  OverflowPolicy overflow = OverflowPolicy::Block;
  bool threaded = true;
  std::filesystem::path output_path;  // written when non-empty

  void validate() const;
};

struct EngineSummary {
  std::vector<MeasurementRecord> records;
  RxStats stats;
  std::uint64_t samples_in = 0;         // source samples dequeued
  std::uint64_t samples_processed = 0;  // source samples that reached the receiver
  std::uint64_t blocks_dropped = 0;     // queue overflow under DropOldest
  double stream_seconds = 0.0;
  double wall_seconds = 0.0;

  [[nodiscard]] double packets_per_stream_second() const;
  [[nodiscard]] double realtime_factor() const;
};

/// First source sample index the receiver looks at after a packet detected at
/// `detection_time_s`: the sleep end, never earlier than `packet_end_s`, and
/// rounded up to a multiple of `alignment` so a fresh resampler lands on the
/// output grid.
std::uint64_t sleep_gate(double detection_time_s, double sleep_ms, double packet_end_s,
                         double sample_rate, std::uint64_t alignment = 1);

/// Producer/consumer capture loop: blocks go through a bounded FIFO, are
/// resampled to 22 MHz, scanned by the SYNC detector in overlapping windows
/// and decoded. Output is identical in threaded and single-threaded mode.
EngineSummary run(SampleSource& source, const EngineConfig& config);

/// Runs the engine on a capture file.
EngineSummary run_file(const std::filesystem::path& path, const EngineConfig& config);

}  // namespace wlanips
