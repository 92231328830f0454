#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <vector>

#include "wlanips/types.hpp"

namespace wlanips {

/// Raw capture format: signed 16-bit little-endian, I then Q, no header.
/// Floats map to counts as round(v / full_scale * 32767), clipped.
struct CaptureMeta {
  double sample_rate = kCaptureRateHz;
  double full_scale = 4.0;
};

/// Sidecar path holding CaptureMeta as key = value lines.
std::filesystem::path meta_path(const std::filesystem::path& capture);

void write_capture_meta(const std::filesystem::path& capture, const CaptureMeta& meta);

/// Reads the sidecar if present, otherwise returns defaults.
CaptureMeta read_capture_meta(const std::filesystem::path& capture);

/// Returns the number of clipped components.
std::size_t write_iq_int16(const std::filesystem::path& path, std::span<const cf32> samples,
                           double full_scale = 4.0);

void quantize_int16(std::span<const cf32> samples, double full_scale, std::vector<std::int16_t>& out);

/// Throws FormatError if the byte count is not a multiple of 4 and IoError if
/// the file cannot be read.
std::vector<cf32> read_iq_int16(const std::filesystem::path& path, double full_scale = 4.0);

/// Incremental writer: appends quantized blocks.
class IqFileWriter {
 public:
  explicit IqFileWriter(const std::filesystem::path& path, double full_scale = 4.0);
  void write(std::span<const cf32> samples);
  /// Flushes; throws IoError if any write failed.
  void close();
  [[nodiscard]] std::size_t clipped() const { return clipped_; }
  [[nodiscard]] std::uint64_t samples_written() const { return written_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  double full_scale_;
  std::size_t clipped_ = 0;
  std::uint64_t written_ = 0;
  std::vector<std::int16_t> raw_;
};

/// Incremental reader used by the capture engine.
class IqFileReader {
 public:
  explicit IqFileReader(const std::filesystem::path& path, double full_scale = 4.0);

  /// Fills up to max_samples; returns the number read (0 at end of file).
  std::size_t read(std::vector<cf32>& out, std::size_t max_samples);
  [[nodiscard]] std::uint64_t total_samples() const { return total_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  double scale_;
  std::uint64_t total_ = 0;
  std::uint64_t read_ = 0;
  std::vector<std::int16_t> raw_;
};

}  // namespace wlanips
