#include "wlanips/iq_file.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <string>

#include "wlanips/errors.hpp"

namespace wlanips {

namespace {

inline std::int16_t to_le(std::int16_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    const auto u = static_cast<std::uint16_t>(v);
    return static_cast<std::int16_t>(static_cast<std::uint16_t>((u >> 8) | (u << 8)));
  }
  return v;
}

}  // namespace

std::filesystem::path meta_path(const std::filesystem::path& capture) {
  auto p = capture;
  p += ".meta";
  return p;
}

void write_capture_meta(const std::filesystem::path& capture, const CaptureMeta& meta) {
  const auto path = meta_path(capture);
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out.precision(12);
  out << "sample_rate_hz = " << meta.sample_rate << "\n"
      << "full_scale = " << meta.full_scale << "\n"
      << "format = int16le_iq\n";
  if (!out) throw IoError(path, "write failed");
}

CaptureMeta read_capture_meta(const std::filesystem::path& capture) {
  CaptureMeta meta;
  const auto path = meta_path(capture);
  std::ifstream in(path);
  if (!in) return meta;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "sample_rate_hz") meta.sample_rate = std::stod(value);
      else if (key == "full_scale") meta.full_scale = std::stod(value);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad value for " + key);
    }
  }
  if (!(meta.sample_rate > 0.0) || !(meta.full_scale > 0.0)) {
    throw FormatError(path.string() + ": sample rate and full scale must be positive");
  }
  return meta;
}

void quantize_int16(std::span<const cf32> samples, double full_scale, std::vector<std::int16_t>& out) {
  out.resize(samples.size() * 2);
  const double k = 32767.0 / full_scale;
  auto q = [k](float v) {
    const double c = std::clamp(std::round(static_cast<double>(v) * k), -32768.0, 32767.0);
    return to_le(static_cast<std::int16_t>(c));
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out[2 * i] = q(samples[i].real());
    out[2 * i + 1] = q(samples[i].imag());
  }
}

IqFileWriter::IqFileWriter(const std::filesystem::path& path, double full_scale)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), full_scale_(full_scale) {
  if (!out_) throw IoError(path, "cannot open for writing");
}

void IqFileWriter::write(std::span<const cf32> samples) {
  const double limit = full_scale_ * 32767.5 / 32767.0;
  constexpr std::size_t kChunk = 1 << 16;
  for (std::size_t i = 0; i < samples.size(); i += kChunk) {
    const auto part = samples.subspan(i, std::min(kChunk, samples.size() - i));
    for (const auto& v : part) {
      clipped_ += std::abs(v.real()) > limit;
      clipped_ += std::abs(v.imag()) > limit;
    }
    quantize_int16(part, full_scale_, raw_);
    out_.write(reinterpret_cast<const char*>(raw_.data()),
               static_cast<std::streamsize>(raw_.size() * sizeof(std::int16_t)));
  }
  written_ += samples.size();
  if (!out_) throw IoError(path_, "write failed");
}

void IqFileWriter::close() {
  out_.flush();
  if (!out_) throw IoError(path_, "write failed");
  out_.close();
}

std::size_t write_iq_int16(const std::filesystem::path& path, std::span<const cf32> samples,
                           double full_scale) {
  IqFileWriter w(path, full_scale);
  w.write(samples);
  w.close();
  return w.clipped();
}

std::vector<cf32> read_iq_int16(const std::filesystem::path& path, double full_scale) {
  IqFileReader reader(path, full_scale);
  std::vector<cf32> out;
  reader.read(out, reader.total_samples());
  return out;
}

IqFileReader::IqFileReader(const std::filesystem::path& path, double full_scale)
    : path_(path), in_(path, std::ios::binary), scale_(full_scale / 32767.0) {
  if (!in_) throw IoError(path, "cannot open capture");
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw IoError(path, ec.message());
  if (bytes % 4 != 0) {
    throw FormatError(path.string() + ": size " + std::to_string(bytes) +
                      " is not a whole number of int16 I/Q pairs");
  }
  total_ = bytes / 4;
}

std::size_t IqFileReader::read(std::vector<cf32>& out, std::size_t max_samples) {
  const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(max_samples, total_ - read_));
  out.resize(n);
  if (n == 0) return 0;
  raw_.resize(2 * n);
  in_.read(reinterpret_cast<char*>(raw_.data()), static_cast<std::streamsize>(raw_.size() * sizeof(std::int16_t)));
  if (in_.gcount() != static_cast<std::streamsize>(raw_.size() * sizeof(std::int16_t))) {
    throw IoError(path_, "short read");
  }
  const auto s = static_cast<float>(scale_);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = cf32(static_cast<float>(to_le(raw_[2 * i])) * s, static_cast<float>(to_le(raw_[2 * i + 1])) * s);
  }
  read_ += n;
  return n;
}

}  // namespace wlanips
