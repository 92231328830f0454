#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace wlanips {

/// Filesystem failure; the message always carries the offending path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(path) {}
  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Malformed input file (odd I/Q byte count, bad header, unparsable field).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wlanips
