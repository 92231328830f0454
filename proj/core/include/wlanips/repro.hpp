#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace wlanips {

/// Library version string.
const char* version();

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// Seed, config hash and version: enough to regenerate an output exactly.
struct ReproStanza {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string version = wlanips::version();

  /// Hash of a canonical "key=value" config dump.
  static ReproStanza from_config(std::uint64_t seed, std::string_view canonical_config);
};

std::string hex64(std::uint64_t v);

/// "<prefix>seed = ...", one line per field.
std::string format_stanza(const ReproStanza& stanza, std::string_view prefix = "# ");

/// Writes the stanza as key = value lines to `<output>.meta`.
void write_stanza_sidecar(const std::filesystem::path& output, const ReproStanza& stanza);

}  // namespace wlanips
