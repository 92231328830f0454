#include "wlanips/repro.hpp"

#include <cstdio>
#include <fstream>

#include "wlanips/errors.hpp"

namespace wlanips {

const char* version() { return WLANIPS_VERSION; }

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ReproStanza ReproStanza::from_config(std::uint64_t seed, std::string_view canonical_config) {
  ReproStanza s;
  s.seed = seed;
  s.config_hash = fnv1a64(canonical_config);
  return s;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_stanza(const ReproStanza& s, std::string_view prefix) {
  std::string out;
  const std::string p(prefix);
  out += p + "seed = " + std::to_string(s.seed) + "\n";
  out += p + "config_hash = " + hex64(s.config_hash) + "\n";
  out += p + "version = " + s.version + "\n";
  return out;
}

void write_stanza_sidecar(const std::filesystem::path& output, const ReproStanza& stanza) {
  auto path = output;
  path += ".meta";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << format_stanza(stanza, "");
  if (!out) throw IoError(path, "write failed");
}

}  // namespace wlanips
