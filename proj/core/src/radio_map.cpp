#include "wlanips/radio_map.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "wlanips/errors.hpp"
#include "wlanips/records.hpp"

namespace wlanips {

const char* to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::RssOnly: return "rss_only";
    case FeatureSet::TapsOnly: return "taps_only";
    case FeatureSet::RssPlusTaps: return "rss_plus_taps";
  }
  return "unknown";
}

FeatureSet parse_feature_set(const std::string& text) {
  if (text == "rss_only") return FeatureSet::RssOnly;
  if (text == "taps_only") return FeatureSet::TapsOnly;
  if (text == "rss_plus_taps") return FeatureSet::RssPlusTaps;
  throw std::invalid_argument("unknown feature set '" + text + "'");
}

std::size_t feature_dimension(FeatureSet set, int n_taps) {
  const auto t = static_cast<std::size_t>(n_taps);
  switch (set) {
    case FeatureSet::RssOnly: return 1;
    case FeatureSet::TapsOnly: return t;
    case FeatureSet::RssPlusTaps: return t + 1;
  }
  return 0;
}

std::vector<std::string> feature_names(FeatureSet set, int n_taps) {
  std::vector<std::string> names;
  if (set != FeatureSet::TapsOnly) names.emplace_back("rss_dbm");
  if (set != FeatureSet::RssOnly) {
    for (int i = 1; i <= n_taps; ++i) names.push_back("tap" + std::to_string(i) + "_mag");
  }
  return names;
}

std::vector<double> extract_features(const MeasurementRecord& r, FeatureSet set, int n_taps) {
  std::vector<double> f;
  f.reserve(feature_dimension(set, n_taps));
  if (set != FeatureSet::TapsOnly) f.push_back(r.rssi_dbm);
  if (set != FeatureSet::RssOnly) {
    for (int i = 0; i < n_taps; ++i) {
      const auto k = static_cast<std::size_t>(i);
      f.push_back(k < r.taps.size() ? std::abs(r.taps[k]) : 0.0);
    }
  }
  return f;
}

std::vector<std::size_t> NormParams::fit(const std::vector<std::vector<double>>& rows) {
  min.clear();
  max.clear();
  std::vector<std::size_t> degenerate;
  if (rows.empty()) return degenerate;
  const std::size_t d = rows.front().size();
  min.assign(d, std::numeric_limits<double>::infinity());
  max.assign(d, -std::numeric_limits<double>::infinity());
  for (const auto& r : rows) {
    if (r.size() != d) throw std::invalid_argument("feature rows differ in dimension");
    for (std::size_t j = 0; j < d; ++j) {
      min[j] = std::min(min[j], r[j]);
      max[j] = std::max(max[j], r[j]);
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (!(max[j] > min[j])) degenerate.push_back(j);
  }
  return degenerate;
}

void NormParams::apply(std::span<double> f) const {
  if (f.size() != min.size()) throw std::invalid_argument("feature dimension does not match normalization");
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double range = max[j] - min[j];
    f[j] = range > 0.0 ? (f[j] - min[j]) / range : 0.5;
  }
}

std::vector<double> NormParams::applied(std::span<const double> f) const {
  std::vector<double> out(f.begin(), f.end());
  apply(out);
  return out;
}

const GridPoint& RadioMap::rp(int rp_id) const {
  for (const auto& p : rps) {
    if (p.rp_id == rp_id) return p;
  }
  throw std::invalid_argument("unknown RP " + std::to_string(rp_id));
}

std::vector<std::vector<double>> RadioMap::normalized() const {
  std::vector<std::vector<double>> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(norm.applied(s.features));
  return rows;
}

void RadioMap::validate() const {
  std::map<int, bool> known;
  for (const auto& p : rps) known[p.rp_id] = true;
  for (const auto& s : samples) {
    if (!known.contains(s.rp_id)) throw std::invalid_argument("sample for unknown RP " + std::to_string(s.rp_id));
    if (s.features.size() != dimension()) throw std::invalid_argument("sample dimension mismatch");
    for (double v : s.features) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature at RP " + std::to_string(s.rp_id));
    }
  }
}

namespace {

void refit(RadioMap& map) {
  std::vector<std::vector<double>> rows;
  rows.reserve(map.samples.size());
  for (const auto& s : map.samples) rows.push_back(s.features);
  map.warnings.clear();
  for (std::size_t j : map.norm.fit(rows)) {
    map.warnings.push_back("feature '" + map.feature_names[j] + "' has a degenerate range; mapped to 0.5");
  }
}

}  // namespace

RadioMap build_radio_map(const std::vector<RpMeasurements>& measurements,
                         const std::vector<GridPoint>& grid, FeatureSet set, int n_taps) {
  RadioMap map;
  map.feature_set = set;
  map.feature_names = feature_names(set, n_taps);
  std::map<int, GridPoint> by_id;
  for (const auto& p : grid) by_id[p.rp_id] = p;
  for (const auto& m : measurements) {
    const auto it = by_id.find(m.rp_id);
    if (it == by_id.end()) throw std::invalid_argument("RP " + std::to_string(m.rp_id) + " is not in the grid");
    if (m.records.empty()) throw std::invalid_argument("RP " + std::to_string(m.rp_id) + " has no measurements");
    map.rps.push_back(it->second);
    for (const auto& r : m.records) map.samples.push_back({m.rp_id, extract_features(r, set, n_taps)});
  }
  map.validate();
  refit(map);
  return map;
}

int rp_id_from_path(const std::filesystem::path& path) {
  const std::string stem = path.stem().string();
  const auto us = stem.rfind('_');
  const std::string digits = us == std::string::npos ? stem : stem.substr(us + 1);
  int id = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
    throw FormatError(path.string() + ": file name does not end in _<rp_id>");
  }
  return id;
}

RadioMap build_radio_map(const std::vector<std::filesystem::path>& files,
                         const std::filesystem::path& manifest, FeatureSet set, int n_taps) {
  std::vector<GridPoint> grid;
  for (const auto& row : read_manifest(manifest)) grid.push_back(row.point);
  std::vector<RpMeasurements> ms;
  for (const auto& f : files) {
    RpMeasurements m;
    m.rp_id = rp_id_from_path(f);
    m.records = read_records(f);
    if (m.records.empty()) throw FormatError(f.string() + ": no measurements");
    ms.push_back(std::move(m));
  }
  std::sort(ms.begin(), ms.end(), [](const auto& a, const auto& b) { return a.rp_id < b.rp_id; });
  return build_radio_map(ms, grid, set, n_taps);
}

std::uint64_t bounded_random(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bound must be positive");
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = 0;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

std::pair<RadioMap, RadioMap> split_train_test(const RadioMap& map, std::size_t n_train,
                                               std::size_t n_test, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_rp;
  for (std::size_t i = 0; i < map.samples.size(); ++i) by_rp[map.samples[i].rp_id].push_back(i);
  RadioMap train;
  RadioMap test;
  for (RadioMap* m : {&train, &test}) {
    m->rps = map.rps;
    m->feature_names = map.feature_names;
    m->feature_set = map.feature_set;
  }
  std::mt19937_64 rng(seed);
  for (const auto& p : map.rps) {
    auto idx = by_rp[p.rp_id];
    if (idx.size() < n_train + n_test) {
      throw std::invalid_argument("RP " + std::to_string(p.rp_id) + " has " + std::to_string(idx.size()) +
                                  " samples, fewer than " + std::to_string(n_train + n_test) + " requested");
    }
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[bounded_random(rng, i)]);
    }
    for (std::size_t i = 0; i < n_train; ++i) train.samples.push_back(map.samples[idx[i]]);
    for (std::size_t i = n_train; i < n_train + n_test; ++i) test.samples.push_back(map.samples[idx[i]]);
  }
  refit(train);
  test.norm = train.norm;
  return {std::move(train), std::move(test)};
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt17(v[i]);
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& where) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) {
    try {
      out.push_back(std::stod(t));
    } catch (const std::exception&) {
      throw FormatError(where + ": bad number '" + t + "'");
    }
  }
  return out;
}

}  // namespace

void write_radio_map(const RadioMap& map, const std::filesystem::path& path, const std::string& stanza) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "# wlanips radio-map\n";
  out << "# feature_set = " << to_string(map.feature_set) << "\n";
  out << "# features = ";
  for (std::size_t i = 0; i < map.feature_names.size(); ++i) out << (i ? "," : "") << map.feature_names[i];
  out << "\n# norm_min = " << join(map.norm.min) << "\n";
  out << "# norm_max = " << join(map.norm.max) << "\n";
  out << "# rps = " << map.rps.size() << "\n";
  for (const auto& p : map.rps) out << "# rp = " << p.rp_id << "," << fmt17(p.x_m) << "," << fmt17(p.y_m) << "\n";
  for (const auto& line : split(stanza, '\n')) {
    if (!line.empty()) out << (line[0] == '#' ? "" : "# ") << line << "\n";
  }
  out << "rp_id\tx_m\ty_m";
  for (const auto& n : map.feature_names) out << '\t' << n;
  out << '\n';
  for (const auto& s : map.samples) {
    const GridPoint& p = map.rp(s.rp_id);
    out << s.rp_id << '\t' << fmt17(p.x_m) << '\t' << fmt17(p.y_m);
    for (double v : s.features) out << '\t' << fmt17(v);
    out << '\n';
  }
  if (!out) throw IoError(path, "write failed");
}

RadioMap read_radio_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open radio map");
  RadioMap map;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  bool have_set = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 3);
      try {
        if (key == "feature_set") {
          map.feature_set = parse_feature_set(value);
          have_set = true;
        } else if (key == "features") {
          map.feature_names = split(value, ',');
        } else if (key == "norm_min") {
          map.norm.min = parse_doubles(value, where);
        } else if (key == "norm_max") {
          map.norm.max = parse_doubles(value, where);
        } else if (key == "rp") {
          const auto v = parse_doubles(value, where);
          if (v.size() != 3) throw FormatError(where + ": rp needs id,x,y");
          map.rps.push_back({static_cast<int>(v[0]), v[1], v[2]});
        }
      } catch (const std::invalid_argument& e) {
        throw FormatError(where + ": " + e.what());
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("rp_id\tx_m\ty_m", 0) != 0) throw FormatError(where + ": missing radio-map header");
      continue;
    }
    const auto f = split(line, '\t');
    if (f.size() != 3 + map.feature_names.size()) throw FormatError(where + ": wrong field count");
    FingerprintSample s;
    try {
      s.rp_id = std::stoi(f[0]);
      for (std::size_t j = 3; j < f.size(); ++j) s.features.push_back(std::stod(f[j]));
    } catch (const std::exception&) {
      throw FormatError(where + ": malformed row");
    }
    map.samples.push_back(std::move(s));
  }
  if (!have_set || !header_seen) throw FormatError(path.string() + ": not a radio-map file");
  if (map.norm.min.size() != map.feature_names.size() || map.norm.max.size() != map.feature_names.size()) {
    throw FormatError(path.string() + ": normalization block does not match the features");
  }
  try {
    map.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return map;
}

}  // namespace wlanips
