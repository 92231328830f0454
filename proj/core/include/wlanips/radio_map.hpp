#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wlanips/channel_sim.hpp"
#include "wlanips/rx_chain.hpp"

namespace wlanips {

enum class FeatureSet { RssOnly, TapsOnly, RssPlusTaps };

const char* to_string(FeatureSet set);
/// "rss_only", "taps_only" or "rss_plus_taps"; throws std::invalid_argument.
FeatureSet parse_feature_set(const std::string& text);

/// 1, n_taps or n_taps + 1.
std::size_t feature_dimension(FeatureSet set, int n_taps = 5);
std::vector<std::string> feature_names(FeatureSet set, int n_taps = 5);

/// RSS in dBm and/or tap magnitudes |h_i|.
std::vector<double> extract_features(const MeasurementRecord& record, FeatureSet set, int n_taps = 5);

/// Per-feature min-max scaling frozen from a training corpus.
struct NormParams {
  std::vector<double> min;
  std::vector<double> max;

  /// Fits over `rows`; returns indices of degenerate (constant) features.
  std::vector<std::size_t> fit(const std::vector<std::vector<double>>& rows);
  /// (v - min) / (max - min); constant features map to 0.5.
  void apply(std::span<double> features) const;
  [[nodiscard]] std::vector<double> applied(std::span<const double> features) const;
  [[nodiscard]] std::size_t dimension() const { return min.size(); }
  bool operator==(const NormParams&) const = default;
};

struct FingerprintSample {
  int rp_id = 0;
  std::vector<double> features;  // raw (unnormalized)
  bool operator==(const FingerprintSample&) const = default;
};

struct RadioMap {
  std::vector<GridPoint> rps;
  std::vector<FingerprintSample> samples;
  std::vector<std::string> feature_names;
  FeatureSet feature_set = FeatureSet::RssPlusTaps;
  NormParams norm;
  std::vector<std::string> warnings;

  [[nodiscard]] const GridPoint& rp(int rp_id) const;
  [[nodiscard]] std::size_t dimension() const { return feature_names.size(); }
  /// Rows scaled with `norm`.
  [[nodiscard]] std::vector<std::vector<double>> normalized() const;
  /// Throws std::invalid_argument on unknown RP ids or non-finite features.
  void validate() const;
};

/// Measurements for one reference point.
struct RpMeasurements {
  int rp_id = 0;
  std::vector<MeasurementRecord> records;
};

/// Extracts features per record and fits normalization over everything.
/// Throws std::invalid_argument for an RP missing from `grid`, an empty
/// record list or a non-finite feature.
RadioMap build_radio_map(const std::vector<RpMeasurements>& measurements,
                         const std::vector<GridPoint>& grid, FeatureSet set, int n_taps = 5);

/// Reads record files named `<stem>_<rp_id><ext>` against a grid manifest.
RadioMap build_radio_map(const std::vector<std::filesystem::path>& record_files,
                         const std::filesystem::path& manifest, FeatureSet set, int n_taps = 5);

/// RP id encoded as the trailing "_<n>" of a file stem.
int rp_id_from_path(const std::filesystem::path& path);

/// Uniform integer in [0, bound) from a 64-bit generator, identical on every
/// standard library (unlike std::uniform_int_distribution).
std::uint64_t bounded_random(std::mt19937_64& rng, std::uint64_t bound);

/// Per-RP random split (Fisher-Yates under `seed`). The training part refits
/// normalization; the test part inherits it. Throws std::invalid_argument if
/// an RP has fewer than n_train + n_test samples.
std::pair<RadioMap, RadioMap> split_train_test(const RadioMap& map, std::size_t n_train,
                                               std::size_t n_test, std::uint64_t seed);

/// Text radio map: a '#' metadata block (feature set, names, norm params,
/// stanza lines) then a header and one row per sample.
void write_radio_map(const RadioMap& map, const std::filesystem::path& path,
                     const std::string& stanza = {});
RadioMap read_radio_map(const std::filesystem::path& path);

}  // namespace wlanips
