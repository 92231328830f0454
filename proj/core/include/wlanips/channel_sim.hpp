#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wlanips/phy_frames.hpp"
#include "wlanips/types.hpp"

namespace wlanips {

/// Ground-truth propagation for one location. Taps are chip spaced.
struct ChannelProfile {
  std::vector<cf64> taps{cf64{1.0, 0.0}};
  double cfo_hz = 0.0;
  int delay_samples = 0;
  double gain_db = 0.0;
  double snr_db = std::numeric_limits<double>::infinity();

  [[nodiscard]] double tap_energy() const;
  /// Throws std::invalid_argument when the invariants (>= 1 tap, positive tap
  /// energy, non-negative delay) do not hold.
  void validate() const;
};

/// Multipath FIR with taps one chip apart, integer delay, and gain. Chip
/// spacing must be a whole number of samples (22 MHz gives 2).
std::vector<cf32> convolve_channel(std::span<const cf32> x, double sample_rate,
                                   const ChannelProfile& profile);

/// x[n] *= exp(j 2 pi f (n + first_index) / fs).
void rotate(std::span<cf32> x, double freq_hz, double sample_rate, std::int64_t first_index = 0);

void add_awgn(std::span<cf32> x, double noise_power, std::mt19937_64& rng);

/// Cheaper AWGN for long simulations: values come from a fixed 4096-entry
/// Gaussian table indexed by a xorshift* generator whose `state` (nonzero)
/// advances once per two samples.
void add_table_awgn(std::span<cf32> x, double noise_power, std::uint64_t& state);

/// y = gain * (x conv taps) delayed, rotated by the CFO, plus complex
/// Gaussian noise. Noise power is the output signal power over the SNR, where
/// output signal power = reference_power x gain^2 x tap energy and
/// reference_power defaults to the mean power of `x`. Deterministic per seed.
IqStream apply_channel(const IqStream& x, const ChannelProfile& profile, std::uint64_t seed,
                       std::optional<double> reference_power = std::nullopt);

struct GridPoint {
  int rp_id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
};

/// Row-major rectangular grid; ids start at 1. `count` < 0 keeps every point.
std::vector<GridPoint> make_grid(int columns, int rows, double spacing_m, int count = -1);

/// The 69-point, 2 ft survey layout (a 12 x 6 lattice with three corners cut
/// by furniture, spanning about 6.7 m x 3 m).
std::vector<GridPoint> default_survey_grid();

struct ChannelModelParams {
  double ap_x_m = 3.35;  // middle of the default survey area
  double ap_y_m = 1.5;
  double ref_distance_m = 1.0;
  double path_loss_exponent = 3.0;
  double shadowing_sigma_db = 3.0;
  double snr_at_ref_db = 35.0;
  // The profile outlasts the receiver's 5-tap window; the energy in the
  // tail reaches the RSSI but not the channel estimate.
  int n_taps = 10;
  double tap_decay_db = 1.5;          // exponential power-delay profile, per chip
  double correlation_length_m = 2.0;  // spatial correlation of taps and shadowing
  double cfo_hz = 8e3;
  int delay_samples = 24;

  /// Normalized power-delay profile (sums to 1).
  [[nodiscard]] std::vector<double> power_delay_profile() const;
};

/// Location-dependent profiles: log-distance path loss with correlated
/// shadowing sets gain and SNR; each tap is a spatially correlated complex
/// Gaussian field (exponential kernel) scaled by the power-delay profile.
std::map<int, ChannelProfile> gen_profiles(const std::vector<GridPoint>& grid,
                                           const ChannelModelParams& params, std::uint64_t seed);

/// Beacon-to-beacon variation at a fixed location (people moving, AGC-free
/// front end): each tap gets tap_sigma x sqrt(pdp) complex Gaussian jitter
/// and the gain gets gain_sigma_db of log-normal jitter.
struct BeaconVariation {
  double tap_sigma = 0.0;
  double gain_sigma_db = 0.0;
  std::vector<double> pdp;
};

ChannelProfile jitter_profile(const ChannelProfile& base, const BeaconVariation& variation,
                              std::mt19937_64& rng);

struct SurveyScenario {
  std::vector<GridPoint> grid;
  std::map<int, ChannelProfile> profile_per_rp;
  int beacons_per_rp = 600;
  int beacon_interval_tu = 100;
  double first_beacon_s = 0.0356;
  std::string ssid = "TEST-B";
  MacAddress bssid = MacAddress::parse("A4-2B-8C-04-E8-9D");
  std::uint8_t channel = 1;
  double sample_rate = kCaptureRateHz;
  double full_scale = 4.0;
  BeaconVariation variation;

  /// Throws std::invalid_argument on an inconsistent scenario.
  void validate() const;
};

/// Beacon `index` of a survey: sequence number and TSF timestamp follow the
/// beacon train.
BeaconSpec survey_beacon(const SurveyScenario& scenario, int index);

/// Receives consecutive chunks of a generated capture.
using SampleSink = std::function<void(std::span<const cf32>)>;

/// One RP's beacon train through its profile, background noise included,
/// at the scenario's sample rate. Generated in chunks so long trains never
/// sit in memory whole.
void synth_rp_capture(const SurveyScenario& scenario, int rp_id, std::uint64_t seed, const SampleSink& sink);
IqStream synth_rp_stream(const SurveyScenario& scenario, int rp_id, std::uint64_t seed);

struct SurveyOutput {
  std::vector<std::filesystem::path> capture_files;  // ordered like the grid
  std::filesystem::path manifest;
  std::size_t ground_truth_rows = 0;  // rp count x beacons_per_rp
};

/// Writes rp_<id>.iq (+ .meta sidecar) per RP and manifest.tsv into `out_dir`.
/// Throws IoError naming the path on write failure.
SurveyOutput synth_survey(const SurveyScenario& scenario, std::uint64_t seed,
                          const std::filesystem::path& out_dir);

struct ManifestRow {
  GridPoint point;
  ChannelProfile profile;
};

void write_manifest(const std::filesystem::path& path, const SurveyScenario& scenario);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

/// Per-RP seed derived from the survey seed.
std::uint64_t rp_seed(std::uint64_t seed, int rp_id);

}  // namespace wlanips
