#include "wlanips/channel_sim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "phasor.hpp"
#include "wlanips/dsss_modem.hpp"
#include "wlanips/errors.hpp"
#include "wlanips/iq_file.hpp"
#include "wlanips/resampler.hpp"

namespace wlanips {

double ChannelProfile::tap_energy() const {
  double e = 0.0;
  for (const auto& t : taps) e += std::norm(t);
  return e;
}

void ChannelProfile::validate() const {
  if (taps.empty()) throw std::invalid_argument("channel profile needs at least one tap");
  for (const auto& t : taps) {
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) {
      throw std::invalid_argument("channel tap is not finite");
    }
  }
  if (!(tap_energy() > 0.0)) throw std::invalid_argument("channel tap energy must be positive");
  if (delay_samples < 0) throw std::invalid_argument("channel delay must be non-negative");
}

std::vector<cf32> convolve_channel(std::span<const cf32> x, double sample_rate,
                                   const ChannelProfile& profile) {
  profile.validate();
  const double spacing_f = sample_rate / kChipRateHz;
  const auto spacing = static_cast<std::size_t>(std::llround(spacing_f));
  if (profile.taps.size() > 1 && std::abs(spacing_f - static_cast<double>(spacing)) > 1e-9) {
    throw std::invalid_argument("multipath needs an integer number of samples per chip");
  }
  const auto delay = static_cast<std::size_t>(profile.delay_samples);
  const std::size_t span = (profile.taps.size() - 1) * spacing;
  std::vector<cf32> y(x.size() + delay + span, cf32{});
  const double g = std::pow(10.0, profile.gain_db / 20.0);
  for (std::size_t d = 0; d < profile.taps.size(); ++d) {
    const auto h = static_cast<cf32>(profile.taps[d] * g);
    if (h == cf32{}) continue;
    cf32* out = y.data() + delay + d * spacing;
    for (std::size_t n = 0; n < x.size(); ++n) out[n] += h * x[n];
  }
  return y;
}

void rotate(std::span<cf32> x, double freq_hz, double sample_rate, std::int64_t first_index) {
  if (freq_hz == 0.0) return;
  detail::apply_phasor(x, 2.0 * std::numbers::pi * freq_hz / sample_rate, first_index);
}

void add_awgn(std::span<cf32> x, double noise_power, std::mt19937_64& rng) {
  if (!(noise_power > 0.0)) return;
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
  for (auto& v : x) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += cf32(static_cast<float>(re), static_cast<float>(im));
  }
}

namespace {

constexpr std::size_t kGaussTableSize = 1 << 12;  // fits in L1

const std::vector<float>& gauss_table() {
  static const std::vector<float> table = [] {
    std::vector<float> t(kGaussTableSize);
    std::mt19937_64 rng(0x5EEDF00DULL);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& v : t) v = static_cast<float>(g(rng));
    return t;
  }();
  return table;
}

inline std::uint64_t xorshift_star(std::uint64_t& s) {
  s ^= s >> 12;
  s ^= s << 25;
  s ^= s >> 27;
  return s * 0x2545F4914F6CDD1DULL;
}

}  // namespace

void add_table_awgn(std::span<cf32> x, double noise_power, std::uint64_t& state) {
  if (!(noise_power > 0.0)) return;
  if (state == 0) state = 1;
  const auto& table = gauss_table();
  const auto sigma = static_cast<float>(std::sqrt(noise_power / 2.0));
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const std::uint64_t r = xorshift_star(state);
    x[i] += cf32(sigma * table[r & 0xFFF], sigma * table[(r >> 16) & 0xFFF]);
    x[i + 1] += cf32(sigma * table[(r >> 32) & 0xFFF], sigma * table[(r >> 48) & 0xFFF]);
  }
  if (i < n) {
    const std::uint64_t r = xorshift_star(state);
    x[i] += cf32(sigma * table[r & 0xFFF], sigma * table[(r >> 16) & 0xFFF]);
  }
}

IqStream apply_channel(const IqStream& x, const ChannelProfile& profile, std::uint64_t seed,
                       std::optional<double> reference_power) {
  IqStream y;
  y.sample_rate = x.sample_rate;
  y.samples = convolve_channel(x.samples, x.sample_rate, profile);
  rotate(y.samples, profile.cfo_hz, x.sample_rate);
  if (std::isfinite(profile.snr_db)) {
    double p_ref = 0.0;
    if (reference_power) {
      p_ref = *reference_power;
    } else if (!x.samples.empty()) {
      for (const auto& v : x.samples) p_ref += std::norm(v);
      p_ref /= static_cast<double>(x.samples.size());
    }
    const double p_sig = p_ref * std::pow(10.0, profile.gain_db / 10.0) * profile.tap_energy();
    std::mt19937_64 rng(seed);
    add_awgn(y.samples, p_sig / std::pow(10.0, profile.snr_db / 10.0), rng);
  }
  return y;
}

std::vector<GridPoint> make_grid(int columns, int rows, double spacing_m, int count) {
  std::vector<GridPoint> grid;
  int id = 1;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < columns; ++c) {
      if (count >= 0 && static_cast<int>(grid.size()) >= count) return grid;
      grid.push_back(GridPoint{id++, c * spacing_m, r * spacing_m});
    }
  }
  return grid;
}

std::vector<GridPoint> default_survey_grid() {
  constexpr double kSpacing = 0.6096;  // 2 ft
  std::vector<GridPoint> grid;
  int id = 1;
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 12; ++c) {
      // Lockers occupy three lattice points on the last row.
      if (r == 5 && c >= 9) continue;
      grid.push_back(GridPoint{id++, c * kSpacing, r * kSpacing});
    }
  }
  return grid;
}

std::vector<double> ChannelModelParams::power_delay_profile() const {
  std::vector<double> p(static_cast<std::size_t>(std::max(1, n_taps)));
  double sum = 0.0;
  for (std::size_t d = 0; d < p.size(); ++d) {
    p[d] = std::pow(10.0, -tap_decay_db * static_cast<double>(d) / 10.0);
    sum += p[d];
  }
  for (auto& v : p) v /= sum;
  return p;
}

namespace {

// Lower Cholesky factor of exp(-d/L) over the grid; identity when L -> 0.
Eigen::MatrixXd spatial_factor(const std::vector<GridPoint>& grid, double corr_length) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
  if (corr_length > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const double d = std::hypot(grid[i].x_m - grid[j].x_m, grid[i].y_m - grid[j].y_m);
        c(i, j) = c(j, i) = std::exp(-d / corr_length);
      }
    }
    c.diagonal().array() += 1e-9;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw std::runtime_error("spatial covariance is not positive definite");
  return llt.matrixL();
}

Eigen::VectorXd correlated_field(const Eigen::MatrixXd& factor, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd z(factor.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = gauss(rng);
  return factor * z;
}

}  // namespace

std::map<int, ChannelProfile> gen_profiles(const std::vector<GridPoint>& grid,
                                           const ChannelModelParams& params, std::uint64_t seed) {
  std::map<int, ChannelProfile> out;
  if (grid.empty()) return out;
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd factor = spatial_factor(grid, params.correlation_length_m);
  const std::vector<double> pdp = params.power_delay_profile();

  const Eigen::VectorXd shadow = correlated_field(factor, rng);
  std::vector<Eigen::VectorXd> re(pdp.size());
  std::vector<Eigen::VectorXd> im(pdp.size());
  for (std::size_t d = 0; d < pdp.size(); ++d) {
    re[d] = correlated_field(factor, rng);
    im[d] = correlated_field(factor, rng);
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& p = grid[i];
    const double dist = std::hypot(p.x_m - params.ap_x_m, p.y_m - params.ap_y_m);
    const double ratio = std::max(dist, params.ref_distance_m) / params.ref_distance_m;
    const double gain_db = -10.0 * params.path_loss_exponent * std::log10(ratio) +
                           params.shadowing_sigma_db * shadow(static_cast<Eigen::Index>(i));
    ChannelProfile prof;
    prof.taps.resize(pdp.size());
    for (std::size_t d = 0; d < pdp.size(); ++d) {
      const double s = std::sqrt(pdp[d] / 2.0);
      prof.taps[d] = cf64(s * re[d](static_cast<Eigen::Index>(i)), s * im[d](static_cast<Eigen::Index>(i)));
    }
    prof.gain_db = gain_db;
    prof.snr_db = params.snr_at_ref_db + gain_db;
    prof.cfo_hz = params.cfo_hz;
    prof.delay_samples = params.delay_samples;
    out.emplace(p.rp_id, std::move(prof));
  }
  return out;
}

ChannelProfile jitter_profile(const ChannelProfile& base, const BeaconVariation& v, std::mt19937_64& rng) {
  ChannelProfile p = base;
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (v.tap_sigma > 0.0) {
    for (std::size_t d = 0; d < p.taps.size(); ++d) {
      const double pw = d < v.pdp.size() ? v.pdp[d] : 0.0;
      const double s = v.tap_sigma * std::sqrt(pw / 2.0);
      const double a = gauss(rng);
      const double b = gauss(rng);
      p.taps[d] += cf64(s * a, s * b);
    }
  }
  if (v.gain_sigma_db > 0.0) {
    const double j = v.gain_sigma_db * gauss(rng);
    p.gain_db += j;
    p.snr_db += j;
  }
  return p;
}

void SurveyScenario::validate() const {
  if (beacons_per_rp < 1) throw std::invalid_argument("beacons_per_rp must be >= 1");
  if (beacon_interval_tu < 1) throw std::invalid_argument("beacon_interval_tu must be >= 1");
  if (sample_rate != kProcessingRateHz && sample_rate != kCaptureRateHz) {
    throw std::invalid_argument("survey sample rate must be 22 MHz or 25 MHz");
  }
  for (const auto& p : grid) {
    if (!profile_per_rp.contains(p.rp_id)) {
      throw std::invalid_argument("no channel profile for RP " + std::to_string(p.rp_id));
    }
  }
}

BeaconSpec survey_beacon(const SurveyScenario& scenario, int index) {
  BeaconSpec spec;
  spec.ssid = scenario.ssid;
  spec.bssid = scenario.bssid;
  spec.sequence = static_cast<std::uint16_t>(index & 0x0FFF);
  spec.interval_tu = static_cast<std::uint16_t>(scenario.beacon_interval_tu);
  spec.timestamp_us = static_cast<std::uint64_t>(
      std::llround(scenario.first_beacon_s * 1e6) +
      static_cast<long long>(index) * TimeUnit{scenario.beacon_interval_tu}.microseconds());
  spec.channel = scenario.channel;
  return spec;
}

std::uint64_t rp_seed(std::uint64_t seed, int rp_id) {
  // splitmix64 finalizer over (seed, rp)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(rp_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void synth_rp_capture(const SurveyScenario& scenario, int rp_id, std::uint64_t seed, const SampleSink& sink) {
  scenario.validate();
  const ChannelProfile& base = scenario.profile_per_rp.at(rp_id);
  std::mt19937_64 rng(rp_seed(seed, rp_id));
  std::mt19937_64 noise_rng(rng());

  const double fs = kProcessingRateHz;
  const double interval_s = TimeUnit{scenario.beacon_interval_tu}.seconds();
  const auto total = static_cast<std::uint64_t>(
      std::ceil((scenario.first_beacon_s + interval_s * scenario.beacons_per_rp) * fs));
  const double noise_power = std::isfinite(base.snr_db)
                                 ? std::pow(10.0, base.gain_db / 10.0) * base.tap_energy() /
                                       std::pow(10.0, base.snr_db / 10.0)
                                 : 0.0;
  std::optional<RationalResampler> rs;
  if (scenario.sample_rate != fs) {
    const auto rin = static_cast<long long>(fs);
    const auto rout = static_cast<long long>(scenario.sample_rate);
    const long long g = std::gcd(rin, rout);
    rs.emplace(static_cast<int>(rout / g), static_cast<int>(rin / g));
  }

  struct Burst {
    std::uint64_t start = 0;
    std::vector<cf32> samples;
  };
  std::deque<Burst> active;
  int next_beacon = 0;
  constexpr std::uint64_t kChunk = 1 << 16;
  std::vector<cf32> buf;
  std::vector<cf32> out;
  for (std::uint64_t c0 = 0; c0 < total; c0 += kChunk) {
    const std::uint64_t c1 = std::min(total, c0 + kChunk);
    buf.assign(c1 - c0, cf32{});
    while (next_beacon < scenario.beacons_per_rp) {
      const auto start = static_cast<std::uint64_t>(
          std::llround((scenario.first_beacon_s + next_beacon * interval_s) * fs));
      if (start >= c1) break;
      const IqStream wave = tx_waveform(build_beacon(survey_beacon(scenario, next_beacon)), fs);
      ChannelProfile p = jitter_profile(base, scenario.variation, rng);
      p.cfo_hz = 0.0;  // applied to the whole train below
      active.push_back(Burst{start, convolve_channel(wave.samples, fs, p)});
      ++next_beacon;
    }
    for (const auto& b : active) {
      const std::uint64_t lo = std::max(b.start, c0);
      const std::uint64_t hi = std::min<std::uint64_t>(b.start + b.samples.size(), c1);
      for (std::uint64_t n = lo; n < hi; ++n) buf[n - c0] += b.samples[n - b.start];
    }
    while (!active.empty() && active.front().start + active.front().samples.size() <= c1) active.pop_front();
    rotate(buf, base.cfo_hz, fs, static_cast<std::int64_t>(c0));
    add_awgn(buf, noise_power, noise_rng);
    if (rs) {
      out.clear();
      rs->process(buf, out);
      sink(out);
    } else {
      sink(buf);
    }
  }
}

IqStream synth_rp_stream(const SurveyScenario& scenario, int rp_id, std::uint64_t seed) {
  IqStream stream;
  stream.sample_rate = scenario.sample_rate;
  synth_rp_capture(scenario, rp_id, seed, [&](std::span<const cf32> chunk) {
    stream.samples.insert(stream.samples.end(), chunk.begin(), chunk.end());
  });
  return stream;
}

void write_manifest(const std::filesystem::path& path, const SurveyScenario& scenario) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open manifest for writing");
  std::size_t n_taps = 0;
  for (const auto& [id, p] : scenario.profile_per_rp) n_taps = std::max(n_taps, p.taps.size());
  out << "rp_id\tx_m\ty_m";
  for (std::size_t d = 1; d <= n_taps; ++d) out << "\ttap" << d << "_re\ttap" << d << "_im";
  out << "\tsnr_db\tcfo_hz\n";
  out << std::setprecision(10);
  for (const auto& g : scenario.grid) {
    const ChannelProfile& p = scenario.profile_per_rp.at(g.rp_id);
    out << g.rp_id << '\t' << g.x_m << '\t' << g.y_m;
    for (std::size_t d = 0; d < n_taps; ++d) {
      const cf64 t = d < p.taps.size() ? p.taps[d] : cf64{};
      out << '\t' << t.real() << '\t' << t.imag();
    }
    out << '\t' << p.snr_db << '\t' << p.cfo_hz << '\n';
  }
  if (!out) throw IoError(path, "write failed");
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open manifest");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty manifest");
  std::size_t columns = 0;
  {
    std::istringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, '\t')) ++columns;
  }
  if (columns < 5 || (columns - 5) % 2 != 0) {
    throw FormatError(path.string() + ": unexpected manifest header");
  }
  const std::size_t n_taps = (columns - 5) / 2;
  std::vector<ManifestRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ManifestRow row;
    ls >> row.point.rp_id >> row.point.x_m >> row.point.y_m;
    row.profile.taps.resize(n_taps);
    for (std::size_t d = 0; d < n_taps; ++d) {
      double re = 0;
      double im = 0;
      ls >> re >> im;
      row.profile.taps[d] = cf64(re, im);
    }
    ls >> row.profile.snr_db >> row.profile.cfo_hz;
    if (!ls) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed manifest row");
    rows.push_back(std::move(row));
  }
  return rows;
}

SurveyOutput synth_survey(const SurveyScenario& scenario, std::uint64_t seed,
                          const std::filesystem::path& out_dir) {
  scenario.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, "cannot create directory: " + ec.message());
  SurveyOutput result;
  for (const auto& g : scenario.grid) {
    const auto file = out_dir / ("rp_" + std::to_string(g.rp_id) + ".iq");
    IqFileWriter writer(file, scenario.full_scale);
    synth_rp_capture(scenario, g.rp_id, seed, [&](std::span<const cf32> chunk) { writer.write(chunk); });
    writer.close();
    write_capture_meta(file, CaptureMeta{scenario.sample_rate, scenario.full_scale});
    result.capture_files.push_back(file);
  }
  result.manifest = out_dir / "manifest.tsv";
  write_manifest(result.manifest, scenario);
  result.ground_truth_rows = scenario.grid.size() * static_cast<std::size_t>(scenario.beacons_per_rp);
  return result;
}

}  // namespace wlanips
