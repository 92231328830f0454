// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <boost/crc.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "wlanips/capture_engine.hpp"
#include "wlanips/carrier.hpp"
#include "wlanips/channel_estimator.hpp"
#include "wlanips/crc.hpp"
#include "wlanips/dsss_modem.hpp"
#include "wlanips/evaluation.hpp"
#include "wlanips/iq_file.hpp"
#include "wlanips/records.hpp"
#include "wlanips/rx_chain.hpp"
#include "wlanips/scrambler.hpp"
#include "wlanips/survey.hpp"
#include "wlanips/svm.hpp"

using namespace wlanips;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path p = fs::path(WLANIPS_TEST_TMP) / "acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Bit-level golden vectors.
Outcome bit_vectors() {
  const auto t0 = Clock::now();
  const std::string check = "123456789";
  const std::span<const std::uint8_t> check_bytes(reinterpret_cast<const std::uint8_t*>(check.data()), check.size());
  const bool crc32_ok = crc32_fcs(check_bytes) == 0xCBF43926U;

  std::mt19937_64 rng(1);
  bool crc16_ok = crc16_ccitt(check_bytes) == 0xD64E;
  for (int trial = 0; trial < 200; ++trial) {
    Bytes data(static_cast<std::size_t>(rng() % 300));
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    boost::crc_optimal<16, 0x1021, 0xFFFF, 0xFFFF, false, false> oracle;
    oracle.process_bytes(data.data(), data.size());
    crc16_ok = crc16_ok && crc16_ccitt(data) == oracle.checksum();
  }

  Bits bits(10'000);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
  const Bits self_sync = descramble_self_sync(scramble(bits));
  const bool scrambler_ok = descramble(scramble(bits)) == bits && self_sync.size() == bits.size() - 7 &&
                            std::equal(self_sync.begin(), self_sync.end(), bits.begin() + 7);

  bool barker_ok = barker_autocorrelation(0) == 11;
  for (int lag = 1; lag < 11; ++lag) barker_ok = barker_ok && std::abs(barker_autocorrelation(lag)) <= 1;

  const double t = seconds_since(t0);
  return {crc32_ok && crc16_ok && scrambler_ok && barker_ok && t < 1.0,
          fmt("crc32 %s, crc16 %s, scrambler %s, barker %s, %.3f s", crc32_ok ? "ok" : "bad",
              crc16_ok ? "ok" : "bad", scrambler_ok ? "ok" : "bad", barker_ok ? "ok" : "bad", t)};
}

SyntheticStreamSpec loopback_spec() {
  SyntheticStreamSpec s;
  s.beacon_interval_tu = 5;
  s.first_beacon_s = 1e-3;
  s.duration_s = s.first_beacon_s + 99 * TimeUnit{5}.seconds() + 3e-3;
  s.profile.snr_db = 20.0;
  s.seed = 2;
  return s;
}

fs::path loopback_capture() {
  const fs::path path = work_dir() / "loopback.iq";
  if (fs::exists(path)) return path;
  const SyntheticStreamSpec spec = loopback_spec();
  SyntheticBeaconSource src(spec, 1 << 16);
  IqFileWriter w(path, spec.full_scale);
  SampleBlock b;
  while (src.next(b)) w.write(b.samples);
  w.close();
  write_capture_meta(path, CaptureMeta{spec.sample_rate, spec.full_scale});
  return path;
}

// 2. Loopback decode.
Outcome loopback() {
  const auto t0 = Clock::now();
  EngineConfig cfg;
  cfg.output_path = work_dir() / "loopback.tsv";
  const EngineSummary s = run_file(loopback_capture(), cfg);
  const SyntheticStreamSpec spec = loopback_spec();
  std::size_t exact = 0;
  for (const auto& r : s.records) exact += r.ssid == spec.ssid && r.mac == spec.bssid && r.channel == spec.channel;
  const double t = seconds_since(t0);
  return {s.records.size() == 100 && exact == 100 && s.stats.rejected(RejectReason::FcsFail) == 0 && t < 30.0,
          fmt("%zu/100 records, %zu exact, %llu FCS failures, %.2f s", s.records.size(), exact,
              static_cast<unsigned long long>(s.stats.rejected(RejectReason::FcsFail)), t)};
}

// Loaded least squares via QR of the stacked system, independent of the
// receiver's normal-equation solver.
Eigen::VectorXcd ls_oracle(std::span<const cf32> r, std::span<const float> c, int taps) {
  const auto n = static_cast<Eigen::Index>(std::min(r.size(), c.size()));
  const Eigen::Index rows = n - (taps - 1);
  Eigen::MatrixXcd s(rows, taps);
  Eigen::VectorXcd y(rows);
  for (Eigen::Index k = taps - 1; k < n; ++k) {
    for (int d = 0; d < taps; ++d) s(k - (taps - 1), d) = static_cast<double>(c[static_cast<std::size_t>(k - d)]);
    y(k - (taps - 1)) = cf64(r[static_cast<std::size_t>(k)]);
  }
  const double lambda = kDiagonalLoading * (s.adjoint() * s).trace().real() / taps;
  Eigen::MatrixXcd a(rows + taps, taps);
  a << s, std::sqrt(lambda) * Eigen::MatrixXcd::Identity(taps, taps);
  Eigen::VectorXcd b(rows + taps);
  b << y, Eigen::VectorXcd::Zero(taps);
  return a.householderQr().solve(b);
}

// 3. Channel-estimate fidelity through the full receiver.
Outcome channel_fidelity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const auto& ref = sync_chips();
  double mse_sum = 0.0;
  double worst_oracle = 0.0;
  int decoded = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ChannelProfile p;
    p.taps.resize(5);
    for (std::size_t d = 0; d < 5; ++d) {
      const double scale = std::sqrt(std::pow(10.0, -0.3 * static_cast<double>(d)) / 2.0);
      p.taps[d] = cf64(g(rng), g(rng)) * scale;
    }
    p.taps[0] += std::polar(1.0, 2.0 * std::numbers::pi * (static_cast<double>(rng() % 1000) / 1000.0));
    p.snr_db = 30.0;
    p.cfo_hz = static_cast<double>(static_cast<int>(rng() % 40'001) - 20'000);
    p.delay_samples = static_cast<int>(rng() % 50);

    const IqStream wave = tx_waveform(build_beacon(BeaconSpec{.ssid = "TEST-B"}), kProcessingRateHz);
    IqStream padded{std::vector<cf32>(300, cf32{}), kProcessingRateHz};
    padded.samples.insert(padded.samples.end(), wave.samples.begin(), wave.samples.end());
    padded.samples.resize(padded.samples.size() + 300, cf32{});
    const IqStream x = apply_channel(padded, p, static_cast<std::uint64_t>(trial) + 100, 1.0);

    const auto det = detect_sync(std::span(x.samples).first(2 * kSyncSamples + 400), 0.85);
    if (!det) continue;
    DecodeTrace trace;
    const DecodeResult r = decode_packet(x.samples, *det, RxConfig{}, 0.0, &trace);
    if (!r.ok() || !trace.estimate) continue;
    ++decoded;

    const auto& h = trace.estimate->taps;
    const Eigen::VectorXcd o = ls_oracle(trace.sync_reference_input, ref, 5);
    for (int d = 0; d < 5; ++d) worst_oracle = std::max(worst_oracle, std::abs(h[static_cast<std::size_t>(d)] - o(d)));

    cf64 num{};
    double den = 0.0;
    double energy = 0.0;
    for (std::size_t d = 0; d < 5; ++d) {
      num += std::conj(h[d]) * p.taps[d];
      den += std::norm(h[d]);
      energy += std::norm(p.taps[d]);
    }
    const cf64 alpha = num / den;
    double err = 0.0;
    for (std::size_t d = 0; d < 5; ++d) err += std::norm(alpha * h[d] - p.taps[d]);
    mse_sum += err / energy;
  }
  const double mse = decoded ? mse_sum / decoded : 1.0;
  return {decoded == 100 && mse <= 0.05 && worst_oracle <= 1e-6,
          fmt("%d/100 decoded, normalized tap MSE %.4f, max |h - oracle| %.2e, %.2f s", decoded, mse, worst_oracle,
              seconds_since(t0))};
}

// 4. CFO estimator accuracy and SNR trend.
Outcome cfo_accuracy() {
  const auto t0 = Clock::now();
  const IqStream wave = tx_waveform(build_beacon(BeaconSpec{.ssid = "TEST-B"}), kProcessingRateHz);
  const std::vector<cf32> sync(wave.samples.begin(), wave.samples.begin() + kSyncSamples);
  const std::vector<double> snrs{0.0, 5.0, 10.0, 15.0, 20.0, 30.0};
  std::vector<double> rms;
  for (double snr : snrs) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> f(-60e3, 60e3);
    double ss = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const double hz = f(rng);
      std::vector<cf32> x = sync;
      rotate(x, hz, kProcessingRateHz, static_cast<std::int64_t>(rng() % 100'000));
      std::mt19937_64 noise(rng());
      add_awgn(x, std::pow(10.0, -snr / 10.0), noise);
      const double e = coarse_cfo_estimate(x).hz - hz;
      ss += e * e;
    }
    rms.push_back(std::sqrt(ss / 1000.0));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < rms.size(); ++i) monotone = monotone && rms[i] <= rms[i - 1];
  const double at10 = rms[2];
  std::string trend;
  for (std::size_t i = 0; i < snrs.size(); ++i) trend += fmt("%s%g dB %.0f Hz", i ? ", " : "", snrs[i], rms[i]);
  return {at10 <= 1000.0 && monotone,
          fmt("RMS error at 10 dB %.1f Hz over 1000 trials in +/-60 kHz; %s; %s; %.2f s", at10, trend.c_str(),
              monotone ? "monotone" : "NOT monotone", seconds_since(t0))};
}

// 5. Sleep-mode throughput on a 10 s stream.
Outcome throughput() {
  SyntheticStreamSpec spec;  // 10 s at 25 MS/s, one beacon per 100 TU
  spec.profile.taps = {cf64(0.9, 0.2), cf64(0.3, -0.1)};
  spec.profile.snr_db = 25.0;
  spec.profile.cfo_hz = 15e3;
  spec.seed = 5;
  EngineConfig cfg;
  cfg.sleep_enabled = true;
  SyntheticBeaconSource src(spec, kSyncSamples * 16);
  const auto t0 = Clock::now();
  const EngineSummary s = run(src, cfg);
  const double t = seconds_since(t0);
  const auto n = static_cast<long long>(s.records.size());
  return {std::abs(n - 97) <= 1 && t < 10.0,
          fmt("%lld records from %d beacons (%.2f/s), %.2f s wall for %.1f s of stream", n, src.beacon_count(),
              s.packets_per_stream_second(), t, s.stream_seconds)};
}

// 6. Output columns.
Outcome output_format() {
  loopback_capture();
  const fs::path tsv = work_dir() / "loopback_format.tsv";
  EngineConfig cfg;
  cfg.output_path = tsv;
  cfg.max_packets = 1;
  run_file(loopback_capture(), cfg);
  std::ifstream in(tsv);
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  const std::string expect =
      "Time\tSSID\tMAC-ID\tChan\tRSSI\treal1\timag1\treal2\timag2\treal3\timag3\treal4\timag4\treal5\timag5";
  const auto fields = std::count(row.begin(), row.end(), '\t') + 1;
  return {header == expect && fields == 15, fmt("header %s, %ld fields in the first row",
                                                header == expect ? "exact" : "MISMATCH", static_cast<long>(fields))};
}

struct ScenarioAverages {
  double accuracy[3]{};
  double mean_m[3]{};
  double knn_accuracy[3]{};
};

// 7. Feature-set ordering on the synthetic survey.
Outcome ips_ordering() {
  const auto t0 = Clock::now();
  constexpr int kSeeds = 5;
  const FeatureSet sets[3] = {FeatureSet::RssOnly, FeatureSet::TapsOnly, FeatureSet::RssPlusTaps};
  ScenarioAverages avg;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const SurveyScenario sc = make_survey_scenario(ChannelModelParams{}, static_cast<std::uint64_t>(seed));
    SurveySimOptions opts;
    opts.records_per_rp = 600;
    const auto measurements = simulate_survey_records(sc, RxConfig{}, static_cast<std::uint64_t>(seed), opts);
    std::string line = fmt("  seed %d:", seed);
    for (int k = 0; k < 3; ++k) {
      const RadioMap map = build_radio_map(measurements, sc.grid, sets[k]);
      const auto [train, test] = split_train_test(map, 500, 100, static_cast<std::uint64_t>(seed));
      const SvmModel model = svm_train(train);
      const EvalReport r = evaluate(model, test, sc.grid);
      const EvalReport knn = knn_baseline(train, test, 5);
      avg.accuracy[k] += r.accuracy_pct / kSeeds;
      avg.mean_m[k] += r.mean_m / kSeeds;
      avg.knn_accuracy[k] += knn.accuracy_pct / kSeeds;
      line += fmt(" %s %.2f%% %.3f m (knn5 %.2f%%)", to_string(sets[k]), r.accuracy_pct, r.mean_m, knn.accuracy_pct);
    }
    std::printf("%s [%.0f s]\n", line.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  const double t = seconds_since(t0);
  const bool order = avg.accuracy[2] >= avg.accuracy[1] && avg.accuracy[1] >= avg.accuracy[0];
  const bool gap = avg.accuracy[2] - avg.accuracy[0] >= 20.0;
  const bool error = avg.mean_m[2] < avg.mean_m[0];
  return {order && gap && error && t < 900.0,
          fmt("mean over %d seeds: rss_only %.2f%% / %.3f m, taps_only %.2f%% / %.3f m, rss_plus_taps %.2f%% / %.3f m; "
              "knn5 %.2f%% / %.2f%% / %.2f%%; %.0f s",
              kSeeds, avg.accuracy[0], avg.mean_m[0], avg.accuracy[1], avg.mean_m[1], avg.accuracy[2], avg.mean_m[2],
              avg.knn_accuracy[0], avg.knn_accuracy[1], avg.knn_accuracy[2], t)};
}

double oracle_percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// 8. Evaluation statistics against brute force.
Outcome evaluation_math() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<GridPoint> grid{{0, 0.0, 0.0}};
  std::vector<int> pred;
  std::vector<int> truth;
  for (int i = 1; i <= 1000; ++i) {
    grid.push_back({i, u(rng), u(rng)});
    pred.push_back(i);
    truth.push_back(0);
  }
  const EvalReport r = evaluate_predictions(pred, truth, grid);
  std::vector<double> e;
  for (int i = 1; i <= 1000; ++i) e.push_back(std::hypot(grid[i].x_m, grid[i].y_m));
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= 1000.0;
  double ss = 0.0;
  for (double v : e) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 999.0);
  const double dev = std::max({std::abs(r.mean_m - mean), std::abs(r.std_m - sd),
                               std::abs(r.p50_m - oracle_percentile(e, 0.5)),
                               std::abs(r.p90_m - oracle_percentile(e, 0.9))});
  const auto def = default_survey_grid();
  std::vector<int> t(100, 10);
  std::vector<int> p = t;
  p[0] = 11;
  const double adjacent = evaluate_predictions(p, t, def).errors_m[0];
  return {dev <= 1e-9 && std::abs(adjacent - 0.6096) <= 1e-12,
          fmt("max deviation from oracle %.2e, adjacent miss %.10f m", dev, adjacent)};
}

// 9. Byte-identical reruns and threading invariance.
Outcome determinism() {
  const auto t0 = Clock::now();
  const fs::path dir = work_dir() / "determinism";
  fs::create_directories(dir);
  std::vector<std::string> failures;
  auto same = [&](const std::string& what, const fs::path& a, const fs::path& b) {
    if (slurp(a) != slurp(b) || slurp(a).empty()) failures.push_back(what);
  };

  SyntheticStreamSpec spec;
  spec.duration_s = 1.0;
  spec.profile.taps = {cf64(0.8, 0.3), cf64(0.2, 0.2), cf64(0.05, -0.1)};
  spec.profile.snr_db = 15.0;
  spec.profile.cfo_hz = -30e3;
  spec.seed = 9;
  for (const char* name : {"a.iq", "b.iq"}) {
    SyntheticBeaconSource src(spec, 100'000);
    IqFileWriter w(dir / name);
    SampleBlock blk;
    while (src.next(blk)) w.write(blk.samples);
    w.close();
    write_capture_meta(dir / name, CaptureMeta{});
  }
  same("capture synthesis", dir / "a.iq", dir / "b.iq");

  for (bool sleep : {false, true}) {
    EngineConfig cfg;
    cfg.sleep_enabled = sleep;
    cfg.output_path = dir / "threaded.tsv";
    run_file(dir / "a.iq", cfg);
    cfg.threaded = false;
    cfg.output_path = dir / "single.tsv";
    run_file(dir / "a.iq", cfg);
    cfg.output_path = dir / "single2.tsv";
    run_file(dir / "b.iq", cfg);
    same(sleep ? "decode with sleep" : "decode", dir / "threaded.tsv", dir / "single.tsv");
    same("decode rerun", dir / "single.tsv", dir / "single2.tsv");
  }

  SurveyScenario sc = make_survey_scenario(ChannelModelParams{}, 9, 60);
  sc.grid.resize(6);
  SurveySimOptions o;
  o.records_per_rp = 50;
  o.threads = 1;
  const auto m1 = simulate_survey_records(sc, RxConfig{}, 9, o);
  o.threads = 3;
  const auto m2 = simulate_survey_records(sc, RxConfig{}, 9, o);
  for (std::size_t i = 0; i < m1.size(); ++i) {
    write_records(m1[i].records, location_path(dir / "s1.tsv", m1[i].rp_id));
    write_records(m2[i].records, location_path(dir / "s2.tsv", m2[i].rp_id));
    same("survey records", location_path(dir / "s1.tsv", m1[i].rp_id), location_path(dir / "s2.tsv", m2[i].rp_id));
  }

  const RadioMap map = build_radio_map(m1, sc.grid, FeatureSet::RssPlusTaps);
  for (unsigned threads : {1U, 4U}) {
    const auto [train, test] = split_train_test(map, 40, 10, 9);
    SvmParams params;
    params.threads = threads;
    const SvmModel model = svm_train(train, params);
    const std::string tag = std::to_string(threads);
    write_radio_map(train, dir / ("train" + tag + ".tsv"));
    model.save(dir / ("model" + tag + ".txt"));
    write_report({evaluate(model, test, sc.grid)}, dir / ("report" + tag + ".txt"));
  }
  same("radio map split", dir / "train1.tsv", dir / "train4.tsv");
  same("svm model", dir / "model1.txt", dir / "model4.txt");
  same("evaluation report", dir / "report1.txt", dir / "report4.txt");

  std::string detail = failures.empty() ? "capture, decode (threaded/single, sleep on/off), survey, split, model and "
                                          "report outputs identical"
                                        : "differences in:";
  for (const auto& f : failures) detail += " " + f;
  return {failures.empty(), detail + fmt(", %.1f s", seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, bit_vectors}, {2, loopback},        {3, channel_fidelity}, {4, cfo_accuracy}, {5, throughput},
      {6, output_format}, {7, ips_ordering}, {8, evaluation_math},  {9, determinism},
  };
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.contains(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s - %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
