// wlanips: beacon capture decoding and fingerprint positioning from the shell.
//
//   wlanips gen-beacon --out beacon.iq
//   wlanips decode beacon.iq --out beacon.tsv
//   wlanips gen-survey --out-dir survey --grid 3x3 --beacons-per-rp 60 --interval-tu 2
//   wlanips survey survey/rp_*.iq --out survey/records.tsv
//   wlanips train survey/records_*.tsv --manifest survey/manifest.tsv --work-dir model
//   wlanips evaluate --work-dir model
//
// Exit codes: 0 ran to completion, 1 usage error, 2 I/O or format error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wlanips/capture_engine.hpp"
#include "wlanips/channel_sim.hpp"
#include "wlanips/errors.hpp"
#include "wlanips/evaluation.hpp"
#include "wlanips/iq_file.hpp"
#include "wlanips/radio_map.hpp"
#include "wlanips/records.hpp"
#include "wlanips/repro.hpp"
#include "wlanips/survey.hpp"
#include "wlanips/svm.hpp"

namespace fs = std::filesystem;
using namespace wlanips;

namespace {

// Thrown for bad flag combinations found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReceiverFlags {
  std::size_t buffer_size = kSyncSamples;
  double threshold = 0.85;
  bool lut = false;
  bool matched_filter = false;
  bool sleep = false;
  double sleep_ms = 90.0;
  std::string eq_level = "chip";
  int n_taps = 5;
  int wlan_channel = 1;
  long long max_packets = -1;
  double cal_offset_db = -20.0;
  int cfo_lags = kDefaultCfoLags;
  std::size_t queue_depth = 64;
  std::string overflow = "block";
  bool single_threaded = false;
  bool record_equalizer = false;

  [[nodiscard]] EngineConfig engine() const {
    EngineConfig c;
    c.buffer_size = buffer_size;
    c.sleep_enabled = sleep;
    c.sleep_ms = sleep_ms;
    c.max_packets = max_packets;
    c.queue_depth = queue_depth;
    c.overflow = overflow == "drop-oldest" ? OverflowPolicy::DropOldest : OverflowPolicy::Block;
    c.threaded = !single_threaded;
    c.rx.threshold = threshold;
    c.rx.lut_carrier = lut;
    c.rx.matched_filter = matched_filter;
    c.rx.eq_level = parse_eq_level(eq_level);
    c.rx.n_taps = n_taps;
    c.rx.cfo_lags = cfo_lags;
    c.rx.wlan_channel = static_cast<std::uint8_t>(wlan_channel);
    c.rx.cal_offset_db = cal_offset_db;
    c.rx.record_equalizer = record_equalizer;
    c.validate();
    return c;
  }
};

struct ChannelFlags {
  std::vector<std::string> taps;  // "re,im" per tap
  double snr_db = 30.0;
  double cfo_hz = 0.0;
  double gain_db = 0.0;
  int delay = 24;

  [[nodiscard]] ChannelProfile profile() const {
    ChannelProfile p;
    if (!taps.empty()) {
      p.taps.clear();
      for (const auto& t : taps) {
        const auto comma = t.find(',');
        try {
          const double re = std::stod(t.substr(0, comma));
          const double im = comma == std::string::npos ? 0.0 : std::stod(t.substr(comma + 1));
          p.taps.emplace_back(re, im);
        } catch (const std::exception&) {
          throw UsageError("bad tap '" + t + "', expected re,im");
        }
      }
    }
    p.snr_db = snr_db;
    p.cfo_hz = cfo_hz;
    p.gain_db = gain_db;
    p.delay_samples = delay;
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

void add_receiver_flags(CLI::App& app, ReceiverFlags& f) {
  const char* g = "Receiver";
  app.add_option("--buffer-size", f.buffer_size, "Block size and detection hop, samples")
      ->capture_default_str()->group(g);
  app.add_option("--threshold", f.threshold, "Detection threshold, 0..1 (or 0..1000)")
      ->capture_default_str()->group(g);
  app.add_flag("--lut", f.lut, "Quantized carrier lookup for the CFO wipe-off")->group(g);
  app.add_flag("--matched-filter", f.matched_filter, "Root-raised-cosine filter before despreading")->group(g);
  app.add_flag("--sleep", f.sleep, "Suspend detection after each decoded beacon")->group(g);
  app.add_option("--sleep-ms", f.sleep_ms, "Sleep length")->capture_default_str()->group(g);
  app.add_option("--eq-level", f.eq_level, "Channel estimation at chip or symbol level")
      ->check(CLI::IsMember({"chip", "symbol"}))->capture_default_str()->group(g);
  app.add_option("--n-taps", f.n_taps, "Channel estimate taps")->check(CLI::Range(1, 64))
      ->capture_default_str()->group(g);
  app.add_option("--wlan-channel", f.wlan_channel, "Channel logged when a beacon has no DS element")
      ->check(CLI::Range(1, 14))->capture_default_str()->group(g);
  app.add_option("--max-packets", f.max_packets, "Stop after this many records (-1 = unlimited)")
      ->capture_default_str()->group(g);
  app.add_option("--cal-offset-db", f.cal_offset_db, "RSSI calibration offset")->capture_default_str()->group(g);
  app.add_option("--cfo-lags", f.cfo_lags, "Autocorrelation lags of the CFO estimator")
      ->check(CLI::Range(1, 1000))->capture_default_str()->group(g);
  app.add_option("--queue-depth", f.queue_depth, "Producer/consumer FIFO depth, blocks")
      ->capture_default_str()->group(g);
  app.add_option("--overflow", f.overflow, "FIFO overflow policy")
      ->check(CLI::IsMember({"block", "drop-oldest"}))->capture_default_str()->group(g);
  app.add_flag("--single-threaded", f.single_threaded, "Interleave producer and consumer on one thread")
      ->group(g);
  app.add_flag("--record-equalizer", f.record_equalizer, "Log equalizer taps instead of the channel fit")
      ->group(g);
}

void add_channel_flags(CLI::App& app, ChannelFlags& f) {
  const char* g = "Channel";
  app.add_option("--tap", f.taps, "Channel tap re,im (repeat per tap; default a single unit tap)")->group(g);
  app.add_option("--snr-db", f.snr_db, "SNR over the received signal power")->capture_default_str()->group(g);
  app.add_option("--cfo-hz", f.cfo_hz, "Carrier frequency offset")->capture_default_str()->group(g);
  app.add_option("--gain-db", f.gain_db, "Channel gain")->capture_default_str()->group(g);
  app.add_option("--delay", f.delay, "Propagation delay, 22 MHz samples")->check(CLI::NonNegativeNumber)
      ->capture_default_str()->group(g);
}

// Effective settings of a subcommand plus the root, as the hashed config.
std::string canonical_config(const CLI::App& root, const CLI::App& sub) {
  return root.config_to_str(true, false) + sub.config_to_str(true, false);
}

ReproStanza stanza_for(const CLI::App& root, const CLI::App& sub, std::uint64_t seed) {
  return ReproStanza::from_config(seed, canonical_config(root, sub));
}

FeatureSet scenario_set(const std::string& s) { return parse_feature_set(s); }

std::vector<FeatureSet> scenarios(const std::string& s) {
  if (s == "all") return {FeatureSet::RssOnly, FeatureSet::TapsOnly, FeatureSet::RssPlusTaps};
  return {scenario_set(s)};
}

void print_summary(const EngineSummary& s, std::ostream& os) {
  os << s.records.size() << " records";
  os << " (" << s.stats.detections << " detections, " << s.stats.total_rejects() << " rejected";
  for (std::size_t r = 0; r < kRejectReasonCount; ++r) {
    if (s.stats.rejects[r] != 0) {
      os << ", " << to_string(static_cast<RejectReason>(r)) << " " << s.stats.rejects[r];
    }
  }
  os << ")\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "stream %.3f s, %.2f packets/s, wall %.3f s (%.1fx real time)\n",
                s.stream_seconds, s.packets_per_stream_second(), s.wall_seconds, s.realtime_factor());
  os << buf;
  if (s.blocks_dropped != 0) os << "warning: " << s.blocks_dropped << " blocks dropped on queue overflow\n";
}

std::vector<GridPoint> parse_grid(const std::string& text, double spacing) {
  if (text == "default") return default_survey_grid();
  const auto x = text.find('x');
  if (x == std::string::npos) throw UsageError("--grid expects 'default' or CxR, e.g. 3x3");
  try {
    const int cols = std::stoi(text.substr(0, x));
    const int rows = std::stoi(text.substr(x + 1));
    if (cols < 1 || rows < 1) throw UsageError("--grid dimensions must be positive");
    return make_grid(cols, rows, spacing);
  } catch (const std::logic_error&) {
    throw UsageError("--grid expects 'default' or CxR, e.g. 3x3");
  }
}

fs::path require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw IoError(p, what + " not found (run the earlier step first)");
  return p;
}

fs::path model_path(const fs::path& dir, FeatureSet s) { return dir / ("model_" + std::string(to_string(s)) + ".txt"); }
fs::path train_map_path(const fs::path& dir, FeatureSet s) {
  return dir / ("radio_map_" + std::string(to_string(s)) + ".tsv");
}
fs::path test_map_path(const fs::path& dir, FeatureSet s) { return dir / ("test_" + std::string(to_string(s)) + ".tsv"); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"802.11b beacon receiver and fingerprint positioning toolkit"};
  app.set_version_flag("--version", std::string(version()));
  app.set_config("--config", "", "Key = value settings file (flag names without dashes)");
  app.require_subcommand(1);
  app.fallthrough();

  ReceiverFlags rx;
  add_receiver_flags(app, rx);
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();

  // gen-beacon
  auto* gen_beacon = app.add_subcommand("gen-beacon", "Synthesize a beacon train into an INT16 I/Q capture");
  std::string gb_ssid = "TEST-B";
  std::string gb_mac = "A4-2B-8C-04-E8-9D";
  int gb_channel = 1;
  int gb_count = 1;
  int gb_interval = 100;
  double gb_rate = kCaptureRateHz;
  double gb_full_scale = 4.0;
  fs::path gb_out;
  ChannelFlags gb_chan;
  gen_beacon->add_option("--ssid", gb_ssid, "Network name, at most 32 bytes")
      ->check([](const std::string& s) {
        return s.size() <= kMaxSsidBytes ? std::string{} : "SSID longer than 32 bytes";
      })
      ->capture_default_str();
  gen_beacon->add_option("--mac", gb_mac, "BSSID")->capture_default_str();
  gen_beacon->add_option("--channel", gb_channel, "Channel in the DS Parameter Set")->check(CLI::Range(1, 14))
      ->capture_default_str();
  gen_beacon->add_option("--count", gb_count, "Number of beacons")->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_beacon->add_option("--interval-tu", gb_interval, "Beacon interval")->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_beacon->add_option("--sample-rate", gb_rate, "22e6 or 25e6")->capture_default_str();
  gen_beacon->add_option("--full-scale", gb_full_scale, "Amplitude mapped to INT16 full scale")
      ->check(CLI::PositiveNumber)->capture_default_str();
  gen_beacon->add_option("--out", gb_out, "Capture file")->required();
  add_channel_flags(*gen_beacon, gb_chan);

  // gen-survey
  auto* gen_survey = app.add_subcommand("gen-survey", "Synthesize per-RP survey captures and a manifest");
  fs::path gs_dir;
  std::string gs_grid = "default";
  double gs_spacing = 0.6096;
  int gs_beacons = 600;
  int gs_interval = 100;
  double gs_rate = kCaptureRateHz;
  double gs_tap_sigma = kSurveyTapSigma;
  double gs_gain_sigma = kSurveyGainSigmaDb;
  ChannelModelParams gs_model;
  gen_survey->add_option("--out-dir", gs_dir, "Output directory")->required();
  gen_survey->add_option("--grid", gs_grid, "'default' (69 RPs) or CxR")->capture_default_str();
  gen_survey->add_option("--spacing-m", gs_spacing, "Grid spacing for CxR grids")->capture_default_str();
  gen_survey->add_option("--beacons-per-rp", gs_beacons, "Beacons per capture")->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_survey->add_option("--interval-tu", gs_interval, "Beacon interval")->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_survey->add_option("--sample-rate", gs_rate, "22e6 or 25e6")->capture_default_str();
  gen_survey->add_option("--tap-sigma", gs_tap_sigma, "Per-beacon tap jitter")->capture_default_str();
  gen_survey->add_option("--gain-sigma-db", gs_gain_sigma, "Per-beacon gain jitter")->capture_default_str();
  gen_survey->add_option("--ap-x", gs_model.ap_x_m, "Access point x, m")->capture_default_str();
  gen_survey->add_option("--ap-y", gs_model.ap_y_m, "Access point y, m")->capture_default_str();
  gen_survey->add_option("--path-loss-exponent", gs_model.path_loss_exponent)->capture_default_str();
  gen_survey->add_option("--shadowing-db", gs_model.shadowing_sigma_db, "Shadowing sigma")->capture_default_str();
  gen_survey->add_option("--snr-ref-db", gs_model.snr_at_ref_db, "SNR at the reference distance")
      ->capture_default_str();
  gen_survey->add_option("--corr-length-m", gs_model.correlation_length_m, "Spatial correlation length")
      ->capture_default_str();
  gen_survey->add_option("--tap-decay-db", gs_model.tap_decay_db, "Power-delay profile decay per chip")
      ->capture_default_str();
  gen_survey->add_option("--survey-taps", gs_model.n_taps, "Multipath taps")->check(CLI::Range(1, 16))
      ->capture_default_str();
  gen_survey->add_option("--cfo-hz", gs_model.cfo_hz, "Carrier frequency offset")->capture_default_str();

  // decode
  auto* decode = app.add_subcommand("decode", "Run the receiver on a capture file");
  fs::path dec_in;
  fs::path dec_out;
  decode->add_option("input", dec_in, "INT16 I/Q capture")->required();
  decode->add_option("--out", dec_out, "Record TSV (default: <input>.tsv)");

  // survey
  auto* survey = app.add_subcommand("survey", "Decode per-RP captures into numbered record files");
  std::vector<fs::path> sv_in;
  fs::path sv_out = "records.tsv";
  survey->add_option("inputs", sv_in, "Captures named <stem>_<rp_id>.iq")->required();
  survey->add_option("--out", sv_out, "Base record path; the RP id is appended")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Build radio maps and train SVM models");
  std::vector<fs::path> tr_in;
  fs::path tr_manifest;
  fs::path work_dir = ".";
  std::string tr_scenario = "all";
  std::size_t tr_n_train = 500;
  std::size_t tr_n_test = 100;
  std::string tr_kernel = "rbf";
  double tr_gamma = 0.0;
  double tr_c = 10.0;
  unsigned threads = 0;
  train->add_option("records", tr_in, "Record files named <stem>_<rp_id>.tsv")->required();
  train->add_option("--manifest", tr_manifest, "Grid manifest from gen-survey")->required();
  train->add_option("--work-dir", work_dir, "Where radio maps and models go")->capture_default_str();
  train->add_option("--scenario", tr_scenario, "Feature set")
      ->check(CLI::IsMember({"rss_only", "taps_only", "rss_plus_taps", "all"}))->capture_default_str();
  train->add_option("--n-train", tr_n_train, "Training samples per RP")->capture_default_str();
  train->add_option("--n-test", tr_n_test, "Test samples per RP")->capture_default_str();
  train->add_option("--kernel", tr_kernel, "SVM kernel")->check(CLI::IsMember({"rbf", "linear"}))
      ->capture_default_str();
  train->add_option("--gamma", tr_gamma, "RBF gamma (0 = 1 / (features x variance))")->capture_default_str();
  train->add_option("--svm-c", tr_c, "Soft-margin C")->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score trained models on their held-out test maps");
  std::string ev_scenario = "all";
  int ev_knn = 0;
  fs::path ev_out;
  evaluate_cmd->add_option("--work-dir", work_dir, "Directory written by train")->capture_default_str();
  evaluate_cmd->add_option("--scenario", ev_scenario, "Feature set")
      ->check(CLI::IsMember({"rss_only", "taps_only", "rss_plus_taps", "all"}))->capture_default_str();
  evaluate_cmd->add_option("--knn", ev_knn, "Also report a k-NN baseline with this k (0 = off)")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  evaluate_cmd->add_option("--out", ev_out, "Report path (default: <work-dir>/report.txt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const EngineConfig engine = rx.engine();

    if (*gen_beacon) {
      SyntheticStreamSpec spec;
      spec.profile = gb_chan.profile();
      spec.ssid = gb_ssid;
      spec.bssid = MacAddress::parse(gb_mac);
      spec.channel = static_cast<std::uint8_t>(gb_channel);
      spec.beacon_interval_tu = gb_interval;
      spec.sample_rate = gb_rate;
      spec.full_scale = gb_full_scale;
      spec.seed = seed;
      spec.first_beacon_s = 1e-3;
      BeaconSpec b;
      b.ssid = gb_ssid;
      const double airtime = static_cast<double>(build_beacon(b).size()) / kSymbolRateHz;
      spec.duration_s = spec.first_beacon_s + (gb_count - 1) * TimeUnit{gb_interval}.seconds() + airtime + 1e-3;
      SyntheticBeaconSource source(spec, 1 << 16);
      IqFileWriter writer(gb_out, gb_full_scale);
      SampleBlock block;
      while (source.next(block)) writer.write(block.samples);
      writer.close();
      write_capture_meta(gb_out, CaptureMeta{gb_rate, gb_full_scale});
      std::cout << "wrote " << source.beacon_count() << " beacons, " << writer.samples_written() << " samples to "
                << gb_out.string() << "\n";
      if (writer.clipped() != 0) std::cout << "warning: " << writer.clipped() << " clipped components\n";
      return 0;
    }

    if (*gen_survey) {
      SurveyScenario sc;
      sc.grid = parse_grid(gs_grid, gs_spacing);
      sc.profile_per_rp = gen_profiles(sc.grid, gs_model, seed);
      sc.beacons_per_rp = gs_beacons;
      sc.beacon_interval_tu = gs_interval;
      sc.sample_rate = gs_rate;
      sc.variation.tap_sigma = gs_tap_sigma;
      sc.variation.gain_sigma_db = gs_gain_sigma;
      sc.variation.pdp = gs_model.power_delay_profile();
      try {
        sc.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const SurveyOutput out = synth_survey(sc, seed, gs_dir);
      write_stanza_sidecar(out.manifest, stanza_for(app, *gen_survey, seed));
      std::cout << "wrote " << out.capture_files.size() << " captures and " << out.manifest.string() << "\n";
      return 0;
    }

    if (*decode) {
      if (dec_out.empty()) {
        dec_out = dec_in;
        dec_out.replace_extension(".tsv");
      }
      EngineConfig cfg = engine;
      cfg.output_path = dec_out;
      const EngineSummary s = run_file(dec_in, cfg);
      write_stanza_sidecar(dec_out, stanza_for(app, *decode, seed));
      print_summary(s, std::cout);
      return 0;
    }

    if (*survey) {
      std::sort(sv_in.begin(), sv_in.end(), [](const fs::path& a, const fs::path& b) {
        return rp_id_from_path(a) < rp_id_from_path(b);
      });
      const ReproStanza st = stanza_for(app, *survey, seed);
      for (const auto& in : sv_in) {
        const int id = rp_id_from_path(in);
        EngineConfig cfg = engine;
        cfg.output_path = location_path(sv_out, id);
        const EngineSummary s = run_file(in, cfg);
        write_stanza_sidecar(cfg.output_path, st);
        std::cout << cfg.output_path.string() << ": ";
        print_summary(s, std::cout);
      }
      return 0;
    }

    if (*train) {
      fs::create_directories(work_dir);
      require_file(tr_manifest, "manifest");
      SvmParams params;
      params.kernel = tr_kernel == "linear" ? KernelType::Linear : KernelType::Rbf;
      params.gamma = tr_gamma;
      params.c = tr_c;
      params.threads = threads;
      const std::string stanza = format_stanza(stanza_for(app, *train, seed), "");
      for (FeatureSet set : scenarios(tr_scenario)) {
        const RadioMap map = build_radio_map(tr_in, tr_manifest, set, rx.n_taps);
        auto [tr_map, te_map] = split_train_test(map, tr_n_train, tr_n_test, seed);
        for (const auto& w : tr_map.warnings) std::cout << "warning: " << w << "\n";
        const SvmModel model = svm_train(tr_map, params);
        write_radio_map(tr_map, train_map_path(work_dir, set), stanza);
        write_radio_map(te_map, test_map_path(work_dir, set), stanza);
        model.save(model_path(work_dir, set), stanza);
        std::cout << to_string(set) << ": " << tr_map.samples.size() << " training rows, "
                  << model.classes.size() << " RPs, " << model.pairs.size() << " pair classifiers, "
                  << model.support_vectors.size() << " support vectors -> " << model_path(work_dir, set).string()
                  << "\n";
      }
      return 0;
    }

    if (*evaluate_cmd) {
      if (ev_out.empty()) ev_out = work_dir / "report.txt";
      std::vector<EvalReport> reports;
      for (FeatureSet set : scenarios(ev_scenario)) {
        const SvmModel model = SvmModel::load(require_file(model_path(work_dir, set), "model"));
        const RadioMap test = read_radio_map(require_file(test_map_path(work_dir, set), "test radio map"));
        EvalReport r = evaluate(model, test, test.rps);
        const std::string stanza = format_stanza(stanza_for(app, *evaluate_cmd, seed), "");
        write_cdf(r, work_dir / ("cdf_" + std::string(to_string(set)) + ".tsv"), stanza);
        reports.push_back(std::move(r));
        if (ev_knn > 0) {
          const RadioMap tr = read_radio_map(require_file(train_map_path(work_dir, set), "training radio map"));
          reports.push_back(knn_baseline(tr, test, ev_knn));
        }
      }
      const std::string stanza = format_stanza(stanza_for(app, *evaluate_cmd, seed), "");
      write_report(reports, ev_out, stanza);
      std::cout << format_report(reports);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
