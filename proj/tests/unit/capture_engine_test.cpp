#include <thread>

#include "doctest.h"
#include "support/helpers.hpp"
#include "wlanips/capture_engine.hpp"
#include "wlanips/iq_file.hpp"

using namespace wlanips;

namespace {

SyntheticStreamSpec short_stream(double duration_s, std::uint64_t seed = 1) {
  SyntheticStreamSpec s;
  s.duration_s = duration_s;
  s.first_beacon_s = 0.01;
  s.beacon_interval_tu = 20;
  s.profile.taps = {cf64(0.9, 0.1), cf64(0.3, -0.2)};
  s.profile.cfo_hz = 12e3;
  s.profile.snr_db = 25.0;
  s.profile.delay_samples = 24;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("engine config validation") {
  EngineConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_packets = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = EngineConfig{};
  c.queue_depth = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("memory source hands out every sample once") {
  IqStream s{std::vector<cf32>(10'000), 22e6};
  for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i] = cf32(static_cast<float>(i), 0);
  MemorySource src(s, 3000);
  SampleBlock b;
  std::uint64_t expect = 0;
  while (src.next(b)) {
    CHECK(b.stream_offset == expect);
    for (std::size_t i = 0; i < b.samples.size(); ++i) CHECK(b.samples[i].real() == static_cast<float>(expect + i));
    expect += b.samples.size();
  }
  CHECK(expect == 10'000);
}

TEST_CASE("bounded queue") {
  SUBCASE("drop oldest keeps the newest items") {
    BoundedQueue<int> q(3, OverflowPolicy::DropOldest);
    for (int i = 0; i < 7; ++i) CHECK(q.push(i));
    CHECK(q.dropped() == 4);
    q.close();
    std::vector<int> got;
    while (auto v = q.pop()) got.push_back(*v);
    CHECK(got == std::vector<int>{4, 5, 6});
  }
  SUBCASE("blocking queue passes everything between threads") {
    BoundedQueue<int> q(2);
    std::thread producer([&] {
      for (int i = 0; i < 1000; ++i) q.push(i);
      q.close();
    });
    long long sum = 0;
    int n = 0;
    while (auto v = q.pop()) {
      sum += *v;
      ++n;
    }
    producer.join();
    CHECK(n == 1000);
    CHECK(sum == 999LL * 1000 / 2);
    CHECK(q.dropped() == 0);
  }
  SUBCASE("push after close is refused") {
    BoundedQueue<int> q(2);
    q.close();
    CHECK_FALSE(q.push(1));
    CHECK_FALSE(q.pop());
  }
}

TEST_CASE("sleep gate arithmetic") {
  CHECK(sleep_gate(1.0, 90.0, 1.001, 25e6) == 27'250'000);
  CHECK(sleep_gate(1.0, 0.0, 1.001, 25e6) == 25'025'000);
  CHECK(sleep_gate(0.0, 0.0, 1e-6, 25e6, 25) == 25);
  CHECK(sleep_gate(0.0, 0.0, 1.04e-6, 25e6, 25) == 50);
  CHECK(sleep_gate(-1.0, 0.0, -0.5, 25e6) == 0);
}

TEST_CASE("every beacon decodes once without sleep") {
  SyntheticBeaconSource src(short_stream(0.25), 4096);
  const int expected = src.beacon_count();
  CHECK(expected == 12);
  EngineConfig cfg;
  const EngineSummary s = run(src, cfg);
  CHECK(static_cast<int>(s.records.size()) == expected);
  CHECK(s.samples_in == s.samples_processed);
  CHECK(s.blocks_dropped == 0);
  for (std::size_t i = 1; i < s.records.size(); ++i) {
    CHECK(s.records[i].time_s - s.records[i - 1].time_s == doctest::Approx(20 * 1024e-6).epsilon(1e-4));
  }
  CHECK(s.stream_seconds == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("threaded and single-threaded runs agree") {
  EngineConfig cfg;
  SyntheticBeaconSource a(short_stream(0.2, 7), 5000);
  const EngineSummary t = run(a, cfg);
  cfg.threaded = false;
  SyntheticBeaconSource b(short_stream(0.2, 7), 5000);
  const EngineSummary u = run(b, cfg);
  CHECK(t.records == u.records);
  CHECK(t.stats == u.stats);
  CHECK(t.samples_processed == u.samples_processed);
}

TEST_CASE("block size does not change the output") {
  EngineConfig cfg;
  SyntheticBeaconSource a(short_stream(0.15, 3), 2048);
  SyntheticBeaconSource b(short_stream(0.15, 3), 50'000);
  CHECK(run(a, cfg).records == run(b, cfg).records);
}

TEST_CASE("max packets stops early") {
  EngineConfig cfg;
  cfg.max_packets = 3;
  SyntheticBeaconSource src(short_stream(0.3), 4096);
  CHECK(run(src, cfg).records.size() == 3);
}

TEST_CASE("sleeping past the next beacon skips it") {
  EngineConfig cfg;
  cfg.sleep_enabled = true;
  cfg.sleep_ms = 30.0;  // interval is 20.48 ms
  SyntheticBeaconSource src(short_stream(0.25), 4096);
  const EngineSummary s = run(src, cfg);
  CHECK(s.records.size() == 6);
  CHECK(s.samples_processed < s.samples_in);
  for (std::size_t i = 1; i < s.records.size(); ++i) {
    CHECK(s.records[i].time_s - s.records[i - 1].time_s == doctest::Approx(2 * 20 * 1024e-6).epsilon(1e-4));
  }
}

TEST_CASE("short sleep never decodes a packet twice") {
  EngineConfig cfg;
  cfg.sleep_enabled = true;
  cfg.sleep_ms = 0.0;
  SyntheticBeaconSource src(short_stream(0.25), 4096);
  CHECK(run(src, cfg).records.size() == 12);
}

TEST_CASE("file capture round trip through the engine") {
  const auto dir = testing::scratch_dir("engine_file");
  SyntheticBeaconSource src(short_stream(0.1), 1 << 16);
  IqFileWriter w(dir / "cap.iq");
  SampleBlock b;
  while (src.next(b)) w.write(b.samples);
  w.close();
  write_capture_meta(dir / "cap.iq", CaptureMeta{});

  EngineConfig cfg;
  cfg.output_path = dir / "cap.tsv";
  const EngineSummary s = run_file(dir / "cap.iq", cfg);
  CHECK(s.records.size() == 5);
  CHECK(std::filesystem::exists(dir / "cap.tsv"));

  std::ofstream(dir / "empty.iq", std::ios::binary).flush();
  CHECK(run_file(dir / "empty.iq", EngineConfig{}).records.empty());
}
