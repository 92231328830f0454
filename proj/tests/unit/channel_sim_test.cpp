#include <cmath>
#include <numeric>

#include "doctest.h"
#include "support/helpers.hpp"
#include "wlanips/channel_sim.hpp"

using namespace wlanips;

TEST_CASE("multipath taps sit one chip apart after the delay") {
  std::vector<cf32> x(10, cf32{});
  x[0] = cf32(1, 0);
  ChannelProfile p;
  p.taps = {cf64(1, 0), cf64(0, 0.5), cf64(-0.25, 0)};
  p.delay_samples = 3;
  const auto y = convolve_channel(x, kProcessingRateHz, p);
  CHECK(y.size() == 10 + 3 + 4);
  CHECK(y[3] == cf32(1, 0));
  CHECK(y[5] == cf32(0, 0.5F));
  CHECK(y[7] == cf32(-0.25F, 0));
  CHECK(y[4] == cf32{});
  CHECK_THROWS_AS(convolve_channel(x, kCaptureRateHz, p), std::invalid_argument);
}

TEST_CASE("gain scales amplitude") {
  ChannelProfile p;
  p.gain_db = 20.0;
  const std::vector<cf32> x{cf32(1, 0)};
  CHECK(convolve_channel(x, kProcessingRateHz, p)[0].real() == doctest::Approx(10.0));
}

TEST_CASE("profile validation") {
  ChannelProfile p;
  p.taps = {};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.taps = {cf64(0, 0)};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.taps = {cf64(1, 0)};
  p.delay_samples = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("rotation matches the closed form") {
  std::vector<cf32> x(5000, cf32(1, 0));
  rotate(x, 37e3, kProcessingRateHz, 123456);
  for (std::size_t n = 0; n < x.size(); n += 97) {
    const double ph = 2.0 * std::numbers::pi * 37e3 * static_cast<double>(123456 + n) / kProcessingRateHz;
    CHECK(x[n].real() == doctest::Approx(std::cos(ph)).epsilon(1e-5));
    CHECK(x[n].imag() == doctest::Approx(std::sin(ph)).epsilon(1e-5));
  }
}

TEST_CASE("noise generators hit the requested power") {
  std::vector<cf32> a(200000, cf32{});
  std::mt19937_64 rng(4);
  add_awgn(a, 0.5, rng);
  std::vector<cf32> b(200000, cf32{});
  std::uint64_t state = 9;
  add_table_awgn(b, 0.5, state);
  for (const auto* v : {&a, &b}) {
    double p = 0.0;
    cf64 mean{};
    for (const auto& s : *v) {
      p += std::norm(s);
      mean += cf64(s);
    }
    CHECK(p / static_cast<double>(v->size()) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(mean) / static_cast<double>(v->size()) < 0.01);
  }
}

TEST_CASE("apply_channel sets SNR relative to the reference power") {
  IqStream x{std::vector<cf32>(100000, cf32(1, 0)), kProcessingRateHz};
  ChannelProfile p;
  p.snr_db = 10.0;
  const IqStream y = apply_channel(x, p, 3, 1.0);
  double noise = 0.0;
  for (const auto& s : y.samples) noise += std::norm(s - cf32(1, 0));
  CHECK(noise / static_cast<double>(y.samples.size()) == doctest::Approx(0.1).epsilon(0.03));
  CHECK(apply_channel(x, p, 3, 1.0).samples == y.samples);
}

TEST_CASE("default survey grid: 69 points at 2 ft") {
  const auto g = default_survey_grid();
  REQUIRE(g.size() == 69);
  CHECK(g.front().rp_id == 1);
  CHECK(g.back().rp_id == 69);
  CHECK(g[1].x_m - g[0].x_m == doctest::Approx(0.6096));
  CHECK(make_grid(3, 3, 1.0).size() == 9);
  CHECK(make_grid(3, 3, 1.0, 4).size() == 4);
}

TEST_CASE("generated profiles follow the model and are seed-deterministic") {
  ChannelModelParams params;
  const auto grid = default_survey_grid();
  const auto a = gen_profiles(grid, params, 5);
  const auto b = gen_profiles(grid, params, 5);
  const auto c = gen_profiles(grid, params, 6);
  REQUIRE(a.size() == 69);
  CHECK(a.at(10).taps == b.at(10).taps);
  CHECK(a.at(10).taps != c.at(10).taps);
  for (const auto& [id, p] : a) {
    CHECK(p.taps.size() == static_cast<std::size_t>(params.n_taps));
    CHECK(p.snr_db == doctest::Approx(params.snr_at_ref_db + p.gain_db));
  }
  const auto pdp = params.power_delay_profile();
  CHECK(std::accumulate(pdp.begin(), pdp.end(), 0.0) == doctest::Approx(1.0));
  CHECK(pdp[0] > pdp[4]);
}

TEST_CASE("neighbouring points are more alike than distant ones") {
  ChannelModelParams params;
  params.shadowing_sigma_db = 0.0;
  const auto grid = make_grid(40, 1, 0.25);
  double near = 0.0;
  double far = 0.0;
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto prof = gen_profiles(grid, params, seed);
    for (int i = 1; i + 30 <= 40; ++i) {
      near += std::norm(prof.at(i).taps[0] - prof.at(i + 1).taps[0]);
      far += std::norm(prof.at(i).taps[0] - prof.at(i + 30).taps[0]);
      ++n;
    }
  }
  CHECK(near < 0.5 * far);
}

TEST_CASE("manifest round trip") {
  SurveyScenario s;
  s.grid = make_grid(2, 2, 0.6096);
  s.profile_per_rp = gen_profiles(s.grid, ChannelModelParams{}, 2);
  const auto dir = testing::scratch_dir("manifest");
  write_manifest(dir / "m.tsv", s);
  const auto rows = read_manifest(dir / "m.tsv");
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    const auto& p = s.profile_per_rp.at(r.point.rp_id);
    CHECK(r.point.x_m == doctest::Approx(s.grid[static_cast<std::size_t>(r.point.rp_id - 1)].x_m));
    CHECK(r.profile.snr_db == doctest::Approx(p.snr_db));
    for (std::size_t d = 0; d < p.taps.size(); ++d) CHECK(std::abs(r.profile.taps[d] - p.taps[d]) < 1e-8);
  }
}

TEST_CASE("survey capture: chunked generation is deterministic and sized") {
  SurveyScenario s;
  s.grid = make_grid(2, 1, 0.6096);
  s.profile_per_rp = gen_profiles(s.grid, ChannelModelParams{}, 3);
  s.beacons_per_rp = 3;
  s.beacon_interval_tu = 2;
  s.sample_rate = kProcessingRateHz;
  const IqStream a = synth_rp_stream(s, 1, 8);
  const IqStream b = synth_rp_stream(s, 1, 8);
  CHECK(a.samples == b.samples);
  const double expected = (s.first_beacon_s + 3 * TimeUnit{2}.seconds()) * kProcessingRateHz;
  CHECK(std::abs(static_cast<double>(a.samples.size()) - expected) <= 1.0);
  CHECK(synth_rp_stream(s, 2, 8).samples != a.samples);
  s.sample_rate = 20e6;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("per-RP seeds differ") {
  CHECK(rp_seed(1, 1) != rp_seed(1, 2));
  CHECK(rp_seed(1, 1) != rp_seed(2, 1));
  CHECK(rp_seed(7, 3) == rp_seed(7, 3));
}
