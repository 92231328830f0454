#include "doctest.h"
#include "wlanips/survey.hpp"

using namespace wlanips;

namespace {

SurveyScenario small_scenario(std::uint64_t seed) {
  SurveyScenario s = make_survey_scenario(ChannelModelParams{}, seed, 30);
  s.grid.resize(4);
  std::map<int, ChannelProfile> keep;
  for (const auto& p : s.grid) keep[p.rp_id] = s.profile_per_rp.at(p.rp_id);
  s.profile_per_rp = keep;
  return s;
}

}  // namespace

TEST_CASE("survey scenario") {
  const SurveyScenario s = make_survey_scenario(ChannelModelParams{}, 1);
  CHECK(s.grid.size() == 69);
  CHECK(s.profile_per_rp.size() == 69);
  CHECK(s.beacons_per_rp == 600);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("in-memory survey yields the requested records deterministically") {
  const SurveyScenario s = small_scenario(2);
  SurveySimOptions o;
  o.records_per_rp = 25;
  o.threads = 2;
  RxStats stats;
  const auto a = simulate_survey_records(s, RxConfig{}, 2, o, &stats);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rp_id == s.grid[i].rp_id);
    CHECK(a[i].records.size() == 25);
  }
  CHECK(stats.records == 100);

  o.threads = 1;
  const auto b = simulate_survey_records(s, RxConfig{}, 2, o);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].records == b[i].records);

  const auto one = simulate_rp_records(s, s.grid[2].rp_id, RxConfig{}, 2, o);
  CHECK(one.records == a[2].records);

  const auto other = simulate_survey_records(s, RxConfig{}, 3, o);
  CHECK(other[0].records != a[0].records);
}

TEST_CASE("records at one RP differ from beacon to beacon but stay near the profile") {
  const SurveyScenario s = small_scenario(4);
  SurveySimOptions o;
  o.records_per_rp = 20;
  const auto m = simulate_rp_records(s, 1, RxConfig{}, 4, o);
  REQUIRE(m.records.size() == 20);
  CHECK(m.records[0].taps != m.records[1].taps);
  double lo = 1e9;
  double hi = -1e9;
  for (const auto& r : m.records) {
    lo = std::min(lo, r.rssi_dbm);
    hi = std::max(hi, r.rssi_dbm);
    CHECK(r.ssid == s.ssid);
    CHECK(r.taps.size() == 5);
  }
  CHECK(hi - lo < 15.0);
  CHECK(hi - lo > 0.1);
}
