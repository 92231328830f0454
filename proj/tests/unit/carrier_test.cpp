#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support/helpers.hpp"
#include "wlanips/carrier.hpp"
#include "wlanips/dsss_modem.hpp"
#include "wlanips/sync_detector.hpp"

using namespace wlanips;

TEST_CASE("estimator range follows the lag count") {
  CHECK(cfo_range_hz(16) == doctest::Approx(kChipRateHz / (2.0 * 17.0)));
  CHECK(cfo_range_hz(1) > cfo_range_hz(16));
}

TEST_CASE("Luise-Reggiannini recovers offsets across the range") {
  for (double f : {-60e3, -12.5e3, 0.0, 3e3, 60e3}) {
    ChannelProfile p;
    p.cfo_hz = f;
    p.snr_db = 20.0;
    const IqStream x = testing::beacon_capture(testing::test_beacon(), p, 17, 0);
    const CfoEstimate e = coarse_cfo_estimate(std::span(x.samples).first(kSyncSamples));
    CHECK(e.reliable);
    CHECK(std::abs(e.hz - f) < 300.0);
  }
}

TEST_CASE("degenerate input is flagged") {
  const std::vector<cf32> zeros(kSyncSamples, cf32{});
  CHECK_FALSE(coarse_cfo_estimate(zeros).reliable);
}

TEST_CASE("exact wipe-off undoes a rotation") {
  std::vector<cf32> x(20000, cf32(0.6F, -0.8F));
  const auto orig = x;
  rotate(x, 51e3, kProcessingRateHz, 777);
  carrier_wipeoff(x, 51e3, kProcessingRateHz, WipeoffMode::Exact, 777);
  for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(x[n] - orig[n]) < 1e-5);
}

TEST_CASE("LUT wipe-off phase error stays within half a table step") {
  std::vector<cf32> x(50000, cf32(1, 0));
  const double f = -23456.0;
  carrier_wipeoff(x, f, kProcessingRateHz, WipeoffMode::QuantizedLut, 1000);
  double worst = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double ideal = -2.0 * std::numbers::pi * f * static_cast<double>(1000 + n) / kProcessingRateHz;
    double err = std::remainder(std::arg(cf64(x[n])) - ideal, 2.0 * std::numbers::pi);
    worst = std::max(worst, std::abs(err));
    CHECK(std::abs(std::abs(x[n]) - 1.0F) < 1e-3F);
  }
  CHECK(worst <= kCarrierLutStep / 2.0 + 1e-4);
  CHECK(worst > 0.0);
}

TEST_CASE("reference phase and correction") {
  const auto& ref = sync_chips();
  std::vector<cf32> x(ref.size());
  const cf32 rot = std::polar(1.0F, -1.2F);
  for (std::size_t k = 0; k < ref.size(); ++k) x[k] = ref[k] * rot;
  CHECK(reference_phase(x, ref) == doctest::Approx(-1.2).epsilon(1e-5));
  const auto y = phase_correct(std::span<const cf32>(x), ref);
  for (std::size_t k = 0; k < ref.size(); k += 101) CHECK(std::abs(y[k] - cf32(ref[k], 0)) < 1e-4F);
}
