#include <numeric>

#include "doctest.h"
#include "support/helpers.hpp"
#include "wlanips/dsss_modem.hpp"
#include "wlanips/phy_frames.hpp"

using namespace wlanips;

TEST_CASE("DBPSK encode then demodulate returns the bits") {
  const Bits in = testing::random_bits(257, 5);
  const std::vector<int> sym = dbpsk_encode(in, +1);
  std::vector<cf32> s{cf32(1.0F, 0.0F)};
  for (int v : sym) s.emplace_back(static_cast<float>(v), 0.0F);
  CHECK(dbpsk_demod(s) == in);
}

TEST_CASE("DBPSK is insensitive to a common phase rotation") {
  const Bits in = testing::random_bits(64, 6);
  const std::vector<int> sym = dbpsk_encode(in, -1);
  const cf32 rot = std::polar(1.0F, 2.1F);
  std::vector<cf32> s{-rot};
  for (int v : sym) s.push_back(static_cast<float>(v) * rot);
  CHECK(dbpsk_demod(s) == in);
}

TEST_CASE("Barker spreading and despreading") {
  const Bits in = testing::random_bits(40, 7);
  const ChipSequence chips = barker_spread(in);
  REQUIRE(chips.chips.size() == 40 * 11);
  CHECK(chips.symbol_count() == 40);
  const std::vector<cf32> sym = barker_despread(chips);
  const std::vector<int> ref = dbpsk_encode(in);
  REQUIRE(sym.size() == ref.size());
  for (std::size_t k = 0; k < sym.size(); ++k) CHECK(sym[k].real() == doctest::Approx(ref[k]));
  const ChipSequence x2 = oversample(chips, 2);
  CHECK(x2.chips.size() == chips.chips.size() * 2);
  CHECK(x2.symbol_count() == 40);
}

TEST_CASE("chip integration averages sample pairs") {
  const std::vector<cf32> s{{1, 0}, {3, 0}, {5, 1}, {7, 1}, {9, 0}};
  const auto c = chip_samples(s, 0, 2);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == cf32(2, 0));
  CHECK(c[1] == cf32(6, 1));
  CHECK(chip_samples(s, 1, 10).size() == 2);
}

TEST_CASE("transmit waveform length and power") {
  const Bits ppdu = build_beacon(testing::test_beacon());
  const IqStream w22 = tx_waveform(ppdu, kProcessingRateHz);
  CHECK(w22.samples.size() == ppdu.size() * kSamplesPerSymbol);
  const double p = std::accumulate(w22.samples.begin(), w22.samples.end(), 0.0,
                                   [](double a, cf32 v) { return a + std::norm(v); }) /
                   static_cast<double>(w22.samples.size());
  CHECK(p == doctest::Approx(1.0).epsilon(1e-6));
  const IqStream w25 = tx_waveform(ppdu, kCaptureRateHz);
  CHECK(w25.sample_rate == kCaptureRateHz);
  CHECK(static_cast<double>(w25.samples.size()) ==
        doctest::Approx(static_cast<double>(w22.samples.size()) * 25.0 / 22.0).epsilon(0.01));
  CHECK_THROWS_AS(tx_waveform(ppdu, 20e6), std::invalid_argument);
}

TEST_CASE("SYNC reference tables") {
  CHECK(sync_symbols().size() == kSyncBits);
  CHECK(sync_chips().size() == kSyncBits * kChipsPerSymbol);
  for (std::size_t c = 0; c < 11; ++c) {
    CHECK(sync_chips()[c] == static_cast<float>(sync_symbols()[0] * kBarker[c]));
  }
}
