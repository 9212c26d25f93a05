#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "cvcluster/error.hpp"
#include "cvcluster/gaussian.hpp"
#include "cvcluster/pumpsynth.hpp"

using namespace cvc;

namespace {

// Pairs (i, j), i < j by index, whose integer-Hz frequencies sum to an active tone.
std::set<std::pair<int, int>> pairs_by_integer_hz(const PumpScheme& s) {
  const auto hz = [&](int m) { return std::llround(s.basis.frequency_hz(m)); };
  const long long two_f0 = std::llround(2.0 * s.basis.center_hz());
  const long long df = std::llround(s.basis.spacing_hz());
  std::set<long long> tones;
  for (const PumpTone& t : s.tones) {
    if (t.amplitude > 0.0) tones.insert(two_f0 + t.k * df);
  }
  std::set<std::pair<int, int>> out;
  for (int i : s.basis.indices()) {
    for (int j : s.basis.indices()) {
      if (i < j && tones.count(hz(i) + hz(j))) out.insert({i, j});
    }
  }
  return out;
}

std::set<std::pair<int, int>> edge_indices(const AdjacencyMatrix& a) {
  std::set<std::pair<int, int>> out;
  for (const Edge& e : a.edges()) {
    const int i = a.index_of_row(e.row_i), j = a.index_of_row(e.row_j);
    out.insert({std::min(i, j), std::max(i, j)});
  }
  return out;
}

}  // namespace

TEST(PumpScheme, SquareTones) {
  const PumpScheme s = square_scheme(25, 5, 0.1);
  ASSERT_EQ(s.tones.size(), 4u);
  std::set<int> ks;
  for (const PumpTone& t : s.tones) {
    ks.insert(t.k);
    EXPECT_DOUBLE_EQ(t.amplitude, 0.1);
    EXPECT_DOUBLE_EQ(t.phase, t.k == -5 ? std::numbers::pi : 0.0);
  }
  EXPECT_EQ(ks, (std::set<int>{-5, -1, 1, 5}));
  EXPECT_TRUE(s.basis.commensurate());
}

TEST(PumpScheme, SquarePairingMatchesBuilderAndIntegerHz) {
  for (auto [n, nx] : {std::pair{25, 5}, std::pair{81, 9}}) {
    const PumpScheme s = square_scheme(n, nx, 0.2);
    EXPECT_EQ(expected_adjacency(s), build_square_adjacency({LatticeKind::square, n, nx}));
    EXPECT_EQ(edge_indices(expected_adjacency(s)), pairs_by_integer_hz(s));
  }
}

TEST(PumpScheme, HoneycombShiftsCenterToOddHarmonic) {
  const PumpScheme s = honeycomb_scheme(50, 10, 0.1);
  EXPECT_DOUBLE_EQ(s.basis.center_hz(), 4.2005e9);
  EXPECT_TRUE(s.basis.commensurate());
  EXPECT_EQ(expected_adjacency(s), build_honeycomb_adjacency({LatticeKind::honeycomb, 50, 10}));
  EXPECT_EQ(edge_indices(expected_adjacency(s)), pairs_by_integer_hz(s));
  for (const PumpTone& t : s.tones) {
    EXPECT_DOUBLE_EQ(t.phase, t.k == 9 ? std::numbers::pi : 0.0);
  }
}

TEST(PumpScheme, HoneycombPiToneChoice) {
  const PumpScheme s = honeycomb_scheme(50, 10, 0.1, -1);
  for (const PumpTone& t : s.tones) EXPECT_DOUBLE_EQ(t.phase, t.k == -1 ? std::numbers::pi : 0.0);
  EXPECT_THROW(honeycomb_scheme(50, 10, 0.1, 5), Error);
}

TEST(PumpScheme, ZeroAmplitudeHasNoEdges) {
  const PumpScheme s = square_scheme(25, 5, 0.0);
  EXPECT_TRUE(expected_adjacency(s).edges().empty());
  EXPECT_TRUE(coupling_matrix(s).isZero(0.0));
}

TEST(PumpScheme, SinglePumpPairsMirrorModes) {
  const PumpScheme s = single_pump_scheme(9, 0.3);
  EXPECT_EQ(expected_adjacency(s), build_single_pump_adjacency({LatticeKind::single_pump, 9, 0}));
}

TEST(PumpScheme, Validation) {
  PumpScheme s = square_scheme(25, 5, 0.1);
  s.tones.push_back(s.tones.front());
  EXPECT_THROW(s.validate(), Error);
  s = square_scheme(25, 5, 0.1);
  s.tones[0].amplitude = -1.0;
  EXPECT_THROW(s.validate(), Error);
  EXPECT_THROW(square_scheme(25, 5, -0.1), Error);
  EXPECT_THROW(square_scheme(24, 5, 0.1), Error);
}

TEST(PumpScheme, SignedAdjacencyFollowsPhases) {
  const PumpScheme s = square_scheme(25, 5, 0.1);
  const AdjacencyMatrix a = signed_expected_adjacency(s);
  const auto r = [](int m) { return index_to_row(25, OffsetKind::integer, m); };
  EXPECT_EQ(a(r(0), r(1)), -1.0);   // k = +1, phase 0
  EXPECT_EQ(a(r(0), r(-1)), -1.0);  // k = -1, phase 0
  EXPECT_EQ(a(r(0), r(5)), -1.0);   // k = +5, phase 0
  EXPECT_EQ(a(r(0), r(-5)), 1.0);   // k = -5, phase pi
  EXPECT_EQ(a.support(), expected_adjacency(s));
}

TEST(PumpScheme, JsonRoundTrip) {
  const PumpScheme s = honeycomb_scheme(50, 10, 0.123456789);
  EXPECT_EQ(scheme_from_json(scheme_to_json(s)), s);
  EXPECT_EQ(scheme_to_json(scheme_from_json(scheme_to_json(s))), scheme_to_json(s));
}

TEST(PumpScheme, MalformedJsonIsIoError) {
  try {
    scheme_from_json("{\"basis\": 3}");
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(PumpWaveform, SumOfTonesAtZero) {
  const PumpScheme s = square_scheme(25, 5, 0.1);
  EXPECT_NEAR(pump_waveform(s, 0.0), 0.1 * (1 + 1 + 1 - 1), 1e-12);
}

TEST(PumpWaveform, PeriodicOverOneWindow) {
  // Commensurate tones repeat after 1/spacing.
  const PumpScheme s = honeycomb_scheme(50, 10, 0.2);
  const double period = 1.0 / s.basis.spacing_hz();
  for (double t : {1.3e-10, 7.77e-9, 3.1e-7}) {
    EXPECT_NEAR(pump_waveform(s, t), pump_waveform(s, t + period), 1e-9);
    EXPECT_NEAR(pump_waveform(s, t), pump_waveform(s, t + 17 * period), 1e-9);
  }
}

TEST(PumpWaveform, MatchesDirectEvaluationAtSmallTimes) {
  const PumpScheme s = square_scheme(25, 5, 0.1);
  const double t = 3.7e-11;
  double direct = 0.0;
  for (const PumpTone& tone : s.tones) {
    const double omega = 2 * std::numbers::pi * (2 * s.basis.center_hz() + tone.k * s.basis.spacing_hz());
    direct += tone.amplitude * std::cos(omega * t + tone.phase);
  }
  EXPECT_NEAR(pump_waveform(s, t), direct, 1e-9);
}

TEST(WrapPhase, RangeAndIdentity) {
  EXPECT_DOUBLE_EQ(wrap_phase(-std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_phase(2 * std::numbers::pi), 0.0);
  EXPECT_NEAR(wrap_phase(7.0), 7.0 - 2 * std::numbers::pi, 1e-15);
}
