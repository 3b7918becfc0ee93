#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swof/core.hpp"

using namespace swof;

TEST(ToPrimitive, WetCellDivides) {
  const auto p = to_primitive({2.0, 4.0, 0.0}, 1e-12);
  EXPECT_EQ(p, (PrimitiveState{2.0, 2.0, 0.0}));
}

TEST(ToPrimitive, DryAndBelowThreshold) {
  EXPECT_EQ(to_primitive({0.0, 0.0, 0.0}, 1e-12), (PrimitiveState{0.0, 0.0, 0.0}));
  EXPECT_EQ(to_primitive({1e-13, 1e-13, 0.0}, 1e-12), (PrimitiveState{1e-13, 0.0, 0.0}));
}

TEST(ToPrimitive, RoundTripOnWetStates) {
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> h(0.01, 5.0), u(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const PrimitiveState p{h(gen), u(gen), u(gen)};
    const PrimitiveState back = to_primitive(to_conserved(p));
    EXPECT_EQ(back.h, p.h);
    EXPECT_NEAR(back.u, p.u, 1e-15 * (1 + std::abs(p.u)));
    EXPECT_NEAR(back.v, p.v, 1e-15 * (1 + std::abs(p.v)));
  }
}

TEST(WaveSpeeds, DryCellCollapses) {
  const auto w = wave_speeds(0.0, 3.0, 9.81);
  EXPECT_EQ(w.lambda1, 3.0);
  EXPECT_EQ(w.lambda2, 3.0);
}

TEST(WaveSpeeds, StillWater) {
  const double c = std::sqrt(9.81);
  const auto w = wave_speeds(1.0, 0.0, 9.81);
  EXPECT_NEAR(w.lambda1, -c, 1e-12 * c);
  EXPECT_NEAR(w.lambda2, c, 1e-12 * c);
  EXPECT_NEAR(w.lambda2, 3.13209, 1e-5);
}

TEST(WaveSpeeds, FastFlowHasBothPositive) {
  const double c = std::sqrt(9.81);
  const auto w = wave_speeds(1.0, 10.0, 9.81);
  EXPECT_NEAR(w.lambda1, 10.0 - c, 1e-12 * 10);
  EXPECT_NEAR(w.lambda2, 10.0 + c, 1e-12 * 10);
  EXPECT_NEAR(w.lambda1, 6.86790, 1e-5);
  EXPECT_GT(w.lambda1, 0.0);
}

TEST(WaveSpeeds, OrderedAndEqualOnlyWhenDry) {
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> h(0.0, 4.0), u(-5.0, 5.0);
  for (int k = 0; k < 200; ++k) {
    const double hh = k % 10 == 0 ? 0.0 : h(gen);
    const auto w = wave_speeds(hh, u(gen), 9.81);
    EXPECT_LE(w.lambda1, w.lambda2);
    EXPECT_EQ(w.lambda1 == w.lambda2, hh == 0.0);
  }
}

TEST(FlowRegime, Classification) {
  EXPECT_EQ(flow_regime(1.0, 1.0, 9.81), FlowRegime::Subcritical);
  EXPECT_EQ(flow_regime(1.0, 4.0, 9.81), FlowRegime::Supercritical);
  EXPECT_EQ(flow_regime(0.0, 0.0, 9.81), FlowRegime::Dry);
  EXPECT_EQ(flow_regime(1.0, -4.0, 9.81), FlowRegime::Supercritical);
  EXPECT_EQ(flow_regime(1.0, -1.0, 9.81), FlowRegime::Subcritical);
  EXPECT_EQ(flow_regime(4.0, 2.0, 1.0), FlowRegime::Critical);
}

TEST(TotalVolume, Examples) {
  EXPECT_EQ(total_volume(Raster<double>(10, 10, 1.0), GridGeometry{10, 10, 1, 1, 0, 0}), 100.0);
  EXPECT_EQ(total_volume(Raster<double>(4, 3, 0.0), GridGeometry{4, 3, 1, 1, 0, 0}), 0.0);
  Raster<double> chk(2, 2);
  chk(0, 0) = 2.0;
  chk(1, 1) = 2.0;
  EXPECT_DOUBLE_EQ(total_volume(chk, GridGeometry{2, 2, 0.5, 0.5, 0, 0}), 2 * 2 * 0.25);
}

TEST(TotalVolume, TranspositionInvariant) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> d(0.0, 2.0);
  Raster<double> a(5, 7), t(7, 5);
  for (int j = 0; j < 7; ++j)
    for (int i = 0; i < 5; ++i) t(j, i) = a(i, j) = d(gen);
  const double va = total_volume(a, GridGeometry{5, 7, 0.3, 0.7, 0, 0});
  const double vt = total_volume(t, GridGeometry{7, 5, 0.7, 0.3, 0, 0});
  EXPECT_NEAR(va, vt, 1e-13 * va);
}

TEST(GridGeometry, Validation) {
  EXPECT_THROW((GridGeometry{0, 1, 1, 1, 0, 0}.validate()), ConfigError);
  EXPECT_THROW((GridGeometry{1, 1, -1, 1, 0, 0}.validate()), ConfigError);
  EXPECT_NO_THROW((GridGeometry{3, 2, 0.5, 0.5, 0, 0}.validate()));
}
