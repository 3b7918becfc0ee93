#include <gtest/gtest.h>

#include <random>

#include "swof/reconstruction.hpp"

using namespace swof;

TEST(Minmod, Table) {
  EXPECT_EQ(minmod(1, 2), 1);
  EXPECT_EQ(minmod(-1, -3), -1);
  EXPECT_EQ(minmod(1, -1), 0);
  EXPECT_EQ(minmod(0, 5), 0);
}

TEST(MusclSlope, Examples) {
  EXPECT_EQ(muscl_slope(0, 1, 2, 1), 1);
  EXPECT_EQ(muscl_slope(5, 5, 5, 1), 0);
  EXPECT_EQ(muscl_slope(0, 2, 1, 1), 0);  // minmod(2, -1)
}

TEST(ReconstructScalar, Examples) {
  const auto a = reconstruct_scalar(1, 0, 1);
  EXPECT_EQ(a.left, 1);
  EXPECT_EQ(a.right, 1);
  const auto b = reconstruct_scalar(2, 2, 1);
  EXPECT_EQ(b.left, 1);
  EXPECT_EQ(b.right, 3);
  EXPECT_EQ(0.5 * (b.left + b.right), 2);
}

TEST(ReconstructScalar, FacesStayWithinStencil) {
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int k = 0; k < 500; ++k) {
    const double a = d(gen), b = d(gen), c = d(gen), dx = 0.1 + std::abs(d(gen));
    const auto f = reconstruct_scalar(b, muscl_slope(a, b, c, dx), dx);
    const double lo = std::min({a, b, c}), hi = std::max({a, b, c});
    EXPECT_GE(f.left, lo - 1e-14);
    EXPECT_LE(f.left, hi + 1e-14);
    EXPECT_GE(f.right, lo - 1e-14);
    EXPECT_LE(f.right, hi + 1e-14);
    EXPECT_NEAR(0.5 * (f.left + f.right), b, 1e-14);
  }
}

TEST(ReconstructVelocity, UniformHeightReducesToScalar) {
  const auto v = reconstruct_velocity(1.5, 0.4, 2.0, 2.0, 2.0, 0.5);
  const auto s = reconstruct_scalar(1.5, 0.4, 0.5);
  EXPECT_DOUBLE_EQ(v.left, s.left);
  EXPECT_DOUBLE_EQ(v.right, s.right);
}

TEST(ReconstructVelocity, ZeroSlopeAndDryCell) {
  const auto a = reconstruct_velocity(0.7, 0.0, 1.0, 0.8, 1.2, 1.0);
  EXPECT_EQ(a.left, 0.7);
  EXPECT_EQ(a.right, 0.7);
  const auto b = reconstruct_velocity(0.7, 3.0, 0.0, 0.0, 0.0, 1.0);
  EXPECT_EQ(b.left, 0.7);
  EXPECT_EQ(b.right, 0.7);
}

TEST(ReconstructVelocity, FaceDischargesAverageToCellDischarge) {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> h(0.05, 3), u(-2, 2);
  for (int k = 0; k < 500; ++k) {
    const double dx = 0.25;
    const double h0 = h(gen), h1 = h(gen), h2 = h(gen);
    const double u0 = u(gen), u1 = u(gen), u2 = u(gen);
    const auto hf = reconstruct_scalar(h1, muscl_slope(h0, h1, h2, dx), dx);
    const auto uf = reconstruct_velocity(u1, muscl_slope(u0, u1, u2, dx), h1, hf.left, hf.right, dx);
    const double mean = 0.5 * (hf.left * uf.left + hf.right * uf.right);
    EXPECT_NEAR(mean, h1 * u1, 1e-14 * (1 + std::abs(h1 * u1)));
  }
}

TEST(Hydrostatic, FlatInterfaceIsNoOp) {
  const auto r = hydrostatic_reconstruct(0.7, 1.0, 0.3, 1.0, 0.1, -0.2);
  EXPECT_EQ(r.h_left, 0.7);
  EXPECT_EQ(r.h_right, 0.3);
  EXPECT_DOUBLE_EQ(r.u_left.q, 0.07);
  EXPECT_DOUBLE_EQ(r.u_right.q, -0.06);
}

TEST(Hydrostatic, StepBlocksWater) {
  const auto r = hydrostatic_reconstruct(0.5, 1.0, 1.0, 2.0, 0.0, 0.0);
  EXPECT_EQ(r.h_left, 0.0);
  EXPECT_EQ(r.h_right, 1.0);
}

TEST(Hydrostatic, LakeAtRestGivesEqualStates) {
  std::mt19937 gen(6);
  std::uniform_real_distribution<double> z(-1, 3);
  for (int k = 0; k < 200; ++k) {
    const double C = 1.0;
    const double zm = z(gen), zp = z(gen);
    const double hm = std::max(C - zm, 0.0), hp = std::max(C - zp, 0.0);
    const auto r = hydrostatic_reconstruct(hm, zm, hp, zp, 0.0, 0.0);
    if (hm > 0 && hp > 0) {
      EXPECT_NEAR(r.h_left, r.h_right, 1e-15);
    }
    EXPECT_GE(r.h_left, 0.0);
    EXPECT_GE(r.h_right, 0.0);
  }
}

TEST(Hydrostatic, NeverNegative) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> h(0, 2), z(-5, 5), u(-3, 3);
  for (int k = 0; k < 1000; ++k) {
    const auto r = hydrostatic_reconstruct(h(gen), z(gen), h(gen), z(gen), u(gen), u(gen));
    EXPECT_GE(r.h_left, 0.0);
    EXPECT_GE(r.h_right, 0.0);
  }
}

TEST(ReconstructCell, FirstOrderIsIdentity) {
  const StencilCell a{1, 2, 3, 4}, b{0.5, -1, 0.2, 0.3}, c{2, 0, 0, 1};
  const auto f = reconstruct_cell(a, b, c, 1.0, false, 1e-12);
  EXPECT_EQ(f.h_lo, 0.5);
  EXPECT_EQ(f.h_hi, 0.5);
  EXPECT_EQ(f.z_lo, 0.3);
  EXPECT_EQ(f.un_hi, -1);
  EXPECT_EQ(f.ut_lo, 0.2);
}

TEST(ReconstructCell, SurfaceRecoversTopography) {
  // Linear free surface over a linear bed: faces lie on both lines.
  const StencilCell a{1.0, 0, 0, 0.0}, b{0.9, 0, 0, 0.2}, c{0.8, 0, 0, 0.4};
  const auto f = reconstruct_cell(a, b, c, 1.0, true, 1e-12);
  EXPECT_NEAR(f.h_lo, 0.95, 1e-15);
  EXPECT_NEAR(f.h_hi, 0.85, 1e-15);
  EXPECT_NEAR(f.z_lo, 0.1, 1e-15);
  EXPECT_NEAR(f.z_hi, 0.3, 1e-15);
}
