#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gridtraffic/core/error.hpp"
#include "gridtraffic/sim/lane_follow.hpp"
#include "oracles.hpp"

namespace gt = gridtraffic;

TEST(LaneFollow, ClosesThenMatchesLeader) {
  const auto d = gt::lane_follow(10.0, gt::Leader{3.0, 4.0}, 1.0);
  EXPECT_DOUBLE_EQ(d.advance, 7.0);
  EXPECT_DOUBLE_EQ(d.new_speed, 4.0);
}

TEST(LaneFollow, NoLeaderCruises) {
  const auto d = gt::lane_follow(5.0, std::nullopt, 1.0);
  EXPECT_DOUBLE_EQ(d.advance, 5.0);
  EXPECT_DOUBLE_EQ(d.new_speed, 5.0);
}

TEST(LaneFollow, LeaderNotSlowerIsIgnored) {
  const auto d = gt::lane_follow(8.0, gt::Leader{4.0, 8.0}, 1.0);
  EXPECT_DOUBLE_EQ(d.advance, 8.0);
  EXPECT_DOUBLE_EQ(d.new_speed, 8.0);
}

TEST(LaneFollow, ClosureBeyondHorizonThenInside) {
  auto d = gt::lane_follow(6.0, gt::Leader{5.0, 2.0}, 1.0);
  EXPECT_DOUBLE_EQ(d.advance, 6.0);
  EXPECT_DOUBLE_EQ(d.new_speed, 6.0);
  // the gap shrank to 5 + 2 - 6 = 1
  d = gt::lane_follow(d.new_speed, gt::Leader{1.0, 2.0}, 1.0);
  EXPECT_DOUBLE_EQ(d.advance, 3.0);
  EXPECT_DOUBLE_EQ(d.new_speed, 2.0);
}

TEST(LaneFollow, FractionalClosure) {
  const auto d = gt::lane_follow(10.0, gt::Leader{2.0, 5.0}, 1.0);
  EXPECT_DOUBLE_EQ(d.advance, 7.0);
  EXPECT_DOUBLE_EQ(d.new_speed, 5.0);
}

TEST(LaneFollow, ZeroGapAdoptsLeaderSpeed) {
  const auto d = gt::lane_follow(9.0, gt::Leader{0.0, 3.0}, 0.5);
  EXPECT_DOUBLE_EQ(d.advance, 1.5);
  EXPECT_DOUBLE_EQ(d.new_speed, 3.0);
}

TEST(LaneFollow, RejectsBadInput) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto code = [](auto f) {
    try {
      f();
    } catch (const gt::Error& e) {
      return e.code();
    }
    return gt::ErrorCode::kIoError;
  };
  EXPECT_EQ(code([] { gt::lane_follow(-1.0, std::nullopt, 1.0); }),
            gt::ErrorCode::kInvalidKinematics);
  EXPECT_EQ(code([&] { gt::lane_follow(1.0, gt::Leader{nan, 1.0}, 1.0); }),
            gt::ErrorCode::kInvalidKinematics);
  EXPECT_EQ(code([] { gt::lane_follow(1.0, gt::Leader{1.0, -2.0}, 1.0); }),
            gt::ErrorCode::kInvalidKinematics);
  EXPECT_EQ(code([] { gt::lane_follow(1.0, std::nullopt, -0.1); }),
            gt::ErrorCode::kInvalidKinematics);
}

// Splitting the horizon in two, with the gap updated in between, gives the
// same total advance as one call.
TEST(LaneFollow, HorizonComposes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> speed(0.0, 20.0), gap(0.0, 30.0), frac(0.05, 0.95);
  for (int n = 0; n < 500; ++n) {
    const double my = speed(rng), fs = speed(rng), dist = gap(rng);
    const double h = 2.0, h1 = h * frac(rng);
    const auto whole = gt::lane_follow(my, gt::Leader{dist, fs}, h);
    const auto a = gt::lane_follow(my, gt::Leader{dist, fs}, h1);
    const double gap1 = std::max(0.0, dist + fs * h1 - a.advance);
    const auto b = gt::lane_follow(a.new_speed, gt::Leader{gap1, fs}, h - h1);
    EXPECT_NEAR(a.advance + b.advance, whole.advance, 1e-9) << my << " " << fs << " " << dist;
    EXPECT_NEAR(b.new_speed, whole.new_speed, 1e-9);
  }
}

// Frozen against the substep integrator.
TEST(LaneFollow, MatchesEulerOracle) {
  struct Case {
    double my, dist, fs, advance, speed;
  };
  const Case cases[] = {
      {10.0, 3.0, 4.0, 7.0, 4.0},
      {8.0, 4.0, 8.0, 8.0, 8.0},
      {10.0, 2.0, 5.0, 7.0, 5.0},
      {12.5, 1.25, 2.5, 3.75, 2.5},
  };
  for (const Case& c : cases) {
    const auto e = oracle::euler_follow(c.my, c.fs, c.dist, 1.0);
    EXPECT_NEAR(e.advance, c.advance, 1e-6);
    EXPECT_NEAR(e.speed, c.speed, 1e-9);
    const auto d = gt::lane_follow(c.my, gt::Leader{c.dist, c.fs}, 1.0);
    EXPECT_NEAR(d.advance, e.advance, 1e-6);
    EXPECT_DOUBLE_EQ(d.new_speed, e.speed);
  }
}
