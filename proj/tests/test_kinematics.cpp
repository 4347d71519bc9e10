#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hjbpath/error.hpp"
#include "hjbpath/kinematics.hpp"

using namespace hjbpath;

namespace {

Vec2 rotate(Vec2 v, double a) {
  return {std::cos(a) * v.x - std::sin(a) * v.y, std::sin(a) * v.x + std::cos(a) * v.y};
}

}  // namespace

TEST(BaseSpeed, PeakAtSlightDownhill) {
  const SpeedModel m;
  EXPECT_DOUBLE_EQ(base_speed(m, -0.02), 1.11);
}

TEST(BaseSpeed, LevelGround) {
  const SpeedModel m;
  EXPECT_NEAR(base_speed(m, 0.0), 1.11 * std::exp(-4.0 / 2345.0), 1e-15);
  EXPECT_NEAR(base_speed(m, 0.0), 1.108108, 5e-7);
}

TEST(BaseSpeed, PositiveForSteepGrades) {
  const SpeedModel m;
  for (double s : {-50.0, -5.0, 3.0, 40.0, 1e6}) {
    EXPECT_GT(base_speed(m, s), 0.0) << s;
    EXPECT_LE(base_speed(m, s), 1.11);
  }
}

TEST(BaseSpeed, MaximumOverScan) {
  const SpeedModel m;
  double best = 0.0;
  double arg = 0.0;
  for (int n = -10000; n <= 10000; ++n) {
    const double s = n * 1e-4;
    const double v = base_speed(m, s);
    if (v > best) {
      best = v;
      arg = s;
    }
  }
  EXPECT_NEAR(best, 1.11, 1e-9);
  EXPECT_NEAR(arg, -0.02, 1e-9);
}

TEST(SpeedModel, Validation) {
  SpeedModel m;
  EXPECT_NO_THROW(m.validate());
  m.v0 = 0.0;
  EXPECT_THROW(m.validate(), ValidationError);
  m = {};
  m.denom = -1.0;
  EXPECT_THROW(m.validate(), ValidationError);
  m = {};
  m.pen_width = 0.0;
  EXPECT_THROW(m.validate(), ValidationError);
  m = {};
  m.pen_threshold = -0.1;
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(EffectiveSpeed, FlatIsIsotropic) {
  const SpeedModel m;
  for (const auto& d : DirectionSet(16))
    EXPECT_DOUBLE_EQ(effective_speed(m, {0.0, 0.0}, d.dir), base_speed(m, 0.0));
}

TEST(EffectiveSpeed, ContourOfSteepCliffIsPenalized) {
  const SpeedModel m;
  const double f = effective_speed(m, {2.0, 0.0}, {0.0, 1.0});
  EXPECT_LT(f, 1e-20);
  EXPECT_GT(f, 0.0);
  EXPECT_NEAR(f / base_speed(m, 0.0), std::exp(-1.5 * 1.5 / 0.04), 1e-30);
}

TEST(EffectiveSpeed, AlongTheFallLineHasNoPenalty) {
  const SpeedModel m;
  EXPECT_DOUBLE_EQ(effective_speed(m, {0.3, 0.0}, {1.0, 0.0}), base_speed(m, 0.3));
}

TEST(EffectiveSpeed, BoundedAndPositive) {
  const SpeedModel m;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> g(-5.0, 5.0);
  std::uniform_real_distribution<double> a(0.0, 2.0 * std::numbers::pi);
  for (int n = 0; n < 10000; ++n) {
    const double f = effective_speed(m, {g(rng), g(rng)}, DirectionSample::from_angle(a(rng)).dir);
    EXPECT_GT(f, 0.0);
    EXPECT_LE(f, 1.11);
  }
}

TEST(EffectiveSpeed, DependsOnlyOnAlongAndAbsCrossGrade) {
  const SpeedModel m;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> g(-1.5, 1.5);
  std::uniform_real_distribution<double> a(0.0, 2.0 * std::numbers::pi);
  for (int n = 0; n < 2000; ++n) {
    const Vec2 grad{g(rng), g(rng)};
    const Vec2 s = DirectionSample::from_angle(a(rng)).dir;
    const double f = effective_speed(m, {grad.x, grad.y}, s);
    // Joint rotation keeps both grades.
    const double phi = a(rng);
    const Vec2 rg = rotate(grad, phi);
    EXPECT_NEAR(effective_speed(m, {rg.x, rg.y}, rotate(s, phi)), f, 1e-12);
    // Reflecting the gradient across s flips the sign of the cross grade only.
    const Vec2 refl = 2.0 * dot(grad, s) * s - grad;
    EXPECT_NEAR(effective_speed(m, {refl.x, refl.y}, s), f, 1e-12);
  }
}

TEST(EffectiveSpeed, PenaltyNonincreasingInCrossGrade) {
  const SpeedModel m;
  const Vec2 s{1.0, 0.0};
  for (double along : {-0.3, 0.0, 0.1}) {
    double prev = effective_speed(m, {along, 0.0}, s);
    for (double q = 0.0; q < 2.0; q += 0.01) {
      const double f = effective_speed(m, {along, q}, s);
      EXPECT_LE(f, prev);
      prev = f;
    }
  }
  EXPECT_EQ(cross_slope_penalty(m, 0.5), 1.0);
  EXPECT_LT(cross_slope_penalty(m, 0.6), 1.0);
}

TEST(DirectionSet, UnitVectorsOnEqualAngles) {
  const DirectionSet d(64);
  ASSERT_EQ(d.size(), 64u);
  for (std::size_t k = 0; k < d.size(); ++k) {
    EXPECT_NEAR(d[k].angle, 2.0 * std::numbers::pi * k / 64.0, 1e-15);
    EXPECT_NEAR(norm(d[k].dir), 1.0, 1e-12);
  }
  EXPECT_EQ(d[0].dir, (Vec2{1.0, 0.0}));
}
