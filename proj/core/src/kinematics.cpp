#include "hjbpath/kinematics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "hjbpath/error.hpp"

namespace hjbpath {

namespace {
constexpr double kSpeedFloor = std::numeric_limits<double>::min();
}

void SpeedModel::validate() const {
  if (!(v0 > 0.0) || !std::isfinite(v0)) throw ValidationError("v0 must be positive");
  if (!(denom > 0.0) || !std::isfinite(denom)) throw ValidationError("denom must be positive");
  if (!(pen_width > 0.0) || !std::isfinite(pen_width))
    throw ValidationError("pen_width must be positive");
  if (!(pen_threshold >= 0.0) || !std::isfinite(pen_threshold))
    throw ValidationError("pen_threshold must be non-negative");
  if (!std::isfinite(slope_shift)) throw ValidationError("slope_shift must be finite");
}

DirectionSample DirectionSample::from_angle(double theta) {
  return {theta, {std::cos(theta), std::sin(theta)}};
}

DirectionSet::DirectionSet(std::size_t count) {
  if (count == 0) throw ValidationError("direction set must be non-empty");
  dirs_.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    dirs_.push_back(DirectionSample::from_angle(2.0 * std::numbers::pi * static_cast<double>(k) /
                                                static_cast<double>(count)));
  }
}

double base_speed(const SpeedModel& model, double grade) {
  const double a = 100.0 * grade + model.slope_shift;
  return std::max(model.v0 * std::exp(-a * a / model.denom), kSpeedFloor);
}

double cross_slope_penalty(const SpeedModel& model, double cross_grade) {
  if (cross_grade <= model.pen_threshold) return 1.0;
  const double e = (cross_grade - model.pen_threshold) / model.pen_width;
  return std::exp(-e * e);
}

double effective_speed(const SpeedModel& model, SlopeVector grad, Vec2 s) {
  const Vec2 g = grad.vec();
  const double along = dot(g, s);
  const double across = std::abs(dot(g, perp(s)));
  return std::max(base_speed(model, along) * cross_slope_penalty(model, across), kSpeedFloor);
}

}  // namespace hjbpath
