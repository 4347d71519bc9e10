#pragma once

#include <cstddef>
#include <vector>

#include "hjbpath/geometry.hpp"
#include "hjbpath/terrain.hpp"

namespace hjbpath {

/// Walking-speed law V(S) = v0 * exp(-(100 S + slope_shift)^2 / denom) with a
/// multiplicative penalty on steep cross-path grades.
struct SpeedModel {
  double v0 = 1.11;
  double slope_shift = 2.0;
  double denom = 2345.0;
  /// Cross-path grade tolerated before the penalty starts.
  double pen_threshold = 0.5;
  /// Grade scale of the Gaussian penalty roll-off.
  double pen_width = 0.2;

  /// Throws ValidationError unless v0, denom, pen_width > 0 and
  /// pen_threshold >= 0.
  void validate() const;

  /// Upper bound of the effective speed over all slopes and directions.
  double max_speed() const { return v0; }
};

/// A unit walking direction on the circle.
struct DirectionSample {
  double angle = 0.0;
  Vec2 dir{1.0, 0.0};

  static DirectionSample from_angle(double theta);
};

/// `count` equally spaced angles 2*pi*k/count, k = 0..count-1.
class DirectionSet {
 public:
  explicit DirectionSet(std::size_t count);

  std::size_t size() const { return dirs_.size(); }
  const DirectionSample& operator[](std::size_t k) const { return dirs_[k]; }
  auto begin() const { return dirs_.begin(); }
  auto end() const { return dirs_.end(); }

 private:
  std::vector<DirectionSample> dirs_;
};

/// V(S). Strictly positive for finite S (underflow is floored at the
/// smallest normal double).
double base_speed(const SpeedModel& model, double grade);

/// Penalty factor for a cross-path grade magnitude q: 1 up to the threshold,
/// then exp(-(q - q_c)^2 / w^2).
double cross_slope_penalty(const SpeedModel& model, double cross_grade);

/// Speed when walking along unit direction `s` on terrain of slope `grad`:
/// V(grad.s) times the penalty of |grad.s_perp|.
double effective_speed(const SpeedModel& model, SlopeVector grad, Vec2 s);

}  // namespace hjbpath
