#pragma once

#include <cstddef>
#include <vector>

#include "hjbpath/geometry.hpp"
#include "hjbpath/hamiltonian.hpp"
#include "hjbpath/kinematics.hpp"
#include "hjbpath/solver.hpp"
#include "hjbpath/terrain.hpp"

namespace hjbpath {

/// Spatial gradient of slice k: central differences at interior nodes,
/// one-sided on the boundary, bilinearly interpolated between nodes.
/// Throws DomainError outside the solver box.
Vec2 grad_u_at_slice(const ValueFunction& vf, Vec2 p, std::size_t k);

/// grad_u_at_slice on the slice nearest to forward time t.
Vec2 grad_u_at(const ValueFunction& vf, Vec2 p, double t);

struct ControlValue {
  DirectionSample s;
  /// |grad u| fell below 1e-12 * diam(box); s is then angle 0.
  bool degenerate = false;
  /// f(p, s) for the returned direction.
  double speed = 0.0;
};

/// Optimal steering s*(x, t) = argmin_s f(x, s) (grad u . s) over the
/// sampled directions, for a solved value function.
///
/// Holds references to the value function and the terrain; both must
/// outlive the control field. Queries are read-only and thread safe.
class ControlField {
 public:
  /// Throws ValidationError if the terrain does not cover the solver box.
  ControlField(const ValueFunction& vf, const ElevationField& field, const SpeedModel& model);

  const ValueFunction& value_function() const { return *vf_; }
  const ElevationField& terrain() const { return *field_; }
  const SpeedModel& model() const { return model_; }
  const DirectionSet& directions() const { return dirs_; }

  ControlValue optimal_control(Vec2 p, double t) const;
  ControlValue optimal_control_at_slice(Vec2 p, std::size_t k) const;

  /// Argmin for an explicit gradient at p. Ties go to the smallest angle.
  ControlValue steer(Vec2 p, Vec2 grad_u) const;

 private:
  const ValueFunction* vf_;
  const ElevationField* field_;
  SpeedModel model_;
  DirectionSet dirs_;
  double degenerate_tol_;
};

struct ControlSample {
  std::size_t i = 0;
  std::size_t j = 0;
  Vec2 p;
  ControlValue control;
};

/// Controls on the solver nodes (i, j) with i, j multiples of `stride`.
/// Samples are stored column by column: index a * rows + b for node
/// (a * stride, b * stride).
struct ControlSnapshot {
  double t = 0.0;
  std::size_t stride = 1;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::vector<ControlSample> samples;

  const ControlSample& at(std::size_t a, std::size_t b) const { return samples[a * rows + b]; }
};

/// Throws ValidationError for stride 0 and DomainError for t outside [0, T].
ControlSnapshot control_field_snapshot(const ControlField& cf, double t, std::size_t stride);

/// Unsigned angle between two unit directions, in [0, pi].
double angle_between(Vec2 a, Vec2 b);

/// Largest direction change between horizontally or vertically adjacent
/// snapshot samples; degenerate samples are skipped.
double max_adjacent_gap(const ControlSnapshot& snap);

}  // namespace hjbpath
