#include "hjbpath/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hjbpath/error.hpp"

namespace hjbpath {

namespace {

Vec2 nodal_gradient(const ValueFunction& vf, std::size_t k, std::size_t i, std::size_t j) {
  const Grid& g = vf.grid();
  const std::size_t N = g.nx - 1;
  const std::size_t M = g.ny - 1;
  double gx;
  if (i == 0) {
    gx = (vf.at(k, 1, j) - vf.at(k, 0, j)) / g.dx;
  } else if (i == N) {
    gx = (vf.at(k, N, j) - vf.at(k, N - 1, j)) / g.dx;
  } else {
    gx = (vf.at(k, i + 1, j) - vf.at(k, i - 1, j)) / (2.0 * g.dx);
  }
  double gy;
  if (j == 0) {
    gy = (vf.at(k, i, 1) - vf.at(k, i, 0)) / g.dy;
  } else if (j == M) {
    gy = (vf.at(k, i, M) - vf.at(k, i, M - 1)) / g.dy;
  } else {
    gy = (vf.at(k, i, j + 1) - vf.at(k, i, j - 1)) / (2.0 * g.dy);
  }
  return {gx, gy};
}

}  // namespace

Vec2 grad_u_at_slice(const ValueFunction& vf, Vec2 p, std::size_t k) {
  const Grid& g = vf.grid();
  if (k >= vf.num_slices()) throw DomainError("slice index out of range");
  const double slack = 1e-9 * std::min(g.dx, g.dy);
  if (!g.box.contains(p, slack) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw DomainError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                      ") outside the solver box");
  }
  const double sx = std::clamp((p.x - g.box.xmin) / g.dx, 0.0, static_cast<double>(g.nx - 1));
  const double sy = std::clamp((p.y - g.box.ymin) / g.dy, 0.0, static_cast<double>(g.ny - 1));
  const auto i = std::min(static_cast<std::size_t>(sx), g.nx - 2);
  const auto j = std::min(static_cast<std::size_t>(sy), g.ny - 2);
  const double fx = sx - static_cast<double>(i);
  const double fy = sy - static_cast<double>(j);

  const Vec2 g00 = nodal_gradient(vf, k, i, j);
  const Vec2 g10 = nodal_gradient(vf, k, i + 1, j);
  const Vec2 g01 = nodal_gradient(vf, k, i, j + 1);
  const Vec2 g11 = nodal_gradient(vf, k, i + 1, j + 1);
  return (1.0 - fx) * (1.0 - fy) * g00 + fx * (1.0 - fy) * g10 + (1.0 - fx) * fy * g01 +
         fx * fy * g11;
}

Vec2 grad_u_at(const ValueFunction& vf, Vec2 p, double t) {
  return grad_u_at_slice(vf, p, vf.slice_for_time(t));
}

ControlField::ControlField(const ValueFunction& vf, const ElevationField& field,
                           const SpeedModel& model)
    : vf_(&vf),
      field_(&field),
      model_(model),
      dirs_(vf.config().hamiltonian.n_directions),
      degenerate_tol_(1e-12 * vf.config().box.diameter()) {
  model_.validate();
  const Box sb = vf.config().box;
  const double slack = 1e-9 * std::max(field.dx(), field.dy());
  if (!field.box().contains({sb.xmin, sb.ymin}, slack) ||
      !field.box().contains({sb.xmax, sb.ymax}, slack)) {
    throw ValidationError("terrain does not cover the solver box");
  }
}

ControlValue ControlField::steer(Vec2 p, Vec2 grad_u) const {
  const SlopeVector grad_e = field_->gradient_at(p);
  if (norm(grad_u) < degenerate_tol_) {
    const DirectionSample s = dirs_[0];
    return {s, true, effective_speed(model_, grad_e, s.dir)};
  }
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  double best_f = 0.0;
  for (std::size_t k = 0; k < dirs_.size(); ++k) {
    const Vec2 s = dirs_[k].dir;
    const double f = effective_speed(model_, grad_e, s);
    const double v = f * dot(grad_u, s);
    if (v < best) {
      best = v;
      best_k = k;
      best_f = f;
    }
  }
  return {dirs_[best_k], false, best_f};
}

ControlValue ControlField::optimal_control_at_slice(Vec2 p, std::size_t k) const {
  return steer(p, grad_u_at_slice(*vf_, p, k));
}

ControlValue ControlField::optimal_control(Vec2 p, double t) const {
  return optimal_control_at_slice(p, vf_->slice_for_time(t));
}

ControlSnapshot control_field_snapshot(const ControlField& cf, double t, std::size_t stride) {
  if (stride == 0) throw ValidationError("snapshot stride must be positive");
  const ValueFunction& vf = cf.value_function();
  const std::size_t k = vf.slice_for_time(t);
  const Grid& g = vf.grid();

  ControlSnapshot snap;
  snap.t = t;
  snap.stride = stride;
  snap.cols = (g.nx - 1) / stride + 1;
  snap.rows = (g.ny - 1) / stride + 1;
  snap.samples.resize(snap.cols * snap.rows);
  for (std::size_t a = 0; a < snap.cols; ++a) {
    for (std::size_t b = 0; b < snap.rows; ++b) {
      ControlSample& s = snap.samples[a * snap.rows + b];
      s.i = a * stride;
      s.j = b * stride;
      s.p = g.node(s.i, s.j);
      s.control = cf.optimal_control_at_slice(s.p, k);
    }
  }
  return snap;
}

double angle_between(Vec2 a, Vec2 b) {
  return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
}

double max_adjacent_gap(const ControlSnapshot& snap) {
  double gap = 0.0;
  auto visit = [&](const ControlSample& x, const ControlSample& y) {
    if (x.control.degenerate || y.control.degenerate) return;
    gap = std::max(gap, angle_between(x.control.s.dir, y.control.s.dir));
  };
  for (std::size_t a = 0; a < snap.cols; ++a) {
    for (std::size_t b = 0; b < snap.rows; ++b) {
      if (a + 1 < snap.cols) visit(snap.at(a, b), snap.at(a + 1, b));
      if (b + 1 < snap.rows) visit(snap.at(a, b), snap.at(a, b + 1));
    }
  }
  return gap;
}

}  // namespace hjbpath
