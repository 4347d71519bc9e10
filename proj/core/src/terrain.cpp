#include "hjbpath/terrain.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hjbpath/error.hpp"

namespace hjbpath {

namespace {

// Points this close (in cell units) outside the box are treated as on it.
constexpr double kEdgeSlack = 1e-9;

double cosine_ramp(double outside, double ramp) {
  if (outside <= 0.0) return 1.0;
  if (outside >= ramp) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * outside / ramp));
}

// 1 inside [lo, hi], falling smoothly to 0 over `ramp` on either side.
double plateau_profile(double v, double lo, double hi, double ramp) {
  if (v < lo) return cosine_ramp(lo - v, ramp);
  if (v > hi) return cosine_ramp(v - hi, ramp);
  return 1.0;
}

struct SyntheticEval {
  Vec2 p;

  double operator()(const FlatTerrain&) const { return 0.0; }

  double operator()(const GaussianMountains& g) const {
    double h = g.base;
    for (const auto& m : g.mountains) {
      const Vec2 d = p - m.center;
      h += m.height * std::exp(-dot(d, d) / (m.width * m.width));
    }
    return h;
  }

  double operator()(const WallTerrain& w) const {
    return w.height * plateau_profile(p.x, w.xmin, w.xmax, w.ramp) *
           plateau_profile(p.y, w.ymin, w.ymax, w.ramp);
  }
};

struct SyntheticValidate {
  const Box& box;

  void operator()(const FlatTerrain&) const {}

  void operator()(const GaussianMountains& g) const {
    if (!std::isfinite(g.base)) throw ValidationError("mountain base must be finite");
    for (const auto& m : g.mountains) {
      if (!(m.width > 0.0) || !std::isfinite(m.width))
        throw ValidationError("mountain width must be positive");
      if (!std::isfinite(m.height))
        throw ValidationError("mountain height must be finite");
      if (!box.contains(m.center))
        throw ValidationError("mountain center lies outside the terrain box");
    }
  }

  void operator()(const WallTerrain& w) const {
    if (!(w.ramp > 0.0) || !std::isfinite(w.ramp))
      throw ValidationError("wall ramp width must be positive");
    if (!(w.xmax > w.xmin) || !(w.ymax > w.ymin))
      throw ValidationError("wall rectangle must have positive extent");
    if (!std::isfinite(w.height)) throw ValidationError("wall height must be finite");
  }
};

}  // namespace

ElevationField::ElevationField(Vec2 origin, double dx, double dy, std::size_t nx,
                               std::size_t ny, std::vector<double> heights,
                               NodataPolicy policy, std::optional<double> nodata_value)
    : origin_(origin),
      dx_(dx),
      dy_(dy),
      nx_(nx),
      ny_(ny),
      heights_(std::move(heights)),
      policy_(policy),
      nodata_value_(nodata_value) {
  if (!(dx_ > 0.0) || !(dy_ > 0.0) || !std::isfinite(dx_) || !std::isfinite(dy_))
    throw ValidationError("grid spacing must be positive and finite");
  if (nx_ < 2 || ny_ < 2)
    throw ValidationError("elevation grid needs at least 2 nodes per axis");
  if (!std::isfinite(origin_.x) || !std::isfinite(origin_.y))
    throw ValidationError("grid origin must be finite");
  if (heights_.size() != nx_ * ny_)
    throw ValidationError("height count " + std::to_string(heights_.size()) +
                          " does not match " + std::to_string(nx_) + "x" +
                          std::to_string(ny_) + " nodes");
  for (double h : heights_) {
    if (!std::isfinite(h)) throw ValidationError("elevation grid contains a non-finite height");
  }

  gradients_.resize(nx_ * ny_);
  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) {
      double gx;
      if (i == 0) {
        gx = (height(1, j) - height(0, j)) / dx_;
      } else if (i == nx_ - 1) {
        gx = (height(i, j) - height(i - 1, j)) / dx_;
      } else {
        gx = (height(i + 1, j) - height(i - 1, j)) / (2.0 * dx_);
      }
      double gy;
      if (j == 0) {
        gy = (height(i, 1) - height(i, 0)) / dy_;
      } else if (j == ny_ - 1) {
        gy = (height(i, j) - height(i, j - 1)) / dy_;
      } else {
        gy = (height(i, j + 1) - height(i, j - 1)) / (2.0 * dy_);
      }
      gradients_[j * nx_ + i] = {gx, gy};
    }
  }
}

Box ElevationField::box() const {
  return {origin_.x, origin_.x + dx_ * static_cast<double>(nx_ - 1), origin_.y,
          origin_.y + dy_ * static_cast<double>(ny_ - 1)};
}

Vec2 ElevationField::node(std::size_t i, std::size_t j) const {
  return {origin_.x + dx_ * static_cast<double>(i), origin_.y + dy_ * static_cast<double>(j)};
}

SlopeVector ElevationField::node_gradient(std::size_t i, std::size_t j) const {
  return gradients_[j * nx_ + i];
}

ElevationField::CellCoords ElevationField::locate(Vec2 p) const {
  const double gx = (p.x - origin_.x) / dx_;
  const double gy = (p.y - origin_.y) / dy_;
  const double maxx = static_cast<double>(nx_ - 1);
  const double maxy = static_cast<double>(ny_ - 1);
  if (!(gx >= -kEdgeSlack && gx <= maxx + kEdgeSlack && gy >= -kEdgeSlack &&
        gy <= maxy + kEdgeSlack)) {
    throw DomainError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                      ") lies outside the elevation grid");
  }
  const double cx = std::clamp(gx, 0.0, maxx);
  const double cy = std::clamp(gy, 0.0, maxy);
  auto i = static_cast<std::size_t>(std::floor(cx));
  auto j = static_cast<std::size_t>(std::floor(cy));
  if (i >= nx_ - 1) i = nx_ - 2;
  if (j >= ny_ - 1) j = ny_ - 2;
  return {i, j, cx - static_cast<double>(i), cy - static_cast<double>(j)};
}

double ElevationField::elevation_at(Vec2 p) const {
  const auto c = locate(p);
  const double h00 = height(c.i, c.j);
  const double h10 = height(c.i + 1, c.j);
  const double h01 = height(c.i, c.j + 1);
  const double h11 = height(c.i + 1, c.j + 1);
  return (1.0 - c.fx) * (1.0 - c.fy) * h00 + c.fx * (1.0 - c.fy) * h10 +
         (1.0 - c.fx) * c.fy * h01 + c.fx * c.fy * h11;
}

SlopeVector ElevationField::gradient_at(Vec2 p) const {
  const auto c = locate(p);
  const auto g00 = node_gradient(c.i, c.j);
  const auto g10 = node_gradient(c.i + 1, c.j);
  const auto g01 = node_gradient(c.i, c.j + 1);
  const auto g11 = node_gradient(c.i + 1, c.j + 1);
  const double w00 = (1.0 - c.fx) * (1.0 - c.fy);
  const double w10 = c.fx * (1.0 - c.fy);
  const double w01 = (1.0 - c.fx) * c.fy;
  const double w11 = c.fx * c.fy;
  return {w00 * g00.gx + w10 * g10.gx + w01 * g01.gx + w11 * g11.gx,
          w00 * g00.gy + w10 * g10.gy + w01 * g01.gy + w11 * g11.gy};
}

double synthetic_height(const SyntheticTerrain& terrain, Vec2 p) {
  return std::visit(SyntheticEval{p}, terrain);
}

ElevationField make_synthetic(const GridSpec& grid, const SyntheticTerrain& terrain) {
  if (grid.nx < 3 || grid.ny < 3)
    throw ValidationError("synthetic terrain needs at least 3 nodes per axis");
  if (!(grid.box.width() > 0.0) || !(grid.box.height() > 0.0))
    throw ValidationError("synthetic terrain box must have positive extent");
  std::visit(SyntheticValidate{grid.box}, terrain);

  const double dx = grid.box.width() / static_cast<double>(grid.nx - 1);
  const double dy = grid.box.height() / static_cast<double>(grid.ny - 1);
  std::vector<double> heights(grid.nx * grid.ny);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const Vec2 p{grid.box.xmin + dx * static_cast<double>(i),
                   grid.box.ymin + dy * static_cast<double>(j)};
      heights[j * grid.nx + i] = synthetic_height(terrain, p);
    }
  }
  return ElevationField({grid.box.xmin, grid.box.ymin}, dx, dy, grid.nx, grid.ny,
                        std::move(heights));
}

}  // namespace hjbpath
