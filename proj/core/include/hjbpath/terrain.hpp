#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hjbpath/geometry.hpp"

namespace hjbpath {

/// Terrain slope in units of grade (rise over run).
struct SlopeVector {
  double gx = 0.0;
  double gy = 0.0;

  Vec2 vec() const { return {gx, gy}; }
  friend bool operator==(const SlopeVector&, const SlopeVector&) = default;
};

enum class NodataPolicy { kReject, kFill };

/// Regular grid of terrain heights.
///
/// Nodes sit at origin + (i*dx, j*dy) for i < nx, j < ny. Heights are stored
/// row by row with the row index increasing with y. Heights and coordinates
/// are assumed to share a length unit, so gradients are dimensionless grades.
///
/// The field is immutable after construction and safe to share between
/// threads. Nodal gradients are computed once in the constructor.
class ElevationField {
 public:
  /// Throws ValidationError unless dx, dy > 0, nx, ny >= 2, the height count
  /// is nx*ny and every height is finite.
  ElevationField(Vec2 origin, double dx, double dy, std::size_t nx,
                 std::size_t ny, std::vector<double> heights,
                 NodataPolicy policy = NodataPolicy::kReject,
                 std::optional<double> nodata_value = std::nullopt);

  Vec2 origin() const { return origin_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  Box box() const;
  NodataPolicy nodata_policy() const { return policy_; }
  /// NODATA marker of the source file, kept so it can be written back.
  std::optional<double> nodata_value() const { return nodata_value_; }

  double height(std::size_t i, std::size_t j) const { return heights_[j * nx_ + i]; }
  std::span<const double> heights() const { return heights_; }
  Vec2 node(std::size_t i, std::size_t j) const;

  /// Central differences at interior nodes, one-sided on the boundary.
  SlopeVector node_gradient(std::size_t i, std::size_t j) const;

  /// Bilinear interpolation of the nodal heights. Throws DomainError outside
  /// the bounding box.
  double elevation_at(Vec2 p) const;

  /// Bilinear interpolation of the nodal gradients, so the result is
  /// continuous across cell edges. Throws DomainError outside the box.
  SlopeVector gradient_at(Vec2 p) const;

 private:
  struct CellCoords {
    std::size_t i;
    std::size_t j;
    double fx;
    double fy;
  };
  CellCoords locate(Vec2 p) const;

  Vec2 origin_;
  double dx_;
  double dy_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<double> heights_;
  std::vector<SlopeVector> gradients_;
  NodataPolicy policy_;
  std::optional<double> nodata_value_;
};

/// Node layout for synthetic terrain: nx by ny nodes spanning `box`.
struct GridSpec {
  Box box;
  std::size_t nx = 0;
  std::size_t ny = 0;
};

struct FlatTerrain {};

struct Mountain {
  Vec2 center;
  double height = 1.0;
  double width = 1.0;
};

/// Sum of h * exp(-|p - c|^2 / w^2) over a flat base.
struct GaussianMountains {
  std::vector<Mountain> mountains;
  double base = 0.0;
};

/// Plateau of `height` over [xmin, xmax] x [ymin, ymax] whose sides fall to
/// zero over `ramp` length units along half-cosine profiles.
struct WallTerrain {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;
  double height = 1.0;
  double ramp = 0.1;
};

using SyntheticTerrain = std::variant<FlatTerrain, GaussianMountains, WallTerrain>;

/// Evaluates the analytic synthetic surface at a point.
double synthetic_height(const SyntheticTerrain& terrain, Vec2 p);

/// Samples a synthetic terrain on the grid. Throws ValidationError on
/// degenerate parameters (non-positive widths or ramps, mountain centers
/// outside the box, empty wall rectangle).
ElevationField make_synthetic(const GridSpec& grid, const SyntheticTerrain& terrain);

/// Reads an ESRI ASCII grid. Throws ParseError on malformed input and
/// ValidationError when NODATA cells cannot be handled under `policy`.
ElevationField load_esri_ascii(std::istream& in,
                               NodataPolicy policy = NodataPolicy::kReject);
ElevationField load_esri_ascii(const std::filesystem::path& path,
                               NodataPolicy policy = NodataPolicy::kReject);

/// Writes the field as an ESRI ASCII grid (square cells only).
void write_esri_ascii(std::ostream& out, const ElevationField& field);
void write_esri_ascii(const std::filesystem::path& path, const ElevationField& field);

}  // namespace hjbpath
