#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hjbpath/error.hpp"
#include "hjbpath/terrain.hpp"

using namespace hjbpath;

namespace {

ElevationField plane(double a, double b, std::size_t n = 11) {
  std::vector<double> h(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) h[j * n + i] = a * 0.1 * i + b * 0.1 * j;
  return ElevationField({0.0, 0.0}, 0.1, 0.1, n, n, std::move(h));
}

}  // namespace

TEST(ElevationField, InterpolationIsExactAtNodes) {
  std::vector<double> h{3, 1, 4, 1, 5, 9, 2, 6, 5};
  const ElevationField f({-1.0, 2.0}, 0.5, 0.25, 3, 3, h);
  EXPECT_EQ(f.elevation_at({-1.0, 2.0}), 3.0);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(f.elevation_at(f.node(i, j)), f.height(i, j));
}

TEST(ElevationField, CellMidpointAveragesCorners) {
  const ElevationField f({0.0, 0.0}, 1.0, 1.0, 2, 2, {0, 0, 0, 4});
  EXPECT_DOUBLE_EQ(f.elevation_at({0.5, 0.5}), 1.0);
}

TEST(ElevationField, OutsideBoxIsDomainError) {
  const ElevationField f = plane(1, 0);
  EXPECT_THROW(f.elevation_at({-0.01, 0.5}), DomainError);
  EXPECT_THROW(f.gradient_at({0.5, 1.2}), DomainError);
}

TEST(ElevationField, RejectsBadGrids) {
  EXPECT_THROW(ElevationField({0, 0}, 0.0, 1.0, 3, 3, std::vector<double>(9)), ValidationError);
  EXPECT_THROW(ElevationField({0, 0}, 1.0, 1.0, 3, 3, std::vector<double>(8)), ValidationError);
  EXPECT_THROW(ElevationField({0, 0}, 1.0, 1.0, 1, 3, std::vector<double>(3)), ValidationError);
  std::vector<double> h(9, 0.0);
  h[4] = NAN;
  EXPECT_THROW(ElevationField({0, 0}, 1.0, 1.0, 3, 3, h), ValidationError);
}

TEST(ElevationField, LinearFieldGradientIsExact) {
  const ElevationField f = plane(0.3, -0.7);
  for (std::size_t j = 0; j < f.ny(); ++j) {
    for (std::size_t i = 0; i < f.nx(); ++i) {
      EXPECT_NEAR(f.node_gradient(i, j).gx, 0.3, 1e-12);
      EXPECT_NEAR(f.node_gradient(i, j).gy, -0.7, 1e-12);
    }
  }
  const SlopeVector g = f.gradient_at({0.537, 0.291});
  EXPECT_NEAR(g.gx, 0.3, 1e-12);
  EXPECT_NEAR(g.gy, -0.7, 1e-12);
}

TEST(ElevationField, ContinuousAcrossCellEdges) {
  const GridSpec grid{{0, 2, 0, 2}, 21, 21};
  const ElevationField f =
      make_synthetic(grid, GaussianMountains{{{{1.0, 1.0}, 1.0, 0.5}}, 0.0});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.05, 1.95);
  for (int n = 0; n < 200; ++n) {
    const double x = std::round(pos(rng) * 10.0) / 10.0;  // on a vertical cell edge
    const double y = pos(rng);
    for (double eps : {1e-3, 1e-6}) {
      EXPECT_LT(std::abs(f.elevation_at({x - eps, y}) - f.elevation_at({x + eps, y})), 50 * eps);
      const SlopeVector a = f.gradient_at({x - eps, y});
      const SlopeVector b = f.gradient_at({x + eps, y});
      EXPECT_LT(std::hypot(a.gx - b.gx, a.gy - b.gy), 500 * eps);
    }
  }
}

TEST(Synthetic, FlatIsZero) {
  const ElevationField f = make_synthetic({{0, 1, 0, 1}, 5, 7}, FlatTerrain{});
  for (double h : f.heights()) EXPECT_EQ(h, 0.0);
  EXPECT_EQ(f.gradient_at({0.3, 0.6}), (SlopeVector{0.0, 0.0}));
}

TEST(Synthetic, GaussianPeak) {
  const ElevationField f =
      make_synthetic({{-1, 1, -1, 1}, 21, 21}, GaussianMountains{{{{0.0, 0.0}, 1.0, 1.0}}, 0.0});
  EXPECT_DOUBLE_EQ(f.height(10, 10), 1.0);
  EXPECT_DOUBLE_EQ(synthetic_height(GaussianMountains{{{{0.0, 0.0}, 1.0, 1.0}}, 0.0}, {1.0, 0.0}),
                   std::exp(-1.0));
}

TEST(Synthetic, TwoMountainGradientVanishesAtPeakNode) {
  // Well separated peaks sitting on nodes: the analytic gradient of the
  // generator at each maximum is zero, and central differences of a
  // symmetric bump cancel exactly up to the neighbour's tail.
  const GaussianMountains g{{{{1.0, 1.0}, 1.0, 0.3}, {{3.0, 2.0}, 0.8, 0.3}}, 0.0};
  const ElevationField f = make_synthetic({{0, 4, 0, 3}, 81, 61}, g);
  for (auto [i, j] : {std::pair{20, 20}, std::pair{60, 40}}) {
    const SlopeVector s = f.node_gradient(i, j);
    EXPECT_LT(std::abs(s.gx), 1e-8);
    EXPECT_LT(std::abs(s.gy), 1e-8);
  }
}

TEST(Synthetic, WallPlateauAndFarField) {
  const WallTerrain w{1.0, 3.0, 1.8, 2.2, 2.0, 0.1};
  const ElevationField f = make_synthetic({{0, 4, 0, 4}, 41, 41}, w);
  EXPECT_DOUBLE_EQ(f.height(20, 20), 2.0);
  EXPECT_DOUBLE_EQ(f.height(5, 5), 0.0);
  EXPECT_DOUBLE_EQ(f.height(35, 20), 0.0);
  // Ramps are monotone between plateau and ground.
  double prev = synthetic_height(w, {2.0, 2.2});
  for (double y = 2.21; y < 2.35; y += 0.01) {
    const double h = synthetic_height(w, {2.0, y});
    EXPECT_LE(h, prev);
    prev = h;
  }
}

TEST(Synthetic, RejectsDegenerateParameters) {
  const GridSpec grid{{0, 1, 0, 1}, 5, 5};
  EXPECT_THROW(make_synthetic(grid, GaussianMountains{{{{0.5, 0.5}, 1.0, 0.0}}, 0.0}),
               ValidationError);
  EXPECT_THROW(make_synthetic(grid, GaussianMountains{{{{1.5, 0.5}, 1.0, 0.1}}, 0.0}),
               ValidationError);
  EXPECT_THROW(make_synthetic(grid, WallTerrain{0.2, 0.8, 0.4, 0.6, 1.0, 0.0}), ValidationError);
  EXPECT_THROW(make_synthetic(grid, WallTerrain{0.8, 0.2, 0.4, 0.6, 1.0, 0.1}), ValidationError);
}

TEST(EsriAscii, HeaderSemantics) {
  std::istringstream in(
      "ncols 3\nnrows 2\nxllcorner 100\nyllcorner 200\ncellsize 10\n"
      "9 9 9\n1 1 1\n");
  const ElevationField f = load_esri_ascii(in);
  EXPECT_EQ(f.nx(), 3u);
  EXPECT_EQ(f.ny(), 2u);
  EXPECT_EQ(f.dx(), 10.0);
  EXPECT_EQ(f.dy(), 10.0);
  EXPECT_EQ(f.origin(), (Vec2{100.0, 200.0}));
  // North-first rows: the first data line is the y-max row.
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(f.height(i, 1), 9.0);
    EXPECT_EQ(f.height(i, 0), 1.0);
  }
}

TEST(EsriAscii, NodataFillUsesNeighbourMean) {
  const std::string text =
      "ncols 3\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n"
      "2 2 2\n2 -9999 2\n2 2 2\n";
  std::istringstream rejected(text);
  EXPECT_THROW(load_esri_ascii(rejected), ValidationError);
  std::istringstream filled(text);
  const ElevationField f = load_esri_ascii(filled, NodataPolicy::kFill);
  EXPECT_EQ(f.height(1, 1), 2.0);
}

TEST(EsriAscii, MalformedInput) {
  for (const char* text : {"ncols 3\nnrows 2\ncellsize 1\n1 2 3\n4 5 6\n",
                           "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n4 5\n",
                           "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 x\n4 5 6\n",
                           "ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize -1\n1 2 3\n4 5 6\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(load_esri_ascii(in), ParseError) << text;
  }
}

TEST(EsriAscii, RoundTripKeepsHeaderAndValues) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-500.0, 3000.0);
  std::vector<double> h(7 * 5);
  for (double& v : h) v = dist(rng);
  const ElevationField f({12.5, -3.25}, 0.75, 0.75, 7, 5, h, NodataPolicy::kReject, -9999.0);
  std::stringstream a;
  write_esri_ascii(a, f);
  const ElevationField g = load_esri_ascii(a);
  EXPECT_EQ(g.nx(), f.nx());
  EXPECT_EQ(g.ny(), f.ny());
  EXPECT_EQ(g.origin(), f.origin());
  EXPECT_EQ(g.dx(), f.dx());
  EXPECT_EQ(g.nodata_value(), f.nodata_value());
  for (std::size_t k = 0; k < h.size(); ++k)
    EXPECT_NEAR(g.heights()[k], f.heights()[k], 1e-15 * std::abs(f.heights()[k]));
  std::stringstream b;
  write_esri_ascii(b, g);
  EXPECT_EQ(a.str(), b.str());
}
