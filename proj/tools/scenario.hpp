#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hjbpath/kinematics.hpp"
#include "hjbpath/solver.hpp"
#include "hjbpath/terrain.hpp"

namespace hjbpath::cli {

enum class TerrainKind { kFlat, kGaussianMountains, kWall, kDem };

struct TerrainSpec {
  TerrainKind kind = TerrainKind::kFlat;
  SyntheticTerrain synthetic;
  std::filesystem::path dem_path;
  NodataPolicy nodata = NodataPolicy::kReject;
  /// Node counts of the sampled synthetic grid; 0 means match the solver.
  std::size_t nx = 0;
  std::size_t ny = 0;
};

/// One experiment, read from a flat `key = value` file.
struct Scenario {
  std::map<std::string, std::string> entries;

  SolverConfig solver;
  SpeedModel model;
  TerrainSpec terrain;
  Vec2 x0;

  std::string method = "deterministic";
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t retain = 3;
  std::filesystem::path output_dir = ".";
  bool record_timing = false;

  /// Reach tolerance; negative means three solver cells.
  double reach_tol = -1.0;
  double T_lo = 0.0;
  double T_hi = 0.0;
  double tol_T = 1e-2;

  std::vector<double> sigma_list;
  std::vector<double> T_list;

  std::vector<double> snapshot_times;
  std::size_t snapshot_stride = 1;

  double effective_reach_tol() const;
};

/// Throws ParseError naming the line for malformed or unknown keys, and
/// ValidationError("missing key: <k>") for absent required keys. Entries in
/// `overrides` replace or extend the file's entries before validation.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir = ".",
                        const std::map<std::string, std::string>& overrides = {});
Scenario load_scenario(const std::filesystem::path& path,
                       const std::map<std::string, std::string>& overrides = {});

ElevationField build_terrain(const Scenario& sc);

/// Every key of the file with its value, in key order.
nlohmann::ordered_json echo(const Scenario& sc);

std::string kind_name(TerrainKind kind);

}  // namespace hjbpath::cli
