#include "scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <set>

#include "hjbpath/error.hpp"

namespace hjbpath::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ParseError("key " + key + ": expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("key " + key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ParseError("key " + key + ": expected true or false, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(key, item));
  return out;
}

std::vector<double> to_fixed(const std::string& key, const std::string& text, std::size_t n) {
  auto v = to_list(key, text);
  if (v.size() != n) {
    throw ParseError("key " + key + ": expected " + std::to_string(n) + " comma-separated numbers");
  }
  return v;
}

Vec2 to_point(const std::string& key, const std::string& text) {
  const auto v = to_fixed(key, text, 2);
  return {v[0], v[1]};
}

std::vector<Mountain> to_mountains(const std::string& key, const std::string& text) {
  std::vector<Mountain> out;
  for (const auto& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto v = to_fixed(key, item, 4);
    out.push_back({{v[0], v[1]}, v[2], v[3]});
  }
  return out;
}

using Setter = std::function<void(Scenario&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [](double Scenario::*field) {
      return [field](Scenario& s, const std::string& k, const std::string& v) {
        s.*field = to_double(k, v);
      };
    };
    t["box"] = [](Scenario& s, const std::string& k, const std::string& v) {
      const auto b = to_fixed(k, v, 4);
      s.solver.box = {b[0], b[1], b[2], b[3]};
    };
    t["N"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.N = to_uint(k, v);
    };
    t["M"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.M = to_uint(k, v);
    };
    t["K"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.K = to_uint(k, v);
    };
    t["T"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.T = to_double(k, v);
    };
    t["sigma"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.sigma = to_double(k, v);
    };
    t["x0"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.x0 = to_point(k, v);
    };
    t["x_end"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.x_end = to_point(k, v);
    };
    t["cfl_safety"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.cfl_safety = to_double(k, v);
    };
    t["value_cap"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.value_cap = to_uint(k, v);
    };
    t["check_invariants"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.check_invariants = to_bool(k, v);
    };

    t["scheme"] = [](Scenario& s, const std::string& k, const std::string& v) {
      if (v == "godunov") {
        s.solver.hamiltonian.scheme = NumericalScheme::kGodunov;
      } else if (v == "lax_friedrichs") {
        s.solver.hamiltonian.scheme = NumericalScheme::kLaxFriedrichs;
      } else {
        throw ParseError("key " + k + ": expected godunov or lax_friedrichs");
      }
    };
    t["orientation"] = [](Scenario& s, const std::string& k, const std::string& v) {
      if (v == "backward_time") {
        s.solver.hamiltonian.orientation = Orientation::kBackwardTime;
      } else if (v == "as_published") {
        s.solver.hamiltonian.orientation = Orientation::kAsPublished;
      } else {
        throw ParseError("key " + k + ": expected backward_time or as_published");
      }
    };
    t["n_directions"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.hamiltonian.n_directions = to_uint(k, v);
    };
    t["n_ext_samples"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.solver.hamiltonian.n_ext_samples = to_uint(k, v);
    };
    t["lf_alpha"] = [](Scenario& s, const std::string& k, const std::string& v) {
      const auto a = to_fixed(k, v, 2);
      s.solver.hamiltonian.lf_alpha = {a[0], a[1]};
    };

    t["v0"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.model.v0 = to_double(k, v);
    };
    t["slope_shift"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.model.slope_shift = to_double(k, v);
    };
    t["denom"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.model.denom = to_double(k, v);
    };
    t["pen_threshold"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.model.pen_threshold = to_double(k, v);
    };
    t["pen_width"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.model.pen_width = to_double(k, v);
    };

    t["terrain"] = [](Scenario& s, const std::string& k, const std::string& v) {
      if (v == "flat") {
        s.terrain.kind = TerrainKind::kFlat;
      } else if (v == "gaussian_mountains") {
        s.terrain.kind = TerrainKind::kGaussianMountains;
      } else if (v == "wall") {
        s.terrain.kind = TerrainKind::kWall;
      } else if (v == "dem") {
        s.terrain.kind = TerrainKind::kDem;
      } else {
        throw ParseError("key " + k + ": expected flat, gaussian_mountains, wall or dem");
      }
    };
    t["terrain_nx"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.terrain.nx = to_uint(k, v);
    };
    t["terrain_ny"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.terrain.ny = to_uint(k, v);
    };
    // Synthetic parameters are collected here and assembled after parsing.
    for (const char* key : {"mountains", "mountain_base", "wall", "wall_height", "wall_ramp"}) {
      t[key] = [](Scenario&, const std::string&, const std::string&) {};
    }
    t["dem_path"] = [](Scenario& s, const std::string&, const std::string& v) {
      s.terrain.dem_path = v;
    };
    t["nodata_policy"] = [](Scenario& s, const std::string& k, const std::string& v) {
      if (v == "reject") {
        s.terrain.nodata = NodataPolicy::kReject;
      } else if (v == "fill") {
        s.terrain.nodata = NodataPolicy::kFill;
      } else {
        throw ParseError("key " + k + ": expected reject or fill");
      }
    };

    t["method"] = [](Scenario& s, const std::string& k, const std::string& v) {
      if (v != "deterministic" && v != "ensemble")
        throw ParseError("key " + k + ": expected deterministic or ensemble");
      s.method = v;
    };
    t["L"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.trials = to_uint(k, v);
    };
    t["seed"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.seed = to_uint(k, v);
    };
    t["retain"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.retain = to_uint(k, v);
    };
    t["output_dir"] = [](Scenario& s, const std::string&, const std::string& v) {
      s.output_dir = v;
    };
    t["record_timing"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.record_timing = to_bool(k, v);
    };

    t["reach_tol"] = num(&Scenario::reach_tol);
    t["T_lo"] = num(&Scenario::T_lo);
    t["T_hi"] = num(&Scenario::T_hi);
    t["tol_T"] = num(&Scenario::tol_T);
    t["sigma_list"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.sigma_list = to_list(k, v);
    };
    t["T_list"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.T_list = to_list(k, v);
    };
    t["snapshot_times"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.snapshot_times = to_list(k, v);
    };
    t["snapshot_stride"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.snapshot_stride = to_uint(k, v);
    };
    return t;
  }();
  return table;
}

void assemble_terrain(Scenario& s) {
  const auto& e = s.entries;
  auto need = [&](const char* key) -> const std::string& {
    const auto it = e.find(key);
    if (it == e.end()) throw ValidationError(std::string("missing key: ") + key);
    return it->second;
  };
  switch (s.terrain.kind) {
    case TerrainKind::kFlat:
      s.terrain.synthetic = FlatTerrain{};
      break;
    case TerrainKind::kGaussianMountains: {
      GaussianMountains g;
      g.mountains = to_mountains("mountains", need("mountains"));
      if (e.count("mountain_base")) g.base = to_double("mountain_base", e.at("mountain_base"));
      s.terrain.synthetic = g;
      break;
    }
    case TerrainKind::kWall: {
      const auto r = to_fixed("wall", need("wall"), 4);
      WallTerrain w{r[0], r[1], r[2], r[3], to_double("wall_height", need("wall_height")),
                    to_double("wall_ramp", need("wall_ramp"))};
      s.terrain.synthetic = w;
      break;
    }
    case TerrainKind::kDem:
      need("dem_path");
      break;
  }
}

}  // namespace

double Scenario::effective_reach_tol() const {
  return reach_tol > 0.0 ? reach_tol : 3.0 * std::max(solver.dx(), solver.dy());
}

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir,
                        const std::map<std::string, std::string>& overrides) {
  Scenario s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": empty key or value");
    }
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ParseError("line " + std::to_string(line_no) + ": unknown key: " + key);
    }
    if (!s.entries.emplace(key, value).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate key: " + key);
    }
  }
  for (const auto& [key, value] : overrides) {
    if (!setters().count(key)) throw ParseError("unknown key: " + key);
    s.entries.insert_or_assign(key, value);
  }
  for (const auto& [key, value] : s.entries) setters().at(key)(s, key, value);

  for (const char* key : {"box", "N", "M", "T", "x0", "x_end", "terrain"}) {
    if (!s.entries.count(key)) throw ValidationError(std::string("missing key: ") + key);
  }
  if (!s.entries.count("K")) s.solver.K = 1;  // raised to the CFL minimum by the solver
  assemble_terrain(s);
  if (s.terrain.kind == TerrainKind::kDem && s.terrain.dem_path.is_relative()) {
    s.terrain.dem_path = base_dir / s.terrain.dem_path;
  }
  if (!s.solver.box.contains(s.x0)) throw ValidationError("x0 lies outside the box");
  s.solver.validate(s.model);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path,
                       const std::map<std::string, std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse_scenario(in, path.parent_path(), overrides);
}

ElevationField build_terrain(const Scenario& sc) {
  if (sc.terrain.kind == TerrainKind::kDem) {
    return load_esri_ascii(sc.terrain.dem_path, sc.terrain.nodata);
  }
  GridSpec grid{sc.solver.box, sc.terrain.nx ? sc.terrain.nx : sc.solver.N + 1,
                sc.terrain.ny ? sc.terrain.ny : sc.solver.M + 1};
  return make_synthetic(grid, sc.terrain.synthetic);
}

nlohmann::ordered_json echo(const Scenario& sc) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : sc.entries) j[k] = v;
  return j;
}

std::string kind_name(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::kFlat:
      return "flat";
    case TerrainKind::kGaussianMountains:
      return "gaussian_mountains";
    case TerrainKind::kWall:
      return "wall";
    case TerrainKind::kDem:
      return "dem";
  }
  return "unknown";
}

}  // namespace hjbpath::cli
