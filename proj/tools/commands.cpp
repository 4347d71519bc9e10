#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "hjbpath/control.hpp"
#include "hjbpath/error.hpp"
#include "hjbpath/io.hpp"
#include "hjbpath/trajectory.hpp"

namespace hjbpath::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

fs::path prepare(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());
  return out;
}

std::string scheme_name(const SolverConfig& cfg) {
  return cfg.sigma == 0.0 ? "explicit" : "semi_implicit";
}

std::string hamiltonian_name(const SolverConfig& cfg) {
  return cfg.hamiltonian.scheme == NumericalScheme::kGodunov ? "godunov" : "lax_friedrichs";
}

json solver_report(const SolverConfig& requested, const ValueFunction& vf,
                   const SpeedModel& model) {
  const SolverConfig& c = vf.config();
  json j;
  j["scheme"] = scheme_name(c);
  j["hamiltonian"] = hamiltonian_name(c);
  j["K_requested"] = requested.K;
  j["K"] = c.K;
  j["dt"] = c.dt();
  j["dx"] = c.dx();
  j["dy"] = c.dy();
  j["cfl_number"] = c.cfl_number(characteristic_speed(c, model));
  j["cfl_number_vmax"] = c.cfl_number(model.max_speed());
  return j;
}

void add_timing(json& j, const Scenario& sc, double seconds) {
  if (sc.record_timing) j["wall_clock_seconds"] = seconds;
}

json path_summary(const Trajectory& path, const ElevationField& field) {
  double max_elev = -std::numeric_limits<double>::infinity();
  for (const auto& s : path.samples) max_elev = std::max(max_elev, field.elevation_at(s.p));
  json j;
  j["terminal_distance"] = path.terminal_distance;
  j["closest_approach"] = path.closest_approach;
  j["clamped_count"] = path.clamped_count;
  j["arc_length"] = path.arc_length();
  j["max_elevation"] = max_elev;
  j["samples"] = path.samples.size();
  return j;
}

// Max over the samples of `a` of the distance to `b` at the same time, with
// `b` linearly interpolated in time; restricted to the common time span.
double max_path_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  const double t_end = std::min(a.samples.back().t, b.samples.back().t);
  std::size_t m = 0;
  for (const auto& s : a.samples) {
    if (s.t > t_end * (1.0 + 1e-12)) break;
    while (m + 2 < b.samples.size() && b.samples[m + 1].t < s.t) ++m;
    const auto& b0 = b.samples[m];
    const auto& b1 = b.samples[std::min(m + 1, b.samples.size() - 1)];
    const double span = b1.t - b0.t;
    const double w = span > 0.0 ? std::clamp((s.t - b0.t) / span, 0.0, 1.0) : 0.0;
    gap = std::max(gap, distance(s.p, (1.0 - w) * b0.p + w * b1.p));
  }
  return gap;
}

std::string tag(double v) {
  std::string s = format_double(v);
  std::replace(s.begin(), s.end(), '-', 'm');
  return s;
}

}  // namespace

json cmd_solve(const Scenario& sc, const fs::path& out, std::ostream& log) {
  prepare(out);
  const Stopwatch clock;
  const ElevationField field = build_terrain(sc);
  const ValueFunction vf = solve(sc.solver, field, sc.model);
  const double elapsed = clock.seconds();

  json slices = json::array();
  double u_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < vf.num_slices(); ++k) {
    const auto s = vf.slice(k);
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    slices.push_back({{"k", k}, {"min", *lo}, {"max", *hi}});
    u_min = std::min(u_min, *lo);
  }
  const auto final_slice = vf.slice(vf.num_slices() - 1);
  const double final_min = *std::min_element(final_slice.begin(), final_slice.end());

  write_file(out / "value.bin", [&](std::ostream& os) { write_value_dump(os, vf); });
  write_file(out / "u_final.csv",
             [&](std::ostream& os) { write_slice_csv(os, vf, vf.num_slices() - 1); });

  json meta;
  meta["command"] = "solve";
  meta["config"] = echo(sc);
  meta["solver"] = solver_report(sc.solver, vf, sc.model);
  meta["scheme"] = scheme_name(vf.config());
  meta["u_min_final"] = final_min;
  meta["u_min"] = u_min;
  meta["nonnegative_tolerance"] = 1e-6 * vf.config().box.diameter();
  meta["slices"] = slices;
  add_timing(meta, sc, elapsed);
  write_json(out / "solve.json", meta);

  log << "solve: " << vf.config().K << " steps, " << meta["scheme"].get<std::string>()
      << ", min u(final) = " << format_double(final_min) << ", " << elapsed << " s\n";
  return meta;
}

json cmd_path(const Scenario& sc, const fs::path& out, std::ostream& log) {
  prepare(out);
  const Stopwatch clock;
  const ElevationField field = build_terrain(sc);
  const ValueFunction vf = solve(sc.solver, field, sc.model);
  const ControlField cf(vf, field, sc.model);
  const Trajectory path = integrate_deterministic(cf, sc.x0);
  const double elapsed = clock.seconds();

  write_file(out / "path.csv", [&](std::ostream& os) { write_trajectory_csv(os, path); });
  json meta;
  meta["command"] = "path";
  meta["config"] = echo(sc);
  meta["solver"] = solver_report(sc.solver, vf, sc.model);
  meta["path"] = path_summary(path, field);
  add_timing(meta, sc, elapsed);
  write_json(out / "path.json", meta);

  log << "path: terminal distance " << format_double(path.terminal_distance) << ", arc length "
      << format_double(path.arc_length()) << ", " << elapsed << " s\n";
  return meta;
}

json cmd_ensemble(const Scenario& sc, const fs::path& out, std::ostream& log) {
  if (sc.method != "ensemble") throw ValidationError("ensemble command requires method = ensemble");
  prepare(out);
  const Stopwatch clock;
  const ElevationField field = build_terrain(sc);
  const ValueFunction vf = solve(sc.solver, field, sc.model);
  const ControlField cf(vf, field, sc.model);
  EnsembleOptions opts;
  opts.trials = sc.trials;
  opts.seed = sc.seed;
  opts.retain = sc.retain;
  const EnsembleStats stats = run_ensemble(cf, sc.x0, opts);
  const Trajectory det = integrate_deterministic(cf, sc.x0);
  const double elapsed = clock.seconds();

  write_file(out / "ensemble.csv", [&](std::ostream& os) { write_ensemble_csv(os, stats); });
  for (std::size_t r = 0; r < stats.realizations.size(); ++r) {
    write_file(out / ("realization_" + std::to_string(r + 1) + ".csv"),
               [&](std::ostream& os) { write_trajectory_csv(os, stats.realizations[r]); });
  }

  // Steps where the deterministic path leaves the one-standard-deviation
  // ellipse around the mean.
  std::size_t outside = 0;
  for (std::size_t n = 0; n < det.samples.size(); ++n) {
    const Vec2 d = det.samples[n].p - stats.mean_path.samples[n].p;
    const Vec2 s = stats.std_devs[n];
    const double rx = s.x > 0.0 ? d.x / s.x : (d.x == 0.0 ? 0.0 : HUGE_VAL);
    const double ry = s.y > 0.0 ? d.y / s.y : (d.y == 0.0 ? 0.0 : HUGE_VAL);
    if (rx * rx + ry * ry > 1.0) ++outside;
  }

  json meta;
  meta["command"] = "ensemble";
  meta["config"] = echo(sc);
  meta["solver"] = solver_report(sc.solver, vf, sc.model);
  meta["trials"] = stats.num_trials;
  meta["seed"] = stats.seed;
  meta["clamped_trials"] = stats.clamped_trials;
  meta["mean_path"] = path_summary(stats.mean_path, field);
  meta["final_std"] = {stats.std_devs.back().x, stats.std_devs.back().y};
  meta["deterministic_steps_outside_envelope"] = outside;
  add_timing(meta, sc, elapsed);
  write_json(out / "ensemble.json", meta);

  log << "ensemble: " << stats.num_trials << " trials, mean terminal distance "
      << format_double(stats.mean_path.terminal_distance) << ", " << elapsed << " s\n";
  return meta;
}

json cmd_critical_time(const Scenario& sc, const fs::path& out, std::ostream& log) {
  if (!sc.entries.count("T_lo")) throw ValidationError("missing key: T_lo");
  if (!sc.entries.count("T_hi")) throw ValidationError("missing key: T_hi");
  prepare(out);
  const Stopwatch clock;
  const ElevationField field = build_terrain(sc);
  CriticalTimeOptions opts;
  opts.T_lo = sc.T_lo;
  opts.T_hi = sc.T_hi;
  opts.reach_tol = sc.effective_reach_tol();
  opts.tol_T = sc.tol_T;
  const CriticalTimeResult res = critical_time_search(field, sc.model, sc.x0, sc.solver, opts);
  const double elapsed = clock.seconds();

  write_file(out / "critical_time.csv", [&](std::ostream& os) {
    os << "probe,T,K,terminal_distance,reached\n";
    for (std::size_t n = 0; n < res.trace.size(); ++n) {
      const auto& p = res.trace[n];
      os << n << ',' << format_double(p.T) << ',' << p.K << ','
         << format_double(p.terminal_distance) << ',' << (p.reached ? 1 : 0) << '\n';
    }
  });
  json meta;
  meta["command"] = "critical-time";
  meta["config"] = echo(sc);
  meta["reach_tol"] = opts.reach_tol;
  meta["T_star"] = res.T_star;
  meta["bracket"] = {res.lo, res.hi};
  meta["probes"] = res.trace.size();
  add_timing(meta, sc, elapsed);
  write_json(out / "critical_time.json", meta);

  log << "critical-time: T* = " << format_double(res.T_star) << " after " << res.trace.size()
      << " probes, " << elapsed << " s\n";
  return meta;
}

json cmd_converge(const Scenario& sc, const fs::path& out, std::ostream& log) {
  const auto& sigmas = sc.sigma_list;
  if (sigmas.empty()) throw ValidationError("missing key: sigma_list");
  if (std::find(sigmas.begin(), sigmas.end(), 0.0) == sigmas.end())
    throw ValidationError("sigma_list must contain 0");
  if (std::count_if(sigmas.begin(), sigmas.end(), [](double s) { return s > 0.0; }) < 2)
    throw ValidationError("sigma_list needs at least two positive values");
  if (std::any_of(sigmas.begin(), sigmas.end(), [](double s) { return s < 0.0; }))
    throw ValidationError("sigma_list values must be non-negative");
  if (!sc.T_list.empty() && sc.T_list.size() != sigmas.size())
    throw ValidationError("T_list must match sigma_list in length");
  prepare(out);
  const Stopwatch clock;
  const ElevationField field = build_terrain(sc);

  std::vector<Trajectory> paths;
  for (std::size_t n = 0; n < sigmas.size(); ++n) {
    SolverConfig cfg = sc.solver;
    cfg.sigma = sigmas[n];
    if (!sc.T_list.empty()) {
      cfg.T = sc.T_list[n];
      cfg.K = std::max<std::size_t>(1, static_cast<std::size_t>(
                                           std::ceil(cfg.T / sc.solver.dt() - 1e-9)));
    }
    const ValueFunction vf = solve(cfg, field, sc.model);
    const ControlField cf(vf, field, sc.model);
    paths.push_back(integrate_deterministic(cf, sc.x0));
    write_file(out / ("path_sigma_" + tag(sigmas[n]) + ".csv"),
               [&](std::ostream& os) { write_trajectory_csv(os, paths.back()); });
  }
  const std::size_t ref = static_cast<std::size_t>(
      std::find(sigmas.begin(), sigmas.end(), 0.0) - sigmas.begin());

  json rows = json::array();
  write_file(out / "converge.csv", [&](std::ostream& os) {
    os << "sigma,T,max_distance,arc_length,terminal_distance\n";
    for (std::size_t n = 0; n < sigmas.size(); ++n) {
      const double gap = max_path_gap(paths[n], paths[ref]);
      const double T = paths[n].samples.back().t;
      os << format_double(sigmas[n]) << ',' << format_double(T) << ',' << format_double(gap)
         << ',' << format_double(paths[n].arc_length()) << ','
         << format_double(paths[n].terminal_distance) << '\n';
      rows.push_back({{"sigma", sigmas[n]}, {"T", T}, {"max_distance", gap},
                      {"arc_length", paths[n].arc_length()}});
    }
  });
  const double elapsed = clock.seconds();

  json meta;
  meta["command"] = "converge";
  meta["config"] = echo(sc);
  meta["dx"] = sc.solver.dx();
  meta["rows"] = rows;
  add_timing(meta, sc, elapsed);
  write_json(out / "converge.json", meta);
  log << "converge: " << sigmas.size() << " paths, " << elapsed << " s\n";
  return meta;
}

json cmd_control_snapshot(const Scenario& sc, const fs::path& out, std::ostream& log) {
  const std::vector<double> times = sc.snapshot_times.empty() ? std::vector<double>{0.0}
                                                              : sc.snapshot_times;
  if (sc.snapshot_stride == 0) throw ValidationError("snapshot_stride must be positive");
  for (double t : times) {
    if (t < 0.0 || t > sc.solver.T) {
      throw DomainError("snapshot time " + format_double(t) + " outside [0, T]");
    }
  }
  prepare(out);
  const Stopwatch clock;
  const ElevationField field = build_terrain(sc);
  const ValueFunction vf = solve(sc.solver, field, sc.model);
  const ControlField cf(vf, field, sc.model);

  json snaps = json::array();
  for (double t : times) {
    const ControlSnapshot snap = control_field_snapshot(cf, t, sc.snapshot_stride);
    const std::string name = "snapshot_t_" + tag(t) + ".csv";
    write_file(out / name, [&](std::ostream& os) { write_snapshot_csv(os, snap); });
    constexpr double kDeg = 180.0 / 3.14159265358979323846;
    snaps.push_back({{"t", t},
                     {"file", name},
                     {"cols", snap.cols},
                     {"rows", snap.rows},
                     {"max_adjacent_gap_deg", max_adjacent_gap(snap) * kDeg}});
  }
  const double elapsed = clock.seconds();

  json meta;
  meta["command"] = "control-snapshot";
  meta["config"] = echo(sc);
  meta["snapshots"] = snaps;
  add_timing(meta, sc, elapsed);
  write_json(out / "control_snapshot.json", meta);
  log << "control-snapshot: " << times.size() << " snapshots, " << elapsed << " s\n";
  return meta;
}

json cmd_gen_terrain(const Scenario& sc, const fs::path& out, std::ostream& log) {
  prepare(out);
  const ElevationField field = build_terrain(sc);
  write_file(out / "terrain.asc", [&](std::ostream& os) { write_esri_ascii(os, field); });
  json meta;
  meta["command"] = "gen-terrain";
  meta["config"] = echo(sc);
  meta["terrain"] = kind_name(sc.terrain.kind);
  meta["nx"] = field.nx();
  meta["ny"] = field.ny();
  write_json(out / "terrain.json", meta);
  log << "gen-terrain: " << field.nx() << " x " << field.ny() << " nodes\n";
  return meta;
}

}  // namespace hjbpath::cli
