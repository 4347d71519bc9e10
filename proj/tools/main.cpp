// hjbpath: plan walking paths over terrain from a scenario file.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "hjbpath/error.hpp"
#include "hjbpath/io.hpp"
#include "hjbpath/parallel.hpp"

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (n) s += ',';
    s += hjbpath::format_double(v[n]);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = hjbpath::cli;

  CLI::App app{"Optimal walking paths over terrain via Hamilton-Jacobi-Bellman equations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--config", config_path, "Scenario file (key = value lines)")->required();
  app.add_option("--out", out_dir, "Output directory (default: output_dir key or .)");
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--threads", threads, "Worker threads (0: runtime default)");

  auto* solve = app.add_subcommand("solve", "Solve the value function and dump it");
  auto* path = app.add_subcommand("path", "Deterministic optimal path");
  auto* ensemble = app.add_subcommand("ensemble", "Stochastic path ensemble statistics");
  auto* critical = app.add_subcommand("critical-time", "Bisect the critical horizon T*");
  auto* converge = app.add_subcommand("converge", "Path distance to sigma = 0 over a sigma list");
  auto* snapshot = app.add_subcommand("control-snapshot", "Optimal control arrow fields");
  auto* gen = app.add_subcommand("gen-terrain", "Write the scenario terrain as an ESRI grid");

  std::optional<double> t_lo, t_hi, reach_tol, tol_t;
  critical->add_option("--t-lo", t_lo, "Lower bracket (must not reach)");
  critical->add_option("--t-hi", t_hi, "Upper bracket (must reach)");
  critical->add_option("--reach-tol", reach_tol, "Reach tolerance (default 3 cells)");
  critical->add_option("--tol-t", tol_t, "Bracket width to stop at");

  std::vector<double> sigmas, t_list;
  converge->add_option("--sigmas", sigmas, "Sigma values, must include 0")->delimiter(',');
  converge->add_option("--t-list", t_list, "Per-sigma horizons")->delimiter(',');

  std::vector<double> times;
  std::optional<std::size_t> stride;
  snapshot->add_option("--times", times, "Forward times in [0, T]")->delimiter(',');
  snapshot->add_option("--stride", stride, "Node stride of the arrow grid");

  CLI11_PARSE(app, argc, argv);

  try {
    hjbpath::set_num_threads(threads);

    std::map<std::string, std::string> overrides;
    if (seed) overrides["seed"] = std::to_string(*seed);
    if (t_lo) overrides["T_lo"] = hjbpath::format_double(*t_lo);
    if (t_hi) overrides["T_hi"] = hjbpath::format_double(*t_hi);
    if (reach_tol) overrides["reach_tol"] = hjbpath::format_double(*reach_tol);
    if (tol_t) overrides["tol_T"] = hjbpath::format_double(*tol_t);
    if (!sigmas.empty()) overrides["sigma_list"] = join(sigmas);
    if (!t_list.empty()) overrides["T_list"] = join(t_list);
    if (!times.empty()) overrides["snapshot_times"] = join(times);
    if (stride) overrides["snapshot_stride"] = std::to_string(*stride);

    const cli::Scenario sc = cli::load_scenario(config_path, overrides);
    const std::filesystem::path out = out_dir.empty() ? sc.output_dir : std::filesystem::path(out_dir);

    if (*solve) cli::cmd_solve(sc, out, std::cout);
    if (*path) cli::cmd_path(sc, out, std::cout);
    if (*ensemble) cli::cmd_ensemble(sc, out, std::cout);
    if (*critical) cli::cmd_critical_time(sc, out, std::cout);
    if (*converge) cli::cmd_converge(sc, out, std::cout);
    if (*snapshot) cli::cmd_control_snapshot(sc, out, std::cout);
    if (*gen) cli::cmd_gen_terrain(sc, out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "hjbpath: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
