#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hjbpath/control.hpp"
#include "hjbpath/geometry.hpp"
#include "hjbpath/random.hpp"
#include "hjbpath/solver.hpp"

namespace hjbpath {

struct PathSample {
  double t = 0.0;
  Vec2 p;
  /// The step into this sample left the box and was clamped back.
  bool clamped = false;
};

/// Time-stamped path on the solver's time grid t_n = n * T / K.
struct Trajectory {
  std::vector<PathSample> samples;
  double terminal_distance = 0.0;
  double closest_approach = 0.0;
  std::size_t clamped_count = 0;

  double arc_length() const;
  /// Fills terminal_distance, closest_approach and clamped_count.
  void summarize(Vec2 x_end);
};

/// Forward Euler on x' = f(x, s*) s* with the solver's time step. A step
/// whose optimal control is degenerate (flat value function, e.g. inside
/// the reachable set around x_end) applies no drift.
Trajectory integrate_deterministic(const ControlField& cf, Vec2 x0);

struct StochasticOptions {
  /// Drop the drift term, leaving sigma * Brownian motion.
  bool zero_drift = false;
};

/// Euler-Maruyama with additive noise sigma * sqrt(dt) * xi, sigma taken
/// from the solver configuration. Identical to integrate_deterministic when
/// sigma is zero (no variates are drawn).
Trajectory integrate_stochastic(const ControlField& cf, Vec2 x0, RandomStream& rng,
                                const StochasticOptions& opts = {});

struct EnsembleOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  /// Number of leading realizations kept in the result.
  std::size_t retain = 3;
  StochasticOptions stochastic;
};

struct EnsembleStats {
  Trajectory mean_path;
  /// Per-step sample standard deviations (divisor L - 1) of x and y.
  std::vector<Vec2> std_devs;
  std::size_t num_trials = 0;
  std::uint64_t seed = 0;
  /// Trials that were clamped to the box at least once.
  std::size_t clamped_trials = 0;
  std::vector<Trajectory> realizations;
};

/// Runs `trials` stochastic paths; trial l draws from RandomStream(seed, l).
/// Statistics are accumulated in fixed blocks of trials and merged pairwise,
/// so the result does not depend on the thread count. Throws
/// ValidationError for fewer than two trials.
EnsembleStats run_ensemble(const ControlField& cf, Vec2 x0, const EnsembleOptions& opts);

struct ReachProbe {
  double T = 0.0;
  std::size_t K = 0;
  double terminal_distance = 0.0;
  bool reached = false;
};

/// Solves with horizon T (time step matched to the template's) and follows
/// the deterministic path from x0; reached means terminal_distance <=
/// reach_tol.
ReachProbe probe_reach(const ElevationField& field, const SpeedModel& model, Vec2 x0,
                       const SolverConfig& tmpl, double T, double reach_tol);

struct CriticalTimeOptions {
  double T_lo = 0.0;
  double T_hi = 0.0;
  double reach_tol = 0.0;
  double tol_T = 1e-2;
  std::size_t max_probes = 64;
};

struct CriticalTimeResult {
  double T_star = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  /// Every probe in evaluation order, bracket endpoints first.
  std::vector<ReachProbe> trace;
};

/// Bisection for the smallest horizon whose deterministic path reaches
/// x_end. Throws BracketError unless reach(T_lo) is false and reach(T_hi)
/// is true.
CriticalTimeResult critical_time_search(const ElevationField& field, const SpeedModel& model,
                                        Vec2 x0, const SolverConfig& tmpl,
                                        const CriticalTimeOptions& opts);

}  // namespace hjbpath
