#include "hjbpath/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hjbpath/error.hpp"

namespace hjbpath {

namespace {

// Trials per accumulation block. Fixed so the reduction tree does not
// depend on the number of threads.
constexpr std::size_t kBlock = 64;

struct StepStats {
  double n = 0.0;
  Vec2 mean;
  Vec2 m2;
};

void push(StepStats& s, Vec2 p) {
  s.n += 1.0;
  const Vec2 d = p - s.mean;
  s.mean += (1.0 / s.n) * d;
  const Vec2 d2 = p - s.mean;
  s.m2 += Vec2{d.x * d2.x, d.y * d2.y};
}

StepStats merge(const StepStats& a, const StepStats& b) {
  if (a.n == 0.0) return b;
  if (b.n == 0.0) return a;
  StepStats r;
  r.n = a.n + b.n;
  const Vec2 d = b.mean - a.mean;
  r.mean = a.mean + (b.n / r.n) * d;
  const double w = a.n * b.n / r.n;
  r.m2 = a.m2 + b.m2 + Vec2{w * d.x * d.x, w * d.y * d.y};
  return r;
}

// Pairwise merge of blocks [lo, hi) at one time step.
StepStats reduce(const std::vector<std::vector<StepStats>>& blocks, std::size_t lo,
                 std::size_t hi, std::size_t step) {
  if (hi - lo == 1) return blocks[lo][step];
  const std::size_t mid = lo + (hi - lo) / 2;
  return merge(reduce(blocks, lo, mid, step), reduce(blocks, mid, hi, step));
}

struct Stepper {
  const ControlField& cf;
  Box box;
  double dt;
  std::size_t K;

  Vec2 drift(Vec2 p, std::size_t n) const {
    const ControlValue c = cf.optimal_control_at_slice(p, K - n);
    if (c.degenerate) return {};
    return (dt * c.speed) * c.s.dir;
  }

  PathSample land(Vec2 p, std::size_t n) const {
    const bool out = !box.contains(p);
    return {static_cast<double>(n) * dt, out ? box.clamp(p) : p, out};
  }
};

template <class Noise>
Trajectory integrate(const ControlField& cf, Vec2 x0, bool zero_drift, Noise noise) {
  const SolverConfig& cfg = cf.value_function().config();
  const double slack = 1e-9 * std::min(cfg.dx(), cfg.dy());
  if (!cfg.box.contains(x0, slack)) {
    throw DomainError("start point (" + std::to_string(x0.x) + ", " + std::to_string(x0.y) +
                      ") outside the solver box");
  }
  const Stepper st{cf, cfg.box, cfg.dt(), cfg.K};
  Trajectory path;
  path.samples.reserve(cfg.K + 1);
  path.samples.push_back({0.0, cfg.box.clamp(x0), false});
  for (std::size_t n = 0; n < cfg.K; ++n) {
    Vec2 p = path.samples.back().p;
    if (!zero_drift) p += st.drift(p, n);
    p += noise();
    path.samples.push_back(st.land(p, n + 1));
  }
  path.summarize(cfg.x_end);
  return path;
}

}  // namespace

double Trajectory::arc_length() const {
  double len = 0.0;
  for (std::size_t n = 1; n < samples.size(); ++n) {
    len += distance(samples[n].p, samples[n - 1].p);
  }
  return len;
}

void Trajectory::summarize(Vec2 x_end) {
  terminal_distance = samples.empty() ? 0.0 : distance(samples.back().p, x_end);
  closest_approach = std::numeric_limits<double>::infinity();
  clamped_count = 0;
  for (const auto& s : samples) {
    closest_approach = std::min(closest_approach, distance(s.p, x_end));
    if (s.clamped) ++clamped_count;
  }
}

Trajectory integrate_deterministic(const ControlField& cf, Vec2 x0) {
  return integrate(cf, x0, false, [] { return Vec2{}; });
}

Trajectory integrate_stochastic(const ControlField& cf, Vec2 x0, RandomStream& rng,
                                const StochasticOptions& opts) {
  const SolverConfig& cfg = cf.value_function().config();
  if (cfg.sigma == 0.0) return integrate(cf, x0, opts.zero_drift, [] { return Vec2{}; });
  const double scale = cfg.sigma * std::sqrt(cfg.dt());
  return integrate(cf, x0, opts.zero_drift, [&] {
    const double a = rng.normal();
    const double b = rng.normal();
    return Vec2{scale * a, scale * b};
  });
}

EnsembleStats run_ensemble(const ControlField& cf, Vec2 x0, const EnsembleOptions& opts) {
  if (opts.trials < 2) throw ValidationError("an ensemble needs at least two trials");
  const SolverConfig& cfg = cf.value_function().config();
  const std::size_t steps = cfg.K + 1;
  const std::size_t n_blocks = (opts.trials + kBlock - 1) / kBlock;
  const std::size_t retain = std::min(opts.retain, opts.trials);

  std::vector<std::vector<StepStats>> blocks(n_blocks, std::vector<StepStats>(steps));
  std::vector<std::size_t> clamped(n_blocks, 0);
  std::vector<Trajectory> kept(retain);

  const auto nb = static_cast<long long>(n_blocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long b = 0; b < nb; ++b) {
    const auto blk = static_cast<std::size_t>(b);
    const std::size_t first = blk * kBlock;
    const std::size_t last = std::min(first + kBlock, opts.trials);
    for (std::size_t l = first; l < last; ++l) {
      RandomStream rng(opts.seed, l);
      Trajectory path = integrate_stochastic(cf, x0, rng, opts.stochastic);
      for (std::size_t n = 0; n < steps; ++n) push(blocks[blk][n], path.samples[n].p);
      if (path.clamped_count > 0) ++clamped[blk];
      if (l < retain) kept[l] = std::move(path);
    }
  }

  EnsembleStats out;
  out.num_trials = opts.trials;
  out.seed = opts.seed;
  out.realizations = std::move(kept);
  for (std::size_t c : clamped) out.clamped_trials += c;
  out.mean_path.samples.resize(steps);
  out.std_devs.resize(steps);
  const double denom = static_cast<double>(opts.trials - 1);
  for (std::size_t n = 0; n < steps; ++n) {
    const StepStats s = reduce(blocks, 0, n_blocks, n);
    out.mean_path.samples[n] = {static_cast<double>(n) * cfg.dt(), s.mean, false};
    out.std_devs[n] = {std::sqrt(std::max(s.m2.x, 0.0) / denom),
                       std::sqrt(std::max(s.m2.y, 0.0) / denom)};
  }
  out.mean_path.summarize(cfg.x_end);
  return out;
}

ReachProbe probe_reach(const ElevationField& field, const SpeedModel& model, Vec2 x0,
                       const SolverConfig& tmpl, double T, double reach_tol) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("probe horizon must be positive");
  SolverConfig cfg = tmpl;
  cfg.T = T;
  cfg.K = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / tmpl.dt() - 1e-9)));
  const ValueFunction vf = solve(cfg, field, model);
  const ControlField cf(vf, field, model);
  const Trajectory path = integrate_deterministic(cf, x0);
  return {T, vf.config().K, path.terminal_distance, path.terminal_distance <= reach_tol};
}

CriticalTimeResult critical_time_search(const ElevationField& field, const SpeedModel& model,
                                        Vec2 x0, const SolverConfig& tmpl,
                                        const CriticalTimeOptions& opts) {
  if (!(opts.T_lo > 0.0) || !(opts.T_hi > opts.T_lo)) {
    throw BracketError("bracket must satisfy 0 < T_lo < T_hi");
  }
  if (!(opts.tol_T > 0.0)) throw ValidationError("tol_T must be positive");
  if (!(opts.reach_tol > 0.0)) throw ValidationError("reach tolerance must be positive");

  CriticalTimeResult res;
  auto probe = [&](double T) {
    res.trace.push_back(probe_reach(field, model, x0, tmpl, T, opts.reach_tol));
    return res.trace.back().reached;
  };
  const bool lo_reached = probe(opts.T_lo);
  const bool hi_reached = probe(opts.T_hi);
  if (lo_reached || !hi_reached) {
    throw BracketError("invalid bracket: reach(T_lo) = " + std::string(lo_reached ? "true" : "false") +
                       ", reach(T_hi) = " + std::string(hi_reached ? "true" : "false"));
  }
  double lo = opts.T_lo;
  double hi = opts.T_hi;
  for (std::size_t n = 2; hi - lo > opts.tol_T && n < opts.max_probes; ++n) {
    const double mid = 0.5 * (lo + hi);
    (probe(mid) ? hi : lo) = mid;
  }
  res.lo = lo;
  res.hi = hi;
  res.T_star = 0.5 * (lo + hi);
  return res;
}

}  // namespace hjbpath
