#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "hjbpath/error.hpp"
#include "hjbpath/parallel.hpp"
#include "hjbpath/trajectory.hpp"

using namespace hjbpath;

namespace {

const double kV0 = 1.11 * std::exp(-4.0 / 2345.0);

SolverConfig flat_config(double T, double sigma = 0.0) {
  SolverConfig c;
  c.box = {-1, 1, -1, 1};
  c.N = c.M = 50;
  c.T = T;
  c.K = 1;
  c.sigma = sigma;
  c.x_end = {0.6, 0.0};
  return enforce_cfl(c, SpeedModel{});
}

struct Solved {
  SolverConfig cfg;
  ElevationField field;
  ValueFunction vf;
  ControlField cf;
  explicit Solved(SolverConfig c)
      : cfg(c),
        field(make_synthetic({c.box, c.N + 1, c.M + 1}, FlatTerrain{})),
        vf(solve(c, field, SpeedModel{})),
        cf(vf, field, SpeedModel{}) {}
};

bool same_samples(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size()) return false;
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    if (std::memcmp(&a.samples[n].p, &b.samples[n].p, sizeof(Vec2)) != 0) return false;
    if (a.samples[n].t != b.samples[n].t) return false;
  }
  return true;
}

}  // namespace

TEST(Deterministic, ReachesTargetWithEnoughTime) {
  const Vec2 x0{-0.6, 0.0};
  const double d = 1.2;
  const Solved s(flat_config(1.15 * d / kV0));
  const Trajectory path = integrate_deterministic(s.cf, x0);
  EXPECT_LE(path.terminal_distance, 3.0 * s.cfg.dx());
  EXPECT_LE(path.closest_approach, path.terminal_distance);
}

TEST(Deterministic, ShortHorizonTravelsAtLevelSpeed) {
  const Vec2 x0{-0.6, 0.3};
  const Solved s(flat_config(0.6));
  const Trajectory path = integrate_deterministic(s.cf, x0);
  const double d = distance(x0, s.cfg.x_end);
  EXPECT_NEAR(path.terminal_distance, d - kV0 * s.cfg.T, 3.0 * s.cfg.dx());
}

TEST(Deterministic, StartingAtTargetStaysThere) {
  const Solved s(flat_config(0.5));
  const Trajectory path = integrate_deterministic(s.cf, s.cfg.x_end);
  for (const auto& p : path.samples) EXPECT_LE(distance(p.p, s.cfg.x_end), 2.0 * s.cfg.dx());
}

TEST(Deterministic, UniformTimesAndSpeedBound) {
  SolverConfig c = flat_config(1.0);
  const ElevationField f = make_synthetic(
      {c.box, c.N + 1, c.M + 1}, GaussianMountains{{{{0.0, 0.0}, 0.6, 0.3}}, 0.0});
  const ValueFunction vf = solve(c, f, SpeedModel{});
  const ControlField cf(vf, f, SpeedModel{});
  const Trajectory path = integrate_deterministic(cf, {-0.7, 0.05});
  ASSERT_EQ(path.samples.size(), c.K + 1);
  EXPECT_EQ(path.samples.front().t, 0.0);
  EXPECT_NEAR(path.samples.back().t, c.T, 1e-12);
  for (std::size_t n = 1; n < path.samples.size(); ++n) {
    EXPECT_NEAR(path.samples[n].t - path.samples[n - 1].t, c.dt(), 1e-12);
    EXPECT_LE(distance(path.samples[n].p, path.samples[n - 1].p), 1.11 * c.dt() + 1e-12);
  }
}

TEST(Stochastic, ZeroSigmaMatchesDeterministic) {
  const Solved s(flat_config(0.8));
  RandomStream rng(1, 0);
  EXPECT_TRUE(same_samples(integrate_stochastic(s.cf, {-0.5, 0.4}, rng),
                           integrate_deterministic(s.cf, {-0.5, 0.4})));
}

TEST(Stochastic, ZeroDriftIsBrownianMotion) {
  const double sigma = 0.2;
  const Solved s(flat_config(0.4, sigma));
  EnsembleOptions opts;
  opts.trials = 4000;
  opts.seed = 99;
  opts.stochastic.zero_drift = true;
  const Vec2 x0{-0.2, 0.1};
  const EnsembleStats st = run_ensemble(s.cf, x0, opts);
  const double T = s.cfg.T;
  const double L = static_cast<double>(opts.trials);
  const Vec2 mean = st.mean_path.samples.back().p;
  const Vec2 sd = st.std_devs.back();
  EXPECT_LT(std::abs(mean.x - x0.x), 4.0 * sigma * std::sqrt(T / L));
  EXPECT_LT(std::abs(mean.y - x0.y), 4.0 * sigma * std::sqrt(T / L));
  const double var = sigma * sigma * T;
  const double se = var * std::sqrt(2.0 / (L - 1.0));
  EXPECT_LT(std::abs(sd.x * sd.x - var), 4.0 * se);
  EXPECT_LT(std::abs(sd.y * sd.y - var), 4.0 * se);
  EXPECT_EQ(st.clamped_trials, 0u);
}

TEST(Ensemble, ZeroSigmaCollapsesOntoDeterministicPath) {
  const Solved s(flat_config(0.8));
  EnsembleOptions opts;
  opts.trials = 10;
  const EnsembleStats st = run_ensemble(s.cf, {-0.5, -0.2}, opts);
  const Trajectory det = integrate_deterministic(s.cf, {-0.5, -0.2});
  ASSERT_EQ(st.mean_path.samples.size(), det.samples.size());
  for (std::size_t n = 0; n < det.samples.size(); ++n) {
    EXPECT_DOUBLE_EQ(st.mean_path.samples[n].p.x, det.samples[n].p.x);
    EXPECT_DOUBLE_EQ(st.mean_path.samples[n].p.y, det.samples[n].p.y);
    EXPECT_EQ(st.std_devs[n], (Vec2{0.0, 0.0}));
  }
}

TEST(Ensemble, TwoTrialStandardDeviation) {
  const Solved s(flat_config(0.5, 0.3));
  EnsembleOptions opts;
  opts.trials = 2;
  opts.retain = 2;
  opts.seed = 5;
  const EnsembleStats st = run_ensemble(s.cf, {-0.4, 0.2}, opts);
  ASSERT_EQ(st.realizations.size(), 2u);
  for (std::size_t n = 0; n < st.std_devs.size(); ++n) {
    const Vec2 d = st.realizations[0].samples[n].p - st.realizations[1].samples[n].p;
    EXPECT_NEAR(st.std_devs[n].x, std::abs(d.x) / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(st.std_devs[n].y, std::abs(d.y) / std::sqrt(2.0), 1e-12);
  }
}

TEST(Ensemble, ReproducibleAndThreadIndependent) {
  const Solved s(flat_config(0.5, 0.2));
  EnsembleOptions opts;
  opts.trials = 300;
  opts.seed = 17;
  set_num_threads(1);
  const EnsembleStats a = run_ensemble(s.cf, {-0.4, 0.2}, opts);
  set_num_threads(4);
  const EnsembleStats b = run_ensemble(s.cf, {-0.4, 0.2}, opts);
  set_num_threads(0);
  EXPECT_TRUE(same_samples(a.mean_path, b.mean_path));
  ASSERT_EQ(a.std_devs.size(), b.std_devs.size());
  EXPECT_EQ(std::memcmp(a.std_devs.data(), b.std_devs.data(), a.std_devs.size() * sizeof(Vec2)), 0);
  opts.seed = 18;
  const EnsembleStats c = run_ensemble(s.cf, {-0.4, 0.2}, opts);
  EXPECT_FALSE(same_samples(a.mean_path, c.mean_path));
}

TEST(Ensemble, NeedsTwoTrials) {
  const Solved s(flat_config(0.5, 0.2));
  EnsembleOptions opts;
  opts.trials = 1;
  EXPECT_THROW(run_ensemble(s.cf, {0, 0}, opts), ValidationError);
}

TEST(CriticalTime, FlatTerrainMatchesTravelTime) {
  SolverConfig tmpl = flat_config(1.0);
  const ElevationField f = make_synthetic({tmpl.box, tmpl.N + 1, tmpl.M + 1}, FlatTerrain{});
  const Vec2 x0{-0.6, 0.0};
  const double d = 1.2;
  CriticalTimeOptions opts;
  opts.T_lo = 0.5;
  opts.T_hi = 1.6;
  opts.reach_tol = 3.0 * tmpl.dx();
  opts.tol_T = 0.01;
  const CriticalTimeResult r = critical_time_search(f, SpeedModel{}, x0, tmpl, opts);
  EXPECT_LE(r.hi - r.lo, opts.tol_T);
  EXPECT_NEAR(r.T_star, d / kV0, opts.tol_T + 4.0 * tmpl.dx() / kV0);
  ASSERT_GE(r.trace.size(), 2u);
  EXPECT_FALSE(r.trace[0].reached);
  EXPECT_TRUE(r.trace[1].reached);
}

TEST(CriticalTime, InvalidBracket) {
  SolverConfig tmpl = flat_config(1.0);
  const ElevationField f = make_synthetic({tmpl.box, tmpl.N + 1, tmpl.M + 1}, FlatTerrain{});
  CriticalTimeOptions opts;
  opts.T_lo = 1.6;
  opts.T_hi = 0.5;
  opts.reach_tol = 3.0 * tmpl.dx();
  EXPECT_THROW(critical_time_search(f, SpeedModel{}, {-0.6, 0.0}, tmpl, opts), BracketError);
  opts.T_lo = 1.5;
  opts.T_hi = 1.6;
  EXPECT_THROW(critical_time_search(f, SpeedModel{}, {-0.6, 0.0}, tmpl, opts), BracketError);
}
