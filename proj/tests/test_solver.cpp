#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "hjbpath/error.hpp"
#include "hjbpath/parallel.hpp"
#include "hjbpath/solver.hpp"

using namespace hjbpath;

namespace {

const double kV0 = 1.11 * std::exp(-4.0 / 2345.0);

SolverConfig flat_config(std::size_t n, double T) {
  SolverConfig c;
  c.box = {-1, 1, -1, 1};
  c.N = c.M = n;
  c.T = T;
  c.K = 1;
  c.x_end = {0.0, 0.0};
  return enforce_cfl(c, SpeedModel{});
}

ElevationField flat_field(const SolverConfig& c) {
  return make_synthetic({c.box, c.N + 1, c.M + 1}, FlatTerrain{});
}

SolverConfig mountain_config(std::size_t n) {
  SolverConfig c;
  c.box = {0, 4, 0, 3};
  c.N = n;
  c.M = n * 3 / 4;
  c.T = 1.0;
  c.K = 1;
  c.x_end = {3.5, 1.5};
  return enforce_cfl(c, SpeedModel{});
}

ElevationField mountain_field(const SolverConfig& c) {
  return make_synthetic({c.box, c.N + 1, c.M + 1},
                        GaussianMountains{{{{1.7, 1.3}, 1.0, 0.4}, {{2.3, 1.9}, 1.0, 0.4}}, 0.0});
}

double cone(Vec2 p, Vec2 c, double t) { return std::max(distance(p, c) - kV0 * t, 0.0); }

// Nodes farther than 3 cells from both the target and the cone's kink.
bool away_from_kink(Vec2 p, const SolverConfig& c, double t) {
  const double r = distance(p, c.x_end);
  const double h = 3.0 * std::max(c.dx(), c.dy());
  return r > h && std::abs(r - kV0 * t) > h;
}

}  // namespace

TEST(SolverConfig, Validation) {
  const SpeedModel m;
  SolverConfig c = flat_config(20, 0.5);
  EXPECT_NO_THROW(c.validate(m));
  SolverConfig bad = c;
  bad.N = 3;
  EXPECT_THROW(bad.validate(m), ValidationError);
  bad = c;
  bad.x_end = {0.95, 0.0};
  EXPECT_THROW(bad.validate(m), ValidationError);
  bad = c;
  bad.sigma = -0.1;
  EXPECT_THROW(bad.validate(m), ValidationError);
  bad = c;
  bad.cfl_safety = 1.0;
  EXPECT_THROW(bad.validate(m), ValidationError);
  bad = c;
  bad.T = 0.0;
  EXPECT_THROW(bad.validate(m), ValidationError);
}

TEST(SolverConfig, CflRaisesK) {
  SolverConfig c;
  c.box = {0, 1, 0, 1};
  c.N = c.M = 50;
  c.T = 1.0;
  c.K = 10;
  c.x_end = {0.5, 0.5};
  const SolverConfig r = enforce_cfl(c, SpeedModel{});
  EXPECT_LE(r.cfl_number(1.11), 0.9);
  EXPECT_GT(SolverConfig{r}.cfl_number(1.11) * r.K / (r.K - 1), 0.9);
  c.K = 10000;
  EXPECT_EQ(enforce_cfl(c, SpeedModel{}).K, 10000u);
}

TEST(TerminalCondition, DistanceToTarget) {
  SolverConfig c;
  c.box = {0, 10, 0, 10};
  c.N = c.M = 10;
  c.x_end = {2, 2};
  const Slice u = terminal_condition(c);
  const Grid g(c);
  EXPECT_EQ(u[g.index(2, 2)], 0.0);
  EXPECT_EQ(u[g.index(5, 6)], 5.0);
}

TEST(ApplyBcs, KaoClosure) {
  SolverConfig c;
  c.box = {0, 1, 0, 1};
  c.N = c.M = 4;
  const Grid g(c);
  auto check = [&](double u1, double u2, double prev, double want) {
    Slice u(g.size(), 7.0), p(g.size(), 7.0);
    u[g.index(1, 2)] = u1;
    u[g.index(2, 2)] = u2;
    p[g.index(0, 2)] = prev;
    apply_bcs(u, p, g);
    EXPECT_EQ(u[g.index(0, 2)], want);
  };
  check(2, 3, 5, 3);
  check(4, 5, 10, 5);
  check(2, 3, 1, 1);
}

TEST(ApplyBcs, CornerTakesSmallerEdgeValue) {
  SolverConfig c;
  c.box = {0, 1, 0, 1};
  c.N = c.M = 6;
  const Grid g(c);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  auto kao = [](double near, double far, double prev) {
    return std::min(std::max(2.0 * near - far, far), prev);
  };
  for (int n = 0; n < 50; ++n) {
    Slice u(g.size()), p(g.size());
    for (double& x : u) x = d(rng);
    for (double& x : p) x = d(rng);
    apply_bcs(u, p, g);
    const std::size_t X = g.nx - 1, Y = g.ny - 1;
    EXPECT_EQ(u[g.index(0, 0)], std::min(kao(u[g.index(1, 0)], u[g.index(2, 0)], p[g.index(0, 0)]),
                                         kao(u[g.index(0, 1)], u[g.index(0, 2)], p[g.index(0, 0)])));
    EXPECT_EQ(u[g.index(X, Y)],
              std::min(kao(u[g.index(X - 1, Y)], u[g.index(X - 2, Y)], p[g.index(X, Y)]),
                       kao(u[g.index(X, Y - 1)], u[g.index(X, Y - 2)], p[g.index(X, Y)])));
    // Boundary values never rise.
    for (std::size_t j = 0; j < g.ny; ++j) EXPECT_LE(u[g.index(0, j)], p[g.index(0, j)]);
  }
}

TEST(StepExplicit, ConstantIsSteady) {
  SolverConfig c = mountain_config(24);
  const auto f = mountain_field(c);
  const HjbStepper s(c, f, SpeedModel{});
  const Slice u(s.grid().size(), 2.5);
  EXPECT_EQ(s.step_explicit(u), u);
}

TEST(StepExplicit, NonFiniteInputNamesTheNode) {
  SolverConfig c = flat_config(20, 0.2);
  const HjbStepper s(c, flat_field(c), SpeedModel{});
  Slice u = terminal_condition(c);
  u[s.grid().index(7, 9)] = NAN;
  try {
    s.step_explicit(u);
    FAIL() << "expected NumericalBlowupError";
  } catch (const NumericalBlowupError& e) {
    EXPECT_NE(std::string(e.what()).find("(6, 9)"), std::string::npos) << e.what();
  }
}

TEST(StepExplicit, AdvancesTheExactCone) {
  // One step from the exact cone at backward time t lands on the cone at
  // t + dt to first order.
  for (std::size_t n : {40, 80}) {
    SolverConfig c = flat_config(n, 0.5);
    const HjbStepper s(c, flat_field(c), SpeedModel{});
    const Grid& g = s.grid();
    const double t = 0.3;
    Slice u(g.size());
    for (std::size_t i = 0; i < g.nx; ++i)
      for (std::size_t j = 0; j < g.ny; ++j) u[g.index(i, j)] = cone(g.node(i, j), c.x_end, t);
    const Slice v = s.step_explicit(u);
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      for (std::size_t j = 1; j + 1 < g.ny; ++j) {
        const Vec2 p = g.node(i, j);
        if (!away_from_kink(p, c, t + c.dt())) continue;
        err = std::max(err, std::abs(v[g.index(i, j)] - cone(p, c.x_end, t + c.dt())));
      }
    }
    EXPECT_LE(err, c.dx() + c.dt()) << n;
  }
}

TEST(StepSemiImplicit, ZeroSigmaIsBitIdenticalToExplicit) {
  SolverConfig c = mountain_config(40);
  const auto f = mountain_field(c);
  const HjbStepper s(c, f, SpeedModel{});
  Slice a = terminal_condition(c);
  Slice b = a;
  for (std::size_t k = 0; k < 20; ++k) {
    a = s.step_explicit(a);
    b = s.step_semi_implicit(b);
  }
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
}

TEST(StepSemiImplicit, ConstantPreserved) {
  SolverConfig c = mountain_config(24);
  c.sigma = 0.7;
  const HjbStepper s(c, mountain_field(c), SpeedModel{});
  const Slice u(s.grid().size(), 1.25);
  const Slice v = s.step_semi_implicit(u);
  for (double x : v) EXPECT_NEAR(x, 1.25, 1e-12);
  EXPECT_LE(s.last_residual(), 1e-10);
}

TEST(StepSemiImplicit, LargeDiffusionStepsStayBounded) {
  SolverConfig c = flat_config(50, 1.0);
  c.sigma = 1.0;
  c.K = static_cast<std::size_t>(std::ceil(c.T / (10.0 * c.dx() * c.dx())));
  ASSERT_LE(c.cfl_number(1.11), 0.9);
  const double diam = c.box.diameter();
  const HjbStepper s(c, flat_field(c), SpeedModel{});
  Slice u = terminal_condition(c);
  const double top = *std::max_element(u.begin(), u.end());
  for (std::size_t k = 0; k < c.K; ++k) {
    const Slice v = s.step(u);
    EXPECT_LE(*std::max_element(v.begin(), v.end()), *std::max_element(u.begin(), u.end()) + 1e-12);
    u = v;
  }
  EXPECT_LE(*std::max_element(u.begin(), u.end()), top);
  EXPECT_GE(*std::min_element(u.begin(), u.end()), -1e-6 * diam);
}

TEST(Solve, InvariantsHoldEveryStep) {
  // Godunov sigma = 0 (pointwise bound), Lax-Friedrichs, and sigma > 0.
  for (int variant = 0; variant < 3; ++variant) {
    SolverConfig c = mountain_config(32);
    c.check_invariants = true;
    if (variant == 1) c.hamiltonian.scheme = NumericalScheme::kLaxFriedrichs;
    if (variant == 2) c.sigma = 0.3;
    c = enforce_cfl(c, SpeedModel{});
    ValueFunction vf = solve(c, mountain_field(c), SpeedModel{});
    const double tol = 1e-6 * c.box.diameter();
    const auto u0 = vf.slice(0);
    const double top = *std::max_element(u0.begin(), u0.end());
    for (std::size_t k = 0; k < vf.num_slices(); ++k) {
      const auto u = vf.slice(k);
      for (std::size_t n = 0; n < u.size(); ++n) {
        ASSERT_GE(u[n], -tol);
        ASSERT_LE(u[n], (variant == 0 ? u0[n] : top) + tol);
      }
    }
  }
}

TEST(Solve, TerminalSliceIsExactDistance) {
  SolverConfig c = mountain_config(24);
  const ValueFunction vf = solve(c, mountain_field(c), SpeedModel{});
  const Grid& g = vf.grid();
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) EXPECT_EQ(vf.at(0, i, j), distance(g.node(i, j), c.x_end));
}

TEST(Solve, FlatTerrainStaysLipschitz) {
  SolverConfig c = flat_config(60, 0.6);
  const ValueFunction vf = solve(c, flat_field(c), SpeedModel{});
  const Grid& g = vf.grid();
  double worst = 0.0;
  for (std::size_t k = 0; k < vf.num_slices(); ++k) {
    for (std::size_t i = 0; i + 1 < g.nx; ++i)
      for (std::size_t j = 0; j < g.ny; ++j)
        worst = std::max(worst, std::abs(vf.at(k, i + 1, j) - vf.at(k, i, j)) / g.dx);
  }
  EXPECT_LE(worst, 1.0 + c.dx());
}

TEST(Solve, LaxFriedrichsIsMoreDiffusiveThanGodunov) {
  auto l1 = [](NumericalScheme scheme) {
    SolverConfig c = flat_config(60, 0.4);
    c.hamiltonian.scheme = scheme;
    c = enforce_cfl(c, SpeedModel{});
    const Slice u = march(c, flat_field(c), SpeedModel{});
    const Grid g(c);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i)
      for (std::size_t j = 0; j < g.ny; ++j)
        if (away_from_kink(g.node(i, j), c, c.T))
          sum += std::abs(u[g.index(i, j)] - cone(g.node(i, j), c.x_end, c.T)) * g.dx * g.dy;
    return sum;
  };
  EXPECT_GE(l1(NumericalScheme::kLaxFriedrichs), l1(NumericalScheme::kGodunov));
}

TEST(Solve, DeterministicAcrossRunsAndThreadCounts) {
  SolverConfig c = mountain_config(40);
  c.sigma = 0.2;
  const auto f = mountain_field(c);
  set_num_threads(1);
  const ValueFunction a = solve(c, f, SpeedModel{});
  set_num_threads(3);
  const ValueFunction b = solve(c, f, SpeedModel{});
  set_num_threads(0);
  ASSERT_EQ(a.data().size(), b.data().size());
  EXPECT_EQ(std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(double)), 0);
}

TEST(Solve, MemoryBudget) {
  SolverConfig c = flat_config(40, 0.5);
  c.value_cap = 1000;
  EXPECT_THROW(solve(c, flat_field(c), SpeedModel{}), MemoryBudgetError);
}

TEST(Solve, MarchMatchesLastSlice) {
  SolverConfig c = mountain_config(24);
  const auto f = mountain_field(c);
  const ValueFunction vf = solve(c, f, SpeedModel{});
  std::size_t seen = 0;
  const Slice last = march(c, f, SpeedModel{}, [&](std::size_t k, std::span<const double> u) {
    EXPECT_EQ(k, seen++);
    EXPECT_TRUE(std::equal(u.begin(), u.end(), vf.slice(k).begin()));
  });
  EXPECT_EQ(seen, vf.num_slices());
  EXPECT_TRUE(std::equal(last.begin(), last.end(), vf.slice(c.K).begin()));
}

TEST(ValueFunction, SliceForTime) {
  SolverConfig c = flat_config(20, 0.5);
  const ValueFunction vf = solve(c, flat_field(c), SpeedModel{});
  EXPECT_EQ(vf.slice_for_time(c.T), 0u);
  EXPECT_EQ(vf.slice_for_time(0.0), c.K);
  EXPECT_EQ(vf.slice_for_time(c.T - 2.0 * c.dt()), 2u);
  EXPECT_THROW(vf.slice_for_time(c.T + 1.0), DomainError);
}
