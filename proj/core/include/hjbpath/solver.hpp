#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "hjbpath/geometry.hpp"
#include "hjbpath/hamiltonian.hpp"
#include "hjbpath/kinematics.hpp"
#include "hjbpath/terrain.hpp"

namespace hjbpath {

/// Discretization of the terminal-value problem
///   u_t + (sigma^2 / 2) Lap u + H(x, grad u) = 0,  u(x, T) = |x - x_end|
/// on box x [0, T] with N x M cells and K time steps.
struct SolverConfig {
  Box box;
  std::size_t N = 100;
  std::size_t M = 100;
  std::size_t K = 100;
  double T = 1.0;
  double sigma = 0.0;
  Vec2 x_end;
  HamiltonianConfig hamiltonian;
  double cfl_safety = 0.9;
  /// Upper bound on (K+1)(N+1)(M+1) stored values.
  std::size_t value_cap = 200'000'000;
  /// Check non-negativity and the backward bound after every step.
  bool check_invariants = false;

  double dx() const { return box.width() / static_cast<double>(N); }
  double dy() const { return box.height() / static_cast<double>(M); }
  double dt() const { return T / static_cast<double>(K); }

  /// dt * speed * (1/dx + 1/dy).
  double cfl_number(double speed) const;

  /// Throws ValidationError on a degenerate box, N or M < 4, K < 1,
  /// non-positive T, negative sigma, a safety factor outside (0, 1),
  /// x_end closer than two cells to the box edge, or an invalid
  /// Hamiltonian configuration.
  void validate(const SpeedModel& model) const;
};

/// Fastest characteristic speed the CFL bound must cover: the model's
/// maximum speed, or the dissipation bounds for Lax-Friedrichs.
double characteristic_speed(const SolverConfig& cfg, const SpeedModel& model);

/// Returns `cfg` with K raised, if needed, to the smallest count whose time
/// step satisfies dt * speed * (1/dx + 1/dy) <= cfl_safety.
SolverConfig enforce_cfl(SolverConfig cfg, const SpeedModel& model);

/// Node layout of the solver grid. Slices are stored x-major:
/// index(i, j) = i * ny + j.
struct Grid {
  Box box;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 0.0;
  double dy = 0.0;

  explicit Grid(const SolverConfig& cfg);

  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * ny + j; }
  double x(std::size_t i) const { return box.xmin + dx * static_cast<double>(i); }
  double y(std::size_t j) const { return box.ymin + dy * static_cast<double>(j); }
  Vec2 node(std::size_t i, std::size_t j) const { return {x(i), y(j)}; }
};

using Slice = std::vector<double>;

/// Space-time grid of the cost-to-go. Slice k holds u at backward elapsed
/// time k * dt, i.e. forward time T - k * dt; slice 0 is the terminal data.
class ValueFunction {
 public:
  ValueFunction(SolverConfig cfg, std::vector<double> data);

  const SolverConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  std::size_t num_slices() const { return cfg_.K + 1; }
  std::span<const double> slice(std::size_t k) const;
  double at(std::size_t k, std::size_t i, std::size_t j) const {
    return data_[k * grid_.size() + grid_.index(i, j)];
  }
  std::span<const double> data() const { return data_; }

  /// Slice nearest to forward time t in [0, T].
  std::size_t slice_for_time(double t) const;

 private:
  SolverConfig cfg_;
  Grid grid_;
  std::vector<double> data_;
};

/// u(x, T) = |x - x_end| at every node.
Slice terminal_condition(const SolverConfig& cfg);

/// Extrapolating outflow boundary closure applied after each step:
///   u_0j = min(max(2 u_1j - u_2j, u_2j), u_0j^prev)
/// on all four edges; each corner takes the smaller of its x-edge and
/// y-edge values.
void apply_bcs(std::span<double> u_new, std::span<const double> u_prev, const Grid& grid);

/// One backward time step of the value function.
///
/// Holds the per-node direction tables and velocity hulls (terrain slope is
/// time independent)
/// and, once needed, the factorization of the implicit diffusion system
/// I - (sigma^2 dt / 2) L_h on interior nodes.
class HjbStepper {
 public:
  /// `cfg` must already satisfy the CFL bound (see enforce_cfl).
  HjbStepper(const SolverConfig& cfg, const ElevationField& field, const SpeedModel& model);
  ~HjbStepper();
  HjbStepper(HjbStepper&&) noexcept;
  HjbStepper& operator=(HjbStepper&&) noexcept;

  const Grid& grid() const { return grid_; }
  const SolverConfig& config() const { return cfg_; }

  /// Direction table of node (i, j).
  HamiltonianView node_hamiltonian(std::size_t i, std::size_t j) const;

  /// u^k = u^{k-1} + dt * Hhat on interior nodes, then apply_bcs. Throws
  /// NumericalBlowupError naming the first non-finite node.
  Slice step_explicit(std::span<const double> u_prev) const;

  /// Explicit Hamiltonian, implicit diffusion; boundary values of u_prev
  /// close the interior system. Reduces exactly to step_explicit when
  /// sigma is zero. Throws LinearSolveError if the relative residual
  /// exceeds 1e-10.
  Slice step_semi_implicit(std::span<const double> u_prev) const;

  /// Explicit when sigma == 0, semi-implicit otherwise.
  Slice step(std::span<const double> u_prev) const;

  /// Relative residual of the most recent implicit solve.
  double last_residual() const;

 private:
  class Diffusion;

  Slice explicit_interior(std::span<const double> u_prev) const;
  void check_finite(std::span<const double> u) const;

  SolverConfig cfg_;
  Grid grid_;
  std::size_t n_dirs_;
  std::vector<double> wx_;
  std::vector<double> wy_;
  std::vector<std::uint16_t> hull_;
  std::vector<double> hull_angle_;
  std::vector<std::uint16_t> hull_size_;
  mutable std::unique_ptr<Diffusion> diffusion_;
};

using SliceObserver = std::function<void(std::size_t k, std::span<const double> slice)>;

/// Marches from the terminal data through K steps, handing every slice
/// (k = 0..K) to `observer` without retaining history. Returns the last
/// slice. The config is passed through enforce_cfl first.
Slice march(const SolverConfig& cfg, const ElevationField& field, const SpeedModel& model,
            const SliceObserver& observer = {});

/// Full space-time solve. Throws MemoryBudgetError when
/// (K+1)(N+1)(M+1) exceeds cfg.value_cap.
ValueFunction solve(const SolverConfig& cfg, const ElevationField& field,
                    const SpeedModel& model);

}  // namespace hjbpath
