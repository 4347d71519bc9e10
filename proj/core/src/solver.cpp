#include "hjbpath/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "hjbpath/error.hpp"

namespace hjbpath {

namespace {

constexpr double kResidualTarget = 1e-10;

double kao(double near, double far, double prev) {
  return std::min(std::max(2.0 * near - far, far), prev);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

double SolverConfig::cfl_number(double speed) const {
  return dt() * speed * (1.0 / dx() + 1.0 / dy());
}

void SolverConfig::validate(const SpeedModel& model) const {
  if (!(box.width() > 0.0) || !(box.height() > 0.0) || !std::isfinite(box.diameter()))
    throw ValidationError("solver box must have positive finite extent");
  if (N < 4 || M < 4) throw ValidationError("N and M must be at least 4");
  if (K < 1) throw ValidationError("K must be at least 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("T must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be >= 0");
  if (!(cfl_safety > 0.0 && cfl_safety < 1.0))
    throw ValidationError("cfl_safety must lie in (0, 1)");
  const double tol = 1e-9 * std::max(dx(), dy());
  if (x_end.x - box.xmin < 2.0 * dx() - tol || box.xmax - x_end.x < 2.0 * dx() - tol ||
      x_end.y - box.ymin < 2.0 * dy() - tol || box.ymax - x_end.y < 2.0 * dy() - tol) {
    throw ValidationError("x_end must lie at least two cells inside the solver box");
  }
  model.validate();
  hamiltonian.validate(model);
}

double characteristic_speed(const SolverConfig& cfg, const SpeedModel& model) {
  double speed = model.max_speed();
  if (cfg.hamiltonian.scheme == NumericalScheme::kLaxFriedrichs) {
    speed = std::max({speed, cfg.hamiltonian.lf_alpha[0], cfg.hamiltonian.lf_alpha[1]});
  }
  return speed;
}

SolverConfig enforce_cfl(SolverConfig cfg, const SpeedModel& model) {
  cfg.validate(model);
  const double speed = characteristic_speed(cfg, model);
  if (cfg.cfl_number(speed) <= cfg.cfl_safety) return cfg;
  const double rate = speed * (1.0 / cfg.dx() + 1.0 / cfg.dy());
  cfg.K = static_cast<std::size_t>(std::ceil(cfg.T * rate / cfg.cfl_safety));
  while (cfg.cfl_number(speed) > cfg.cfl_safety) ++cfg.K;
  return cfg;
}

Grid::Grid(const SolverConfig& cfg)
    : box(cfg.box), nx(cfg.N + 1), ny(cfg.M + 1), dx(cfg.dx()), dy(cfg.dy()) {}

// ---------------------------------------------------------------------------
// Value function

ValueFunction::ValueFunction(SolverConfig cfg, std::vector<double> data)
    : cfg_(std::move(cfg)), grid_(cfg_), data_(std::move(data)) {
  if (data_.size() != (cfg_.K + 1) * grid_.size())
    throw ValidationError("value array size does not match the configuration");
}

std::span<const double> ValueFunction::slice(std::size_t k) const {
  if (k > cfg_.K) throw DomainError("slice index out of range");
  return std::span<const double>(data_).subspan(k * grid_.size(), grid_.size());
}

std::size_t ValueFunction::slice_for_time(double t) const {
  const double tol = 1e-9 * cfg_.T;
  if (!(t >= -tol && t <= cfg_.T + tol))
    throw DomainError("time " + std::to_string(t) + " outside [0, T]");
  const double k = std::round((cfg_.T - t) / cfg_.dt());
  return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(cfg_.K)));
}

// ---------------------------------------------------------------------------
// Terminal data and boundary closure

Slice terminal_condition(const SolverConfig& cfg) {
  const Grid grid(cfg);
  Slice u(grid.size());
  for (std::size_t i = 0; i < grid.nx; ++i) {
    for (std::size_t j = 0; j < grid.ny; ++j) {
      u[grid.index(i, j)] = distance(grid.node(i, j), cfg.x_end);
    }
  }
  return u;
}

void apply_bcs(std::span<double> u, std::span<const double> prev, const Grid& g) {
  const std::size_t N = g.nx - 1;
  const std::size_t M = g.ny - 1;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return u[g.index(i, j)]; };
  auto was = [&](std::size_t i, std::size_t j) { return prev[g.index(i, j)]; };

  for (std::size_t j = 1; j < M; ++j) {
    at(0, j) = kao(at(1, j), at(2, j), was(0, j));
    at(N, j) = kao(at(N - 1, j), at(N - 2, j), was(N, j));
  }
  for (std::size_t i = 1; i < N; ++i) {
    at(i, 0) = kao(at(i, 1), at(i, 2), was(i, 0));
    at(i, M) = kao(at(i, M - 1), at(i, M - 2), was(i, M));
  }
  at(0, 0) = std::min(kao(at(1, 0), at(2, 0), was(0, 0)), kao(at(0, 1), at(0, 2), was(0, 0)));
  at(N, 0) = std::min(kao(at(N - 1, 0), at(N - 2, 0), was(N, 0)),
                      kao(at(N, 1), at(N, 2), was(N, 0)));
  at(0, M) = std::min(kao(at(1, M), at(2, M), was(0, M)),
                      kao(at(0, M - 1), at(0, M - 2), was(0, M)));
  at(N, M) = std::min(kao(at(N - 1, M), at(N - 2, M), was(N, M)),
                      kao(at(N, M - 1), at(N, M - 2), was(N, M)));
}

// ---------------------------------------------------------------------------
// Implicit diffusion on interior nodes

class HjbStepper::Diffusion {
 public:
  explicit Diffusion(const SolverConfig& cfg, const Grid& g)
      : grid_(g),
        ni_(g.nx - 2),
        nj_(g.ny - 2),
        c_(cfg.sigma * cfg.sigma * cfg.dt() / 2.0),
        cx_(c_ / (g.dx * g.dx)),
        cy_(c_ / (g.dy * g.dy)) {
    const auto n = static_cast<Eigen::Index>(ni_ * nj_);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * 5);
    for (std::size_t a = 0; a < ni_; ++a) {
      for (std::size_t b = 0; b < nj_; ++b) {
        const auto row = unknown(a, b);
        trips.emplace_back(row, row, 1.0 + 2.0 * cx_ + 2.0 * cy_);
        if (a > 0) trips.emplace_back(row, unknown(a - 1, b), -cx_);
        if (a + 1 < ni_) trips.emplace_back(row, unknown(a + 1, b), -cx_);
        if (b > 0) trips.emplace_back(row, unknown(a, b - 1), -cy_);
        if (b + 1 < nj_) trips.emplace_back(row, unknown(a, b + 1), -cy_);
      }
    }
    matrix_.resize(n, n);
    matrix_.setFromTriplets(trips.begin(), trips.end());
    solver_.compute(matrix_);
    if (solver_.info() != Eigen::Success)
      throw LinearSolveError("factorization of the diffusion system failed");
  }

  // `u` holds the explicit update on interior nodes and u_prev on the
  // boundary; on return the interior holds the implicit solution.
  void solve(std::span<double> u) {
    const auto n = static_cast<Eigen::Index>(ni_ * nj_);
    Eigen::VectorXd rhs(n);
    for (std::size_t a = 0; a < ni_; ++a) {
      for (std::size_t b = 0; b < nj_; ++b) {
        const std::size_t i = a + 1;
        const std::size_t j = b + 1;
        double r = u[grid_.index(i, j)];
        if (a == 0) r += cx_ * u[grid_.index(0, j)];
        if (a + 1 == ni_) r += cx_ * u[grid_.index(grid_.nx - 1, j)];
        if (b == 0) r += cy_ * u[grid_.index(i, 0)];
        if (b + 1 == nj_) r += cy_ * u[grid_.index(i, grid_.ny - 1)];
        rhs[unknown(a, b)] = r;
      }
    }
    Eigen::VectorXd x = solver_.solve(rhs);
    const double scale = std::max(rhs.norm(), 1e-300);
    residual_ = (matrix_ * x - rhs).norm() / scale;
    if (residual_ > kResidualTarget) {
      // one step of iterative refinement
      x += solver_.solve(rhs - matrix_ * x);
      residual_ = (matrix_ * x - rhs).norm() / scale;
    }
    if (!(residual_ <= kResidualTarget)) {
      throw LinearSolveError("implicit diffusion solve did not converge: relative residual " +
                             std::to_string(residual_));
    }
    for (std::size_t a = 0; a < ni_; ++a) {
      for (std::size_t b = 0; b < nj_; ++b) {
        u[grid_.index(a + 1, b + 1)] = x[unknown(a, b)];
      }
    }
  }

  double residual() const { return residual_; }

 private:
  Eigen::Index unknown(std::size_t a, std::size_t b) const {
    return static_cast<Eigen::Index>(a * nj_ + b);
  }

  Grid grid_;
  std::size_t ni_;
  std::size_t nj_;
  double c_;
  double cx_;
  double cy_;
  Eigen::SparseMatrix<double> matrix_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  double residual_ = 0.0;
};

// ---------------------------------------------------------------------------
// Stepper

HjbStepper::HjbStepper(const SolverConfig& cfg, const ElevationField& field,
                       const SpeedModel& model)
    : cfg_(cfg), grid_(cfg), n_dirs_(cfg.hamiltonian.n_directions) {
  cfg_.validate(model);
  const double speed = characteristic_speed(cfg_, model);
  if (cfg_.cfl_number(speed) > cfg_.cfl_safety * (1.0 + 1e-12)) {
    throw ValidationError("time step violates the CFL bound (CFL number " +
                          std::to_string(cfg_.cfl_number(speed)) + ")");
  }
  const DirectionSet dirs(n_dirs_);
  const std::size_t total = grid_.size() * n_dirs_;
  wx_.resize(total);
  wy_.resize(total);
  hull_.resize(total);
  hull_angle_.resize(total);
  hull_size_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.nx; ++i) {
    for (std::size_t j = 0; j < grid_.ny; ++j) {
      const std::size_t node = grid_.index(i, j);
      const std::size_t off = node * n_dirs_;
      const auto wx = std::span<double>(wx_).subspan(off, n_dirs_);
      const auto wy = std::span<double>(wy_).subspan(off, n_dirs_);
      fill_direction_weights(model, field.gradient_at(grid_.node(i, j)), dirs, wx, wy);
      hull_size_[node] = static_cast<std::uint16_t>(
          build_velocity_hull(wx, wy, std::span<std::uint16_t>(hull_).subspan(off, n_dirs_),
                              std::span<double>(hull_angle_).subspan(off, n_dirs_)));
    }
  }
}

HjbStepper::~HjbStepper() = default;
HjbStepper::HjbStepper(HjbStepper&&) noexcept = default;
HjbStepper& HjbStepper::operator=(HjbStepper&&) noexcept = default;

HamiltonianView HjbStepper::node_hamiltonian(std::size_t i, std::size_t j) const {
  const std::size_t node = grid_.index(i, j);
  const std::size_t off = node * n_dirs_;
  const std::size_t h = hull_size_[node];
  return {std::span<const double>(wx_).subspan(off, n_dirs_),
          std::span<const double>(wy_).subspan(off, n_dirs_),
          std::span<const std::uint16_t>(hull_).subspan(off, h),
          std::span<const double>(hull_angle_).subspan(off, h)};
}

Slice HjbStepper::explicit_interior(std::span<const double> u_prev) const {
  if (u_prev.size() != grid_.size()) throw ValidationError("slice size does not match grid");
  Slice u(u_prev.begin(), u_prev.end());
  const double dt = cfg_.dt();
  const double inv_dx = 1.0 / grid_.dx;
  const double inv_dy = 1.0 / grid_.dy;
  const auto nx = static_cast<long long>(grid_.nx);
  const std::size_t ny = grid_.ny;

#pragma omp parallel for schedule(static)
  for (long long ii = 1; ii < nx - 1; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      const double c = u_prev[i * ny + j];
      OneSidedDiffs d;
      d.ux_minus = (c - u_prev[(i - 1) * ny + j]) * inv_dx;
      d.ux_plus = (u_prev[(i + 1) * ny + j] - c) * inv_dx;
      d.uy_minus = (c - u_prev[i * ny + j - 1]) * inv_dy;
      d.uy_plus = (u_prev[i * ny + j + 1] - c) * inv_dy;
      u[i * ny + j] = c + dt * numerical_hamiltonian(node_hamiltonian(i, j), d, cfg_.hamiltonian);
    }
  }
  return u;
}

void HjbStepper::check_finite(std::span<const double> u) const {
  for (std::size_t i = 0; i < grid_.nx; ++i) {
    for (std::size_t j = 0; j < grid_.ny; ++j) {
      if (!std::isfinite(u[grid_.index(i, j)])) {
        throw NumericalBlowupError("non-finite value at node (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ")");
      }
    }
  }
}

Slice HjbStepper::step_explicit(std::span<const double> u_prev) const {
  Slice u = explicit_interior(u_prev);
  apply_bcs(u, u_prev, grid_);
  check_finite(u);
  return u;
}

Slice HjbStepper::step_semi_implicit(std::span<const double> u_prev) const {
  Slice u = explicit_interior(u_prev);
  if (!diffusion_) diffusion_ = std::make_unique<Diffusion>(cfg_, grid_);
  diffusion_->solve(u);
  apply_bcs(u, u_prev, grid_);
  check_finite(u);
  return u;
}

Slice HjbStepper::step(std::span<const double> u_prev) const {
  return cfg_.sigma == 0.0 ? step_explicit(u_prev) : step_semi_implicit(u_prev);
}

double HjbStepper::last_residual() const { return diffusion_ ? diffusion_->residual() : 0.0; }

// ---------------------------------------------------------------------------
// Marching

namespace {

void check_slice_invariants(const SolverConfig& cfg, std::span<const double> u0, double u0_max,
                            std::span<const double> u, std::size_t k) {
  const double tol = 1e-6 * cfg.box.diameter();
  const bool pointwise = cfg.sigma == 0.0 &&
                         cfg.hamiltonian.scheme == NumericalScheme::kGodunov &&
                         cfg.hamiltonian.orientation == Orientation::kBackwardTime;
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (u[n] < -tol) {
      throw InvariantError("negative value " + std::to_string(u[n]) + " at step " +
                           std::to_string(k));
    }
    const double bound = pointwise ? u0[n] : u0_max;
    if (u[n] > bound + tol) {
      throw InvariantError("value " + std::to_string(u[n]) + " exceeds backward bound " +
                           std::to_string(bound) + " at step " + std::to_string(k));
    }
  }
}

}  // namespace

Slice march(const SolverConfig& config, const ElevationField& field, const SpeedModel& model,
            const SliceObserver& observer) {
  const SolverConfig cfg = enforce_cfl(config, model);
  const HjbStepper stepper(cfg, field, model);
  Slice prev = terminal_condition(cfg);
  const Slice u0 = cfg.check_invariants ? prev : Slice{};
  const double u0_max = prev.empty() ? 0.0 : *std::max_element(prev.begin(), prev.end());
  if (observer) observer(0, prev);
  for (std::size_t k = 1; k <= cfg.K; ++k) {
    Slice next;
    try {
      next = stepper.step(prev);
    } catch (const NumericalBlowupError& e) {
      throw NumericalBlowupError(std::string(e.what()) + " at step " + std::to_string(k));
    }
    if (cfg.check_invariants) check_slice_invariants(cfg, u0, u0_max, next, k);
    if (observer) observer(k, next);
    prev = std::move(next);
  }
  return prev;
}

ValueFunction solve(const SolverConfig& config, const ElevationField& field,
                    const SpeedModel& model) {
  const SolverConfig cfg = enforce_cfl(config, model);
  const Grid grid(cfg);
  const double total = static_cast<double>(cfg.K + 1) * static_cast<double>(grid.size());
  if (total > static_cast<double>(cfg.value_cap)) {
    throw MemoryBudgetError("value function needs " + std::to_string(total) +
                            " values, above the cap of " + std::to_string(cfg.value_cap));
  }
  std::vector<double> data;
  data.reserve((cfg.K + 1) * grid.size());
  march(cfg, field, model, [&](std::size_t, std::span<const double> s) {
    data.insert(data.end(), s.begin(), s.end());
  });
  return ValueFunction(cfg, std::move(data));
}

}  // namespace hjbpath
