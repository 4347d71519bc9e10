#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hjbpath/geometry.hpp"
#include "hjbpath/kinematics.hpp"
#include "hjbpath/terrain.hpp"

namespace hjbpath {

enum class NumericalScheme { kGodunov, kLaxFriedrichs };

/// Sign and interval conventions of the numerical Hamiltonians.
///
/// The value function is marched in backward time tau = T - t, where it obeys
/// u_tau = H(grad u). kBackwardTime orients the Godunov intervals as
/// I(u+, u-) on both axes and adds Lax-Friedrichs dissipation with a positive
/// sign, which makes both schemes monotone for this march. kAsPublished keeps
/// the literal forward-time formulas (x interval I(u-, u+), y interval
/// I(u+, u-), dissipation subtracted); it is kept for comparison only and is
/// not monotone for the backward march.
enum class Orientation { kBackwardTime, kAsPublished };

struct HamiltonianConfig {
  std::size_t n_directions = 64;
  /// Samples per ext interval, endpoints included.
  std::size_t n_ext_samples = 16;
  NumericalScheme scheme = NumericalScheme::kGodunov;
  std::array<double, 2> lf_alpha{1.11, 1.11};
  Orientation orientation = Orientation::kBackwardTime;

  /// Throws ValidationError unless 8 <= n_directions <= kMaxDirections,
  /// 3 <= n_ext_samples <= kMaxExtSamples and both alphas bound the
  /// model's maximum speed.
  void validate(const SpeedModel& model) const;

  static constexpr std::size_t kMaxExtSamples = 1024;
  static constexpr std::size_t kMaxDirections = 65535;
};

/// First-order one-sided differences at a node.
struct OneSidedDiffs {
  double ux_minus = 0.0;
  double ux_plus = 0.0;
  double uy_minus = 0.0;
  double uy_plus = 0.0;
};

/// Non-owning view of a direction table at one point: for each sampled
/// direction s_k, the velocity w_k = f(x, s_k) s_k. Then
/// H(x, p) = min_k p . w_k.
///
/// The optional hull lists, counter-clockwise, the indices of the vertices of
/// the convex hull of {w_k}, and normal_angle[i] the (unwrapped, increasing)
/// angle of the outward normal of hull edge i -> i+1. When present, the
/// Godunov resolution restricts each minimization to the hull vertices that
/// can be extreme for the gradients in question, which leaves the minimum
/// unchanged.
struct HamiltonianView {
  std::span<const double> wx;
  std::span<const double> wy;
  std::span<const std::uint16_t> hull = {};
  std::span<const double> normal_angle = {};

  std::size_t size() const { return wx.size(); }
};

/// Writes w_k = f(x, s_k) s_k for terrain slope `grad` into wx, wy.
void fill_direction_weights(const SpeedModel& model, SlopeVector grad,
                            const DirectionSet& dirs, std::span<double> wx,
                            std::span<double> wy);

/// Convex hull of the points (wx[k], wy[k]) for the view above. Writes at
/// most wx.size() entries into each output and returns the vertex count.
std::size_t build_velocity_hull(std::span<const double> wx, std::span<const double> wy,
                                std::span<std::uint16_t> hull, std::span<double> normal_angle);

/// Owning direction table for a single point.
class LocalHamiltonian {
 public:
  LocalHamiltonian(const SpeedModel& model, SlopeVector grad, const DirectionSet& dirs);

  HamiltonianView view() const {
    return {wx_, wy_, std::span<const std::uint16_t>(hull_).first(hull_size_),
            std::span<const double>(angle_).first(hull_size_)};
  }

 private:
  std::vector<double> wx_;
  std::vector<double> wy_;
  std::vector<std::uint16_t> hull_;
  std::vector<double> angle_;
  std::size_t hull_size_ = 0;
};

struct DirectionalMin {
  double value = 0.0;
  /// Index of the minimizing direction; ties go to the smallest angle.
  std::size_t index = 0;
};

/// min_k p . w_k with its argmin.
DirectionalMin minimize_over_directions(HamiltonianView h, Vec2 p);

/// min_k p . w_k.
double hamiltonian_value(HamiltonianView h, Vec2 p);

/// Godunov numerical Hamiltonian: nested ext over the one-sided difference
/// intervals, each ext resolved over `n_ext_samples` equally spaced samples
/// (endpoints included, plus the zero crossing when the interval straddles
/// zero).
double godunov(HamiltonianView h, const OneSidedDiffs& d, const HamiltonianConfig& cfg);

/// Lax-Friedrichs numerical Hamiltonian with dissipation lf_alpha.
double lax_friedrichs(HamiltonianView h, const OneSidedDiffs& d, const HamiltonianConfig& cfg);

/// Dispatches on cfg.scheme.
double numerical_hamiltonian(HamiltonianView h, const OneSidedDiffs& d,
                             const HamiltonianConfig& cfg);

struct HamiltonianSample {
  double value = 0.0;
  DirectionSample s_star;
};

/// H(x, p) = min over sampled directions s of f(x, s) (p . s), with the
/// minimizing direction.
HamiltonianSample continuous_h(Vec2 x, Vec2 p, const ElevationField& field,
                               const SpeedModel& model, const HamiltonianConfig& cfg);

double godunov(Vec2 x, const OneSidedDiffs& d, const ElevationField& field,
               const SpeedModel& model, const HamiltonianConfig& cfg);

double lax_friedrichs(Vec2 x, const OneSidedDiffs& d, const ElevationField& field,
                      const SpeedModel& model, const HamiltonianConfig& cfg);

}  // namespace hjbpath
