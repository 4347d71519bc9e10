#include "hjbpath/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "hjbpath/error.hpp"

namespace hjbpath {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sample points of one ext interval. Endpoints are exact; the zero crossing
// is appended when the interval straddles zero so that the maximum of the
// (non-positive, positively homogeneous) Hamiltonian is found exactly when
// the box contains the origin.
struct ExtInterval {
  double lo;
  double hi;
  bool take_min;  // ext is a min when the first argument <= the second
  std::array<double, HamiltonianConfig::kMaxExtSamples + 1> pts;
  std::size_t count = 0;

  ExtInterval(double first, double second, std::size_t n)
      : lo(std::min(first, second)), hi(std::max(first, second)), take_min(first <= second) {
    if (lo == hi) {
      pts[0] = lo;
      count = 1;
      return;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) pts[k] = lo + step * static_cast<double>(k);
    pts[n - 1] = hi;
    count = n;
    if (lo < 0.0 && hi > 0.0 &&
        std::find(pts.begin(), pts.begin() + count, 0.0) == pts.begin() + count) {
      pts[count++] = 0.0;
    }
  }

  bool degenerate() const { return count == 1; }
};

// ext over the v samples of H(u, v), for a fixed u.
double inner_ext(HamiltonianView h, double u, const ExtInterval& v) {
  if (v.degenerate()) return hamiltonian_value(h, {u, v.lo});
  if (v.take_min) {
    // H(u, .) is concave, so its sampled minimum sits at an endpoint.
    return std::min(hamiltonian_value(h, {u, v.lo}), hamiltonian_value(h, {u, v.hi}));
  }
  double best = -kInf;
  for (std::size_t m = 0; m < v.count; ++m) {
    best = std::max(best, hamiltonian_value(h, {u, v.pts[m]}));
  }
  return best;
}

double flush_subnormal(double w) {
  return std::abs(w) < std::numeric_limits<double>::min() ? 0.0 : w;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Directions kept after restricting a view to a box of gradients.
constexpr std::size_t kMaxChain = 64;

struct ReducedView {
  std::array<double, kMaxChain> wx;
  std::array<double, kMaxChain> wy;
  std::size_t count = 0;

  HamiltonianView view() const {
    return {std::span<const double>(wx.data(), count), std::span<const double>(wy.data(), count)};
  }
};

// Position in the hull ring of the vertex extreme in direction angle phi.
std::size_t extreme_vertex(HamiltonianView h, double phi) {
  const double base = h.normal_angle.front();
  phi -= kTwoPi * std::floor((phi - base) / kTwoPi);
  const auto it = std::upper_bound(h.normal_angle.begin(), h.normal_angle.end(), phi);
  const auto i = static_cast<std::size_t>(it - h.normal_angle.begin());  // >= 1
  return i % h.hull.size();
}

// For every p in [ulo, uhi] x [vlo, vhi], min_k p . w_k is attained at the
// hull vertex extreme in direction -p. When the box does not surround the
// origin, those vertices form a short chain. Returns false when no useful
// reduction exists.
bool restrict_to_box(HamiltonianView h, double ulo, double uhi, double vlo, double vhi,
                     ReducedView& out) {
  if (h.hull.empty()) return false;
  if (ulo <= 0.0 && uhi >= 0.0 && vlo <= 0.0 && vhi >= 0.0) return false;
  const Vec2 qc{-(ulo + uhi) / 2.0, -(vlo + vhi) / 2.0};
  const Vec2 corners[4] = {{-ulo, -vlo}, {-uhi, -vlo}, {-ulo, -vhi}, {-uhi, -vhi}};
  double lo = kInf;
  double hi = -kInf;
  for (const Vec2 q : corners) {
    const double d = std::atan2(qc.x * q.y - qc.y * q.x, dot(qc, q));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (hi - lo >= std::numbers::pi - 1e-6) return false;
  const double center = std::atan2(qc.y, qc.x);
  const std::size_t a = extreme_vertex(h, center + lo - 1e-9);
  const std::size_t b = extreme_vertex(h, center + hi + 1e-9);
  const std::size_t ring = h.hull.size();
  const std::size_t count = (b + ring - a) % ring + 1;
  if (count > kMaxChain || count >= h.size()) return false;
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t k = h.hull[(a + n) % ring];
    out.wx[n] = h.wx[k];
    out.wy[n] = h.wy[k];
  }
  out.count = count;
  return true;
}

// Nested ext of a linear function: each sampled ext sits at an endpoint.
double linear_ext(double wx, double wy, const ExtInterval& u, const ExtInterval& v) {
  auto inner = [&](double uu) {
    const double a = uu * wx + v.lo * wy;
    const double b = uu * wx + v.hi * wy;
    return v.take_min ? std::min(a, b) : std::max(a, b);
  };
  const double a = inner(u.lo);
  const double b = inner(u.hi);
  return u.take_min ? std::min(a, b) : std::max(a, b);
}

}  // namespace

std::size_t build_velocity_hull(std::span<const double> wx, std::span<const double> wy,
                                std::span<std::uint16_t> hull, std::span<double> normal_angle) {
  const std::size_t n = wx.size();
  std::vector<std::uint16_t> idx(n);
  for (std::size_t k = 0; k < n; ++k) idx[k] = static_cast<std::uint16_t>(k);
  std::sort(idx.begin(), idx.end(), [&](std::uint16_t a, std::uint16_t b) {
    return wx[a] < wx[b] || (wx[a] == wx[b] && wy[a] < wy[b]);
  });
  auto cross = [&](std::uint16_t o, std::uint16_t a, std::uint16_t b) {
    return (wx[a] - wx[o]) * (wy[b] - wy[o]) - (wy[a] - wy[o]) * (wx[b] - wx[o]);
  };
  // Andrew's monotone chain, counter-clockwise, collinear points dropped.
  std::vector<std::uint16_t> chain(2 * n);
  std::size_t h = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (h >= 2 && cross(chain[h - 2], chain[h - 1], idx[k]) <= 0.0) --h;
    chain[h++] = idx[k];
  }
  for (std::size_t k = n - 1, lower = h + 1; k-- > 0;) {
    while (h >= lower && cross(chain[h - 2], chain[h - 1], idx[k]) <= 0.0) --h;
    chain[h++] = idx[k];
  }
  --h;  // the first point was repeated
  if (h < 3) return 0;
  for (std::size_t i = 0; i < h; ++i) {
    const std::uint16_t a = chain[i];
    const std::uint16_t b = chain[(i + 1) % h];
    hull[i] = a;
    normal_angle[i] = std::atan2(-(wx[b] - wx[a]), wy[b] - wy[a]);
    if (i > 0) {
      while (normal_angle[i] < normal_angle[i - 1]) normal_angle[i] += kTwoPi;
    }
  }
  return h;
}

void HamiltonianConfig::validate(const SpeedModel& model) const {
  if (n_directions < 8 || n_directions > kMaxDirections)
    throw ValidationError("n_directions must lie in [8, " + std::to_string(kMaxDirections) + "]");
  if (n_ext_samples < 3) throw ValidationError("n_ext_samples must be at least 3");
  if (n_ext_samples > kMaxExtSamples)
    throw ValidationError("n_ext_samples must not exceed " + std::to_string(kMaxExtSamples));
  if (!(lf_alpha[0] >= model.max_speed()) || !(lf_alpha[1] >= model.max_speed()) ||
      !std::isfinite(lf_alpha[0]) || !std::isfinite(lf_alpha[1])) {
    throw ValidationError("lf_alpha must bound the maximum walking speed");
  }
}

void fill_direction_weights(const SpeedModel& model, SlopeVector grad, const DirectionSet& dirs,
                            std::span<double> wx, std::span<double> wy) {
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const Vec2 s = dirs[k].dir;
    const double f = effective_speed(model, grad, s);
    // Subnormal weights (near-vertical walls) change H by less than
    // DBL_MIN but make every product through them very slow.
    wx[k] = flush_subnormal(f * s.x);
    wy[k] = flush_subnormal(f * s.y);
  }
}

LocalHamiltonian::LocalHamiltonian(const SpeedModel& model, SlopeVector grad,
                                   const DirectionSet& dirs)
    : wx_(dirs.size()), wy_(dirs.size()), hull_(dirs.size()), angle_(dirs.size()) {
  fill_direction_weights(model, grad, dirs, wx_, wy_);
  hull_size_ = build_velocity_hull(wx_, wy_, hull_, angle_);
}

DirectionalMin minimize_over_directions(HamiltonianView h, Vec2 p) {
  DirectionalMin best{kInf, 0};
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double v = p.x * h.wx[k] + p.y * h.wy[k];
    if (v < best.value) best = {v, k};
  }
  return best;
}

double hamiltonian_value(HamiltonianView h, Vec2 p) {
  // Independent partial minima keep the loop throughput bound.
  constexpr std::size_t kLanes = 8;
  const std::size_t n = h.size();
  const double* wx = h.wx.data();
  const double* wy = h.wy.data();
  double acc[kLanes];
  std::fill_n(acc, kLanes, kInf);
  std::size_t k = 0;
  for (; k + kLanes <= n; k += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double v = p.x * wx[k + l] + p.y * wy[k + l];
      acc[l] = v < acc[l] ? v : acc[l];
    }
  }
  for (; k < n; ++k) {
    const double v = p.x * wx[k] + p.y * wy[k];
    acc[0] = v < acc[0] ? v : acc[0];
  }
  double best = acc[0];
  for (std::size_t l = 1; l < kLanes; ++l) best = acc[l] < best ? acc[l] : best;
  return best;
}

double godunov(HamiltonianView h, const OneSidedDiffs& d, const HamiltonianConfig& cfg) {
  const bool published = cfg.orientation == Orientation::kAsPublished;
  const ExtInterval u = published ? ExtInterval(d.ux_minus, d.ux_plus, cfg.n_ext_samples)
                                  : ExtInterval(d.ux_plus, d.ux_minus, cfg.n_ext_samples);
  const ExtInterval v(d.uy_plus, d.uy_minus, cfg.n_ext_samples);

  if (u.degenerate() && v.degenerate()) return hamiltonian_value(h, {u.lo, v.lo});
  ReducedView reduced;
  if (restrict_to_box(h, u.lo, u.hi, v.lo, v.hi, reduced)) {
    if (reduced.count == 1) return linear_ext(reduced.wx[0], reduced.wy[0], u, v);
    h = reduced.view();
  }
  if (u.degenerate()) return inner_ext(h, u.lo, v);
  if (u.take_min && (v.take_min || v.degenerate())) {
    // The inner ext is a minimum of concave functions, hence concave in u.
    return std::min(inner_ext(h, u.lo, v), inner_ext(h, u.hi, v));
  }
  double acc = inner_ext(h, u.pts[0], v);
  for (std::size_t l = 1; l < u.count; ++l) {
    const double g = inner_ext(h, u.pts[l], v);
    acc = u.take_min ? std::min(acc, g) : std::max(acc, g);
  }
  return acc;
}

double lax_friedrichs(HamiltonianView h, const OneSidedDiffs& d, const HamiltonianConfig& cfg) {
  const Vec2 mid{(d.ux_plus + d.ux_minus) / 2.0, (d.uy_plus + d.uy_minus) / 2.0};
  const double dissipation = cfg.lf_alpha[0] / 2.0 * (d.ux_plus - d.ux_minus) +
                             cfg.lf_alpha[1] / 2.0 * (d.uy_plus - d.uy_minus);
  const double hm = hamiltonian_value(h, mid);
  return cfg.orientation == Orientation::kAsPublished ? hm - dissipation : hm + dissipation;
}

double numerical_hamiltonian(HamiltonianView h, const OneSidedDiffs& d,
                             const HamiltonianConfig& cfg) {
  return cfg.scheme == NumericalScheme::kGodunov ? godunov(h, d, cfg)
                                                 : lax_friedrichs(h, d, cfg);
}

HamiltonianSample continuous_h(Vec2 x, Vec2 p, const ElevationField& field,
                               const SpeedModel& model, const HamiltonianConfig& cfg) {
  const DirectionSet dirs(cfg.n_directions);
  const LocalHamiltonian local(model, field.gradient_at(x), dirs);
  const auto best = minimize_over_directions(local.view(), p);
  return {best.value, dirs[best.index]};
}

double godunov(Vec2 x, const OneSidedDiffs& d, const ElevationField& field,
               const SpeedModel& model, const HamiltonianConfig& cfg) {
  const LocalHamiltonian local(model, field.gradient_at(x), DirectionSet(cfg.n_directions));
  return godunov(local.view(), d, cfg);
}

double lax_friedrichs(Vec2 x, const OneSidedDiffs& d, const ElevationField& field,
                      const SpeedModel& model, const HamiltonianConfig& cfg) {
  const LocalHamiltonian local(model, field.gradient_at(x), DirectionSet(cfg.n_directions));
  return lax_friedrichs(local.view(), d, cfg);
}

}  // namespace hjbpath
