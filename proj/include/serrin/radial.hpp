#pragma once

// Closed-form radial solutions of -Δu = f(u) in R^n whose gradient has
// constant length on a piece of a sphere, and the checks that certify them.
//
// Everything is templated on the scalar type. The verification drivers use
// long double: near r = 1e-3 the exterior residual subtracts terms of size
// (n-1)/(2r) ~ 1e3, which leaves about 1e-12 relative slack in double.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "serrin/error.hpp"

namespace serrin::radial {

template <class T>
struct Jet {
  T u{}, du{}, d2u{};
};

enum class ProfileKind { Interior, Exterior, Ball };

inline const char* to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::Interior: return "interior";
    case ProfileKind::Exterior: return "exterior";
    case ProfileKind::Ball: return "ball";
  }
  return "?";
}

/// u(r) given piecewise between increasing breakpoints, with u' and u''.
template <class T>
struct PiecewiseRadialProfile {
  ProfileKind kind = ProfileKind::Interior;
  int n = 2;
  std::vector<T> breakpoints;
  std::vector<std::function<Jet<T>(T)>> pieces;  // pieces.size() == breakpoints.size() + 1
  T domain_lo = 0;
  bool lo_open = false;
  T domain_hi = std::numeric_limits<T>::infinity();
  // Dirichlet value and gradient length on the unit sphere.
  T sphere_value = 0;
  T sphere_gradient = 0;

  bool contains(T r) const {
    const bool above_lo = lo_open ? r > domain_lo : r >= domain_lo;
    return above_lo && r <= domain_hi;
  }

  std::size_t piece_of(T r) const {
    return static_cast<std::size_t>(std::upper_bound(breakpoints.begin(), breakpoints.end(), r) -
                                    breakpoints.begin());
  }

  /// Value and derivatives at r; a breakpoint itself belongs to the right piece.
  Jet<T> operator()(T r) const {
    if (!contains(r)) throw DomainError("radius " + std::to_string(static_cast<double>(r)) + " outside the profile");
    return pieces[piece_of(r)](r);
  }

  /// Radial Laplacian u'' + (n-1) u'/r, using n u''(0) at the origin.
  T laplacian(T r) const {
    const Jet<T> j = (*this)(r);
    if (r == T(0)) return T(n) * j.d2u;
    return j.d2u + T(n - 1) * j.du / r;
  }
};

/// f(s) made of two closed-form branches meeting at split.
template <class T>
struct SourceFunction {
  int n = 2;
  T split = 0;
  std::function<T(T)> below;  // s < split
  std::function<T(T)> above;  // s >= split
  T lo = -std::numeric_limits<T>::infinity();
  T hi = std::numeric_limits<T>::infinity();
  bool lo_open = false;
  bool hi_open = false;

  bool contains(T s) const {
    const bool a = lo_open ? s > lo : s >= lo;
    const bool b = hi_open ? s < hi : s <= hi;
    return a && b;
  }

  T operator()(T s) const {
    if (!contains(s)) throw DomainError("f is not defined at s = " + std::to_string(static_cast<double>(s)));
    return s < split ? below(s) : above(s);
  }

  T branch_gap() const { return std::abs(below(split) - above(split)); }
};

namespace detail {

inline void check_dimension(int n) {
  if (n < 2) throw InvalidArgument("dimension n must be at least 2, got " + std::to_string(n));
}

}  // namespace detail

/// u = (3 - r^2)^2 - 4 in the unit ball and 8(1 - r) outside.
template <class T = double>
PiecewiseRadialProfile<T> interior_profile(int n) {
  detail::check_dimension(n);
  PiecewiseRadialProfile<T> p;
  p.kind = ProfileKind::Interior;
  p.n = n;
  p.breakpoints = {T(1)};
  p.pieces = {
      [](T r) {
        const T q = T(3) - r * r;
        return Jet<T>{q * q - T(4), T(-4) * r * q, T(-12) + T(12) * r * r};
      },
      [](T r) { return Jet<T>{T(8) * (T(1) - r), T(-8), T(0)}; },
  };
  p.sphere_value = 0;
  p.sphere_gradient = 8;
  return p;
}

template <class T = double>
SourceFunction<T> interior_source(int n) {
  detail::check_dimension(n);
  SourceFunction<T> f;
  f.n = n;
  f.split = 0;
  f.below = [n](T s) { return T(64) * T(n - 1) / (T(8) - s); };
  f.above = [n](T s) { return T(4) * (T(n + 2) * std::sqrt(s + T(4)) - T(6)); };
  return f;
}

/// u = (3 - r)/2 in the punctured unit ball and 3/(2r) - 1/(2r^2) outside.
template <class T = double>
PiecewiseRadialProfile<T> exterior_profile(int n) {
  detail::check_dimension(n);
  PiecewiseRadialProfile<T> p;
  p.kind = ProfileKind::Exterior;
  p.n = n;
  p.breakpoints = {T(1)};
  p.pieces = {
      [](T r) { return Jet<T>{(T(3) - r) / T(2), T(-0.5), T(0)}; },
      [](T r) {
        const T r2 = r * r;
        const T r3 = r2 * r;
        return Jet<T>{T(3) / (T(2) * r) - T(1) / (T(2) * r2), T(-3) / (T(2) * r2) + T(1) / r3,
                      T(3) / r3 - T(3) / (r3 * r)};
      },
  };
  p.domain_lo = 0;
  p.lo_open = true;
  p.sphere_value = 1;
  p.sphere_gradient = T(0.5);
  return p;
}

/// f on (0, 3/2): (n-1)/(2(3-2s)) on [1, 3/2), and with w = 3 - sqrt(9-8s),
/// 3(n-3)/16 w^3 - (n-4)/16 w^4 on (0, 1].
template <class T = double>
SourceFunction<T> exterior_source(int n) {
  detail::check_dimension(n);
  SourceFunction<T> f;
  f.n = n;
  f.split = 1;
  f.below = [n](T s) {
    const T w = T(3) - std::sqrt(T(9) - T(8) * s);
    const T w3 = w * w * w;
    return T(3 * (n - 3)) / T(16) * w3 - T(n - 4) / T(16) * w3 * w;
  };
  f.above = [n](T s) { return T(n - 1) / (T(2) * (T(3) - T(2) * s)); };
  f.lo = 0;
  f.lo_open = true;
  f.hi = T(1.5);
  f.hi_open = true;
  return f;
}

template <class T>
struct BallBaseline {
  PiecewiseRadialProfile<T> profile;
  T normal_derivative{};  // |du/dnu| on r = R
};

/// Torsion function of the ball of radius R: u = (R^2 - r^2)/(2n), -Δu = 1.
template <class T = double>
BallBaseline<T> ball_baseline(int n, T radius) {
  detail::check_dimension(n);
  if (!(radius > T(0)) || !std::isfinite(static_cast<double>(radius))) {
    throw InvalidArgument("ball radius must be positive");
  }
  BallBaseline<T> b;
  b.profile.kind = ProfileKind::Ball;
  b.profile.n = n;
  b.profile.pieces = {[n, radius](T r) {
    return Jet<T>{(radius * radius - r * r) / T(2 * n), -r / T(n), T(-1) / T(n)};
  }};
  b.profile.domain_hi = radius;
  b.profile.sphere_value = 0;
  b.profile.sphere_gradient = radius / T(n);
  b.normal_derivative = radius / T(n);
  return b;
}

/// f = 1, the source of the ball baseline.
template <class T = double>
SourceFunction<T> unit_source(int n = 2) {
  SourceFunction<T> f;
  f.n = n;
  f.below = f.above = [](T) { return T(1); };
  return f;
}

/// Radii spread over [lo, hi] (uniformly, or geometrically when log_spaced)
/// with points closer than 1e-9 to a breakpoint dropped.
template <class T>
std::vector<T> residual_grid(const PiecewiseRadialProfile<T>& prof, T lo, T hi, int count, bool log_spaced = false) {
  if (count < 2 || !(hi > lo)) throw InvalidArgument("residual grid needs count >= 2 and hi > lo");
  if (log_spaced && !(lo > T(0))) throw InvalidArgument("log-spaced grid needs lo > 0");
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const T t = T(k) / T(count - 1);
    T r = log_spaced ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    if (k == count - 1) r = hi;
    const bool near_break = std::any_of(prof.breakpoints.begin(), prof.breakpoints.end(),
                                        [r](T b) { return std::abs(r - b) < T(1e-9); });
    if (!near_break) out.push_back(r);
  }
  return out;
}

/// max |-Δu - f(u)| over the grid.
template <class T>
T pde_residual(const PiecewiseRadialProfile<T>& prof, const SourceFunction<T>& f, std::span<const T> r_grid) {
  T worst = 0;
  for (T r : r_grid) {
    if (!prof.contains(r)) {
      throw InvalidArgument("grid radius " + std::to_string(static_cast<double>(r)) + " outside the profile domain");
    }
    for (T b : prof.breakpoints) {
      if (std::abs(r - b) < T(1e-9)) {
        throw InvalidArgument("grid radius " + std::to_string(static_cast<double>(r)) + " too close to a breakpoint");
      }
    }
    worst = std::max(worst, std::abs(-prof.laplacian(r) - f(prof(r).u)));
  }
  return worst;
}

template <class T>
struct BreakpointGap {
  T radius{};
  T du{}, ddu{}, dd2u{};  // jumps of u, u', u''
  T total() const { return du + ddu + dd2u; }
};

/// One-sided mismatch of u, u', u'' at every breakpoint.
template <class T>
std::vector<BreakpointGap<T>> breakpoint_gaps(const PiecewiseRadialProfile<T>& prof) {
  std::vector<BreakpointGap<T>> out;
  for (std::size_t b = 0; b < prof.breakpoints.size(); ++b) {
    const T r = prof.breakpoints[b];
    const Jet<T> left = prof.pieces[b](r);
    const Jet<T> right = prof.pieces[b + 1](r);
    out.push_back({r, std::abs(left.u - right.u), std::abs(left.du - right.du), std::abs(left.d2u - right.d2u)});
  }
  return out;
}

/// max ||u'(r)| - c| on a grid of spacing 1e-3 over [lo, hi] (lo itself is
/// skipped when the profile domain is open there).
template <class T>
T eikonal_check(const PiecewiseRadialProfile<T>& prof, T lo, T hi, T c) {
  const T spacing = T(1e-3);
  T worst = 0;
  const auto steps = static_cast<long>(std::ceil(static_cast<double>((hi - lo) / spacing)));
  for (long k = 0; k <= steps; ++k) {
    const T r = k == steps ? hi : lo + T(k) * spacing;
    if (!prof.contains(r)) continue;
    worst = std::max(worst, std::abs(std::abs(prof(r).du) - c));
  }
  return worst;
}

/// u and u' are O(1/r) and O(1/r^2) at r_max and shrink in magnitude over
/// the last decade of radii.
template <class T>
bool decay_check(const PiecewiseRadialProfile<T>& prof, T r_max) {
  if (prof.kind != ProfileKind::Exterior) {
    throw InvalidArgument(std::string("decay check needs an exterior profile, got ") + to_string(prof.kind) +
                          " (u is unbounded below)");
  }
  if (!(r_max > T(1))) throw InvalidArgument("decay check needs r_max > 1");
  const Jet<T> end = prof(r_max);
  if (std::abs(end.u) > T(2) / r_max || std::abs(end.du) > T(2) / (r_max * r_max)) return false;
  constexpr int samples = 200;
  Jet<T> prev = prof(r_max / T(10));
  for (int k = 1; k <= samples; ++k) {
    const T r = r_max / T(10) * std::pow(T(10), T(k) / T(samples));
    const Jet<T> cur = prof(k == samples ? r_max : r);
    if (!(std::abs(cur.u) < std::abs(prev.u)) || !(std::abs(cur.du) < std::abs(prev.du))) return false;
    prev = cur;
  }
  return true;
}

template <class T>
struct SourceProperties {
  T min_slope{};
  T lipschitz_bound{};  // largest finite-difference slope magnitude
  bool positive = false;
};

/// Finite-difference slopes of f over uniform samples of [lo, hi].
template <class T>
SourceProperties<T> source_properties(const SourceFunction<T>& f, T lo, T hi, int samples) {
  if (samples < 2 || !(hi > lo)) throw InvalidArgument("source sampling needs samples >= 2 and hi > lo");
  SourceProperties<T> p;
  p.min_slope = std::numeric_limits<T>::infinity();
  p.positive = true;
  const T ds = (hi - lo) / T(samples - 1);
  T prev_s = lo;
  T prev = f(lo);
  p.positive = prev > T(0);
  for (int k = 1; k < samples; ++k) {
    const T s = k == samples - 1 ? hi : lo + T(k) * ds;
    const T v = f(s);
    const T slope = (v - prev) / (s - prev_s);
    p.min_slope = std::min(p.min_slope, slope);
    p.lipschitz_bound = std::max(p.lipschitz_bound, std::abs(slope));
    p.positive = p.positive && v > T(0);
    prev = v;
    prev_s = s;
  }
  return p;
}

/// Samples points x of the unit sphere of R^n with x_1 < cap_plane and checks
/// that u and |grad u| there equal the profile's sphere data within tol.
template <class T>
bool sphere_cap_gamma_check(const PiecewiseRadialProfile<T>& prof, T cap_plane, int samples = 1000,
                            T tol = T(1e-14), unsigned seed = 1) {
  if (!(cap_plane > T(-1)) || !(cap_plane < T(1))) throw InvalidArgument("cap_plane must lie in (-1, 1)");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<T> x(static_cast<std::size_t>(prof.n));
  int accepted = 0;
  while (accepted < samples) {
    T len2 = 0;
    for (auto& c : x) {
      c = T(normal(rng));
      len2 += c * c;
    }
    const T len = std::sqrt(len2);
    if (len == T(0) || x[0] / len >= cap_plane) continue;
    T r2 = 0;
    for (auto& c : x) {
      c /= len;
      r2 += c * c;
    }
    ++accepted;
    const Jet<T> j = prof(std::sqrt(r2));
    if (std::abs(j.u - prof.sphere_value) >= tol) return false;
    if (std::abs(std::abs(j.du) - prof.sphere_gradient) >= tol) return false;
  }
  return true;
}

struct VerificationReport {
  std::string theorem;  // "interior" or "exterior"
  int n = 2;
  double max_pde_residual = 0.0;
  std::vector<std::array<double, 3>> breakpoint_gaps;  // (du, du', du'') per breakpoint
  double branch_gap = 0.0;
  double eikonal_max_error = 0.0;
  double f_min_slope = 0.0;
  double f_lipschitz_bound = 0.0;
  bool f_positive = false;
  bool f_monotonicity_asserted = true;  // false where the construction makes no claim
  std::optional<bool> decay_ok;         // exterior only
  bool sphere_data_ok = false;
  bool passed = false;
};

constexpr double residual_threshold = 1e-10;
constexpr double gluing_threshold = 1e-12;

namespace detail {

template <class T>
void fill_common(VerificationReport& rep, const PiecewiseRadialProfile<T>& prof, const SourceFunction<T>& f,
                 const std::vector<T>& grid) {
  rep.n = prof.n;
  rep.max_pde_residual = static_cast<double>(pde_residual(prof, f, std::span<const T>(grid)));
  for (const auto& g : breakpoint_gaps(prof)) {
    rep.breakpoint_gaps.push_back({static_cast<double>(g.du), static_cast<double>(g.ddu), static_cast<double>(g.dd2u)});
  }
  rep.branch_gap = static_cast<double>(f.branch_gap());
  rep.sphere_data_ok = sphere_cap_gamma_check(prof, T(0.5));
}

inline bool gluing_ok(const VerificationReport& rep) {
  for (const auto& g : rep.breakpoint_gaps) {
    if (g[0] + g[1] + g[2] >= gluing_threshold) return false;
  }
  return rep.branch_gap < gluing_threshold;
}

}  // namespace detail

/// Residuals on 10^4 uniform radii of [1e-3, 5], gluing, eikonal on [1, 5]
/// and monotonicity/positivity of f on [-50, 50].
inline VerificationReport verify_interior(int n) {
  using T = long double;
  const auto prof = interior_profile<T>(n);
  const auto f = interior_source<T>(n);
  VerificationReport rep;
  rep.theorem = "interior";
  detail::fill_common(rep, prof, f, residual_grid<T>(prof, 1e-3L, 5.0L, 10000));
  rep.eikonal_max_error = static_cast<double>(eikonal_check<T>(prof, 1.0L, 5.0L, 8.0L));
  const auto props = source_properties<T>(f, -50.0L, 50.0L, 100001);
  rep.f_min_slope = static_cast<double>(props.min_slope);
  rep.f_lipschitz_bound = static_cast<double>(props.lipschitz_bound);
  rep.f_positive = props.positive;
  rep.passed = rep.max_pde_residual < residual_threshold && detail::gluing_ok(rep) && rep.eikonal_max_error == 0.0 &&
               rep.f_min_slope > 0.0 && rep.f_positive && rep.sphere_data_ok;
  return rep;
}

/// Residuals on 10^4 geometric radii of [1e-3, 1e3], gluing, eikonal on
/// (0, 1], decay at 1e3, and for n >= 4 monotonicity/positivity of f on
/// [0.01, 1.49]. For n < 4 the f properties are measured but not required.
inline VerificationReport verify_exterior(int n) {
  using T = long double;
  const auto prof = exterior_profile<T>(n);
  const auto f = exterior_source<T>(n);
  VerificationReport rep;
  rep.theorem = "exterior";
  detail::fill_common(rep, prof, f, residual_grid<T>(prof, 1e-3L, 1e3L, 10000, true));
  rep.eikonal_max_error = static_cast<double>(eikonal_check<T>(prof, 0.0L, 1.0L, 0.5L));
  rep.decay_ok = decay_check<T>(prof, 1e3L);
  const auto props = source_properties<T>(f, 0.01L, 1.49L, 1481);
  rep.f_min_slope = static_cast<double>(props.min_slope);
  rep.f_lipschitz_bound = static_cast<double>(props.lipschitz_bound);
  rep.f_positive = props.positive;
  rep.f_monotonicity_asserted = n >= 4;
  const bool f_ok = !rep.f_monotonicity_asserted || (rep.f_min_slope > 0.0 && rep.f_positive);
  rep.passed = rep.max_pde_residual < residual_threshold && detail::gluing_ok(rep) && rep.eikonal_max_error == 0.0 &&
               *rep.decay_ok && f_ok && rep.sphere_data_ok;
  return rep;
}

}  // namespace serrin::radial
