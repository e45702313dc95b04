#pragma once

// Volume-constrained minimization of the Dirichlet energy J over domains
// Omega inside D, by level-set gradient flow driven by the shape derivative
//   dJ(Omega; V) = -1/2 * integral over dOmega of |grad u|^2 (V . nu).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "serrin/error.hpp"
#include "serrin/fem.hpp"
#include "serrin/geometry.hpp"

namespace serrin {

/// Normal velocity on one boundary edge; positive values move the boundary outward.
struct EdgeVelocity {
  Segment edge;
  double velocity = 0.0;
  double length = 0.0;
  EdgeTag tag = EdgeTag::Free;
  bool supported = true;  // see BoundarySample::supported
};

/// Length-weighted mean of |grad u|^2 / 2 over the supported FREE edges
/// (0 without any).
inline double free_boundary_multiplier(std::span<const BoundarySample> samples) {
  double weighted = 0.0, length = 0.0;
  for (const auto& s : samples) {
    if (s.tag != EdgeTag::Free || !s.supported) continue;
    weighted += 0.5 * s.grad * s.grad * s.length;
    length += s.length;
  }
  return length > 0.0 ? weighted / length : 0.0;
}

/// Descent velocity for J + multiplier * (|Omega| - alpha):
/// v = |grad u|^2 / 2 - multiplier on FREE edges, 0 on BOX edges.
inline std::vector<EdgeVelocity> shape_gradient(const ScalarField& u, double multiplier) {
  const TriMesh& mesh = *u.mesh;
  std::vector<EdgeVelocity> out;
  out.reserve(mesh.boundary_edges.size());
  for (const auto& sample : boundary_gradient(u)) {
    const auto& e = mesh.boundary_edges[static_cast<std::size_t>(sample.edge)];
    const Segment seg{mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]};
    const double v = e.tag == EdgeTag::Free ? 0.5 * sample.grad * sample.grad - multiplier : 0.0;
    out.push_back({seg, v, sample.length, e.tag, sample.supported});
  }
  return out;
}

/// First-order prediction of J(Omega_t) - J(Omega) per unit t for a normal
/// boundary displacement t * g: -1/2 * sum |grad u|^2 g(midpoint) |edge|.
template <class G>
double shape_derivative(const ScalarField& u, G&& displacement) {
  double total = 0.0;
  for (const auto& s : boundary_gradient(u)) {
    if (s.tag != EdgeTag::Free) continue;
    total -= 0.5 * s.grad * s.grad * displacement(s.midpoint) * s.length;
  }
  return total;
}

/// Gaussian average of the FREE-edge velocities over neighbouring FREE edges
/// (by midpoint distance, cut off at 3 sigma). The raw element
/// gradients carry grid-scale noise that the discrete energy does not see as
/// a descent direction; a few cells of smoothing removes it.
inline std::vector<EdgeVelocity> smooth_velocity(std::span<const EdgeVelocity> velocities, double sigma) {
  std::vector<EdgeVelocity> out(velocities.begin(), velocities.end());
  if (!(sigma > 0.0)) return out;
  auto mid = [](const EdgeVelocity& v) { return 0.5 * (v.edge.a + v.edge.b); };
  const double cutoff = 3.0 * sigma;
  for (std::size_t a = 0; a < velocities.size(); ++a) {
    if (velocities[a].tag != EdgeTag::Free) continue;
    const Point ma = mid(velocities[a]);
    double weight = 0.0, sum = 0.0;
    for (const auto& b : velocities) {
      if (b.tag != EdgeTag::Free) continue;
      const double d = norm(mid(b) - ma);
      if (d > cutoff) continue;
      const double k = b.length * std::exp(-0.5 * d * d / (sigma * sigma));
      weight += k;
      sum += k * b.velocity;
    }
    if (weight > 0.0) out[a].velocity = sum / weight;
  }
  return out;
}

/// Extends FREE-edge velocities to every grid node, constant along the
/// normals: each node takes the velocity of its nearest FREE edge.
inline std::vector<double> extend_velocity(const BoxDomain& box, std::span<const EdgeVelocity> velocities) {
  std::vector<Segment> segments;
  std::vector<double> values;
  for (const auto& v : velocities) {
    if (v.tag != EdgeTag::Free) continue;
    segments.push_back(v.edge);
    values.push_back(v.velocity);
  }
  std::vector<double> out(box.node_count(), 0.0);
  if (segments.empty()) return out;
  const auto nearest = nearest_segments(box, segments);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = values[static_cast<std::size_t>(nearest.segment[k])];
  return out;
}

/// One Godunov upwind step of phi_t + v |grad phi| = 0 with nodal velocities.
/// One-sided differences reaching outside D are dropped, so the walls of D
/// never act as a moving interface and Omega stays inside D.
inline LevelSetField advect_nodal(const LevelSetField& phi, std::span<const double> node_velocity, double step) {
  const BoxDomain& box = phi.box();
  const double h = box.h();
  double vmax = 0.0;
  for (double v : node_velocity) vmax = std::max(vmax, std::abs(v));
  if (!(step >= 0.0)) throw InvalidArgument("advection step must be non-negative");
  if (vmax * step > 0.5 * h * (1.0 + 1e-12)) {
    throw InvalidArgument("advection step violates the CFL bound |v| * step <= h / 2");
  }
  const int n = box.grid_n();
  std::vector<double> out(phi.values().begin(), phi.values().end());
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const std::size_t k = box.index(i, j);
      const double v = node_velocity[k];
      if (v == 0.0) continue;
      const double c = phi(i, j);
      const double dmx = i > 0 ? (c - phi(i - 1, j)) / h : 0.0;
      const double dpx = i < n ? (phi(i + 1, j) - c) / h : 0.0;
      const double dmy = j > 0 ? (c - phi(i, j - 1)) / h : 0.0;
      const double dpy = j < n ? (phi(i, j + 1) - c) / h : 0.0;
      auto sq = [](double a) { return a * a; };
      double grad;
      if (v > 0.0) {
        grad = std::sqrt(sq(std::max(dmx, 0.0)) + sq(std::min(dpx, 0.0)) + sq(std::max(dmy, 0.0)) +
                         sq(std::min(dpy, 0.0)));
      } else {
        grad = std::sqrt(sq(std::min(dmx, 0.0)) + sq(std::max(dpx, 0.0)) + sq(std::min(dmy, 0.0)) +
                         sq(std::max(dpy, 0.0)));
      }
      out[k] = c - step * v * grad;
    }
  }
  return LevelSetField(box, std::move(out));
}

/// Transports phi by the FREE-edge velocities for one pseudo-time step.
inline LevelSetField advect(const LevelSetField& phi, std::span<const EdgeVelocity> velocities, double step) {
  return advect_nodal(phi, extend_velocity(phi.box(), velocities), step);
}

struct ProjectionResult {
  LevelSetField field;
  double shift = 0.0;  // field = phi + shift
};

/// Finds by bisection the constant shift with volume(phi + shift) = alpha.
/// The bisection runs to round-off; rel_tol * alpha is the error that is still
/// accepted when it cannot get there. Negative shifts grow the domain.
inline ProjectionResult volume_projection(const LevelSetField& phi, double alpha, double rel_tol = 1e-3) {
  const BoxDomain& box = phi.box();
  if (!(alpha > 0.0) || alpha > box.area()) {
    throw InvalidArgument("alpha unreachable: target volume " + std::to_string(alpha) + " must lie in (0, " +
                          std::to_string(box.area()) + "]");
  }
  auto shifted = [&](double s) { return phi.transformed([s](double v) { return v + s; }); };
  const auto [lo_it, hi_it] = std::minmax_element(phi.values().begin(), phi.values().end());
  // volume(phi + s) decreases in s.
  double grow = -(*hi_it) - box.h();  // everything negative
  double shrink = -(*lo_it) + box.h();  // everything positive
  const double target_tol = rel_tol * alpha;
  // J moves by about multiplier * dV, so leftover volume error would swamp
  // the energy differences the line search compares.
  const double exact_tol = 1e-13 * alpha;
  double best_s = 0.0;
  double best_err = std::abs(volume(phi) - alpha);
  if (best_err <= exact_tol) return {phi, 0.0};
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (grow + shrink);
    const double vol = volume(shifted(mid));
    const double err = std::abs(vol - alpha);
    if (err < best_err) {
      best_err = err;
      best_s = mid;
    }
    if (err <= exact_tol || shrink - grow <= 1e-16) break;
    if (vol > alpha) {
      grow = mid;
    } else {
      shrink = mid;
    }
  }
  if (best_err > target_tol) {
    throw InvalidArgument("alpha unreachable: volume projection stalled at error " + std::to_string(best_err));
  }
  return {shifted(best_s), best_s};
}

struct OptimizerConfig {
  double alpha = 3.5;
  int grid_n = 128;
  int max_iters = 400;
  double step0 = 4.0;  // pseudo-time; each step is also capped by the CFL bound
  double vol_tol = 1e-3;
  double stop_tol = 1e-7;
  int symmetrize_every = 0;  // 0 = never
  int reinit_every = 10;     // accepted steps between reinitializations
  int stall_window = 10;
  double smoothing = 2.0;  // velocity smoothing width in cells; 0 = raw velocities

  void validate() const {
    if (!(step0 > 0.0)) throw InvalidArgument("step0 must be positive");
    if (!(vol_tol > 0.0) || vol_tol > 0.01) throw InvalidArgument("vol_tol must lie in (0, 0.01]");
    if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
    if (symmetrize_every < 0) throw InvalidArgument("symmetrize_every must be non-negative");
    if (!(smoothing >= 0.0)) throw InvalidArgument("smoothing must be non-negative");
    if (!(alpha > 0.0)) throw InvalidArgument("alpha unreachable: alpha must be positive");
  }
};

enum class StepKind { Initial, Descent, Symmetrization };

inline const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Initial: return "initial";
    case StepKind::Descent: return "descent";
    case StepKind::Symmetrization: return "symmetrize";
  }
  return "?";
}

struct IterationRecord {
  int iter = 0;
  double j = 0.0;
  double volume = 0.0;
  double multiplier = 0.0;
  double step = 0.0;
  bool accepted = false;
  StepKind kind = StepKind::Descent;
};

enum class StopReason { MaxIterations, Converged, LineSearchStalled, NoFreeBoundary };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::Converged: return "converged";
    case StopReason::LineSearchStalled: return "line_search_stalled";
    case StopReason::NoFreeBoundary: return "no_free_boundary";
  }
  return "?";
}

struct OptimizerState {
  LevelSetField phi;
  double multiplier = 0.0;
  std::vector<IterationRecord> history;
  StateSolution solution;  // state problem on the final phi
  StopReason stop = StopReason::MaxIterations;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

/// Level-set gradient flow for min J(Omega) subject to |Omega| = alpha, Omega in D.
///
/// Each iteration solves the state problem, sets the multiplier to the FREE
/// mean of |grad u|^2 / 2, advects phi with the resulting normal velocity and
/// re-projects onto the volume constraint. A step is accepted only if J
/// decreases; otherwise the step is halved, at most ten times. With
/// symmetrize_every > 0 the domain is periodically replaced by its double
/// Steiner symmetrization, kept when it does not increase J.
inline OptimizerState optimize(const OptimizerConfig& config, const LevelSetField& init,
                               const IterationObserver& observer = {}) {
  config.validate();
  const BoxDomain& box = init.box();
  const double h = box.h();
  if (config.alpha > box.area()) {
    throw InvalidArgument("alpha unreachable: alpha = " + std::to_string(config.alpha) +
                          " exceeds the box area " + std::to_string(box.area()));
  }
  const double init_volume = volume(init);
  // One grid cell per column of slack for the discretized initial shape.
  if (std::abs(init_volume - config.alpha) > 0.2 * config.alpha + box.grid_n() * h * h) {
    throw InvalidArgument("initial volume " + std::to_string(init_volume) + " is not within 20% of alpha");
  }

  auto with_context = [](int iter, auto&& fn) {
    try {
      return fn();
    } catch (const MeshError& e) {
      throw MeshError("iteration " + std::to_string(iter) + ": " + e.what());
    } catch (const SolverError& e) {
      throw SolverError("iteration " + std::to_string(iter) + ": " + e.what());
    }
  };
  auto project = [&](const LevelSetField& phi) { return volume_projection(phi, config.alpha, config.vol_tol).field; };

  LevelSetField phi = project(init);
  StateSolution sol = with_context(0, [&] { return solve_state(phi); });
  OptimizerState state{phi, 0.0, {}, sol, StopReason::MaxIterations};
  auto record = [&](IterationRecord r) {
    state.history.push_back(r);
    if (observer) observer(r);
  };
  double multiplier = free_boundary_multiplier(boundary_gradient(sol.u));
  record({0, sol.energy.j, volume(phi), multiplier, 0.0, true, StepKind::Initial});

  std::vector<double> accepted_j{sol.energy.j};
  double step = config.step0;
  int clean_accepts = 0;
  int accepted_steps = 0;
  bool reinit_due = false;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    if (config.symmetrize_every > 0 && iter % config.symmetrize_every == 0) {
      LevelSetField sym = project(steiner_symmetrize(steiner_symmetrize(phi, Axis::Y), Axis::X));
      StateSolution sym_sol = with_context(iter, [&] { return solve_state(sym); });
      const bool keep = sym_sol.energy.j <= sol.energy.j;
      const double sym_multiplier = free_boundary_multiplier(boundary_gradient(sym_sol.u));
      record({iter, sym_sol.energy.j, volume(sym), sym_multiplier, 0.0, keep, StepKind::Symmetrization});
      if (keep) {
        phi = std::move(sym);
        sol = std::move(sym_sol);
        multiplier = sym_multiplier;
        accepted_j.push_back(sol.energy.j);
      }
      continue;
    }

    const auto samples = boundary_gradient(sol.u);
    multiplier = free_boundary_multiplier(samples);
    const auto velocities = smooth_velocity(shape_gradient(sol.u, multiplier), config.smoothing * h);
    const auto node_velocity = extend_velocity(box, velocities);
    double vmax = 0.0;
    for (double v : node_velocity) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) {
      state.stop = StopReason::NoFreeBoundary;
      break;
    }

    const double dt0 = std::min(step, 0.5 * h / vmax);
    auto try_step = [&](double dt, bool reinit) {
      LevelSetField moved = advect_nodal(phi, node_velocity, dt);
      if (reinit) moved = reinitialize(moved);
      LevelSetField trial = project(moved);
      StateSolution trial_sol = with_context(iter, [&] { return solve_state(trial); });
      if (!(trial_sol.energy.j < sol.energy.j)) return false;
      phi = std::move(trial);
      sol = std::move(trial_sol);
      return true;
    };
    // Reinitialization moves the snapped mesh by an amount that does not
    // shrink with dt, so it is tried once at the full step and otherwise
    // deferred to the next accepted step.
    bool accepted = false;
    if (reinit_due && try_step(dt0, true)) {
      reinit_due = false;
      accepted = true;
    }
    double dt = dt0;
    int halvings = 0;
    for (; !accepted && halvings <= 10; ++halvings) {
      if (try_step(dt, false)) {
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (!accepted) {
      record({iter, sol.energy.j, volume(phi), multiplier, dt, false, StepKind::Descent});
      state.stop = StopReason::LineSearchStalled;
      break;
    }
    ++accepted_steps;
    if (config.reinit_every > 0 && accepted_steps % config.reinit_every == 0) reinit_due = true;
    record({iter, sol.energy.j, volume(phi), multiplier, dt, true, StepKind::Descent});
    accepted_j.push_back(sol.energy.j);

    step = halvings == 0 ? step : dt;
    clean_accepts = halvings == 0 ? clean_accepts + 1 : 0;
    if (clean_accepts >= 3) {
      step = config.step0;
      clean_accepts = 0;
    }

    const std::size_t w = static_cast<std::size_t>(config.stall_window);
    if (accepted_j.size() > w) {
      const double recent = accepted_j.back();
      const double before = accepted_j[accepted_j.size() - 1 - w];
      if (before - recent < config.stop_tol * std::abs(recent)) {
        state.stop = StopReason::Converged;
        break;
      }
    }
  }

  state.phi = std::move(phi);
  state.multiplier = free_boundary_multiplier(boundary_gradient(sol.u));
  state.solution = std::move(sol);
  return state;
}

}  // namespace serrin
