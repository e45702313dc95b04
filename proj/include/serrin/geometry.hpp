#pragma once

// Trial domains Omega = {phi < 0} inside the box D, represented by nodal
// level-set values, and the measure-theoretic operations on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "serrin/error.hpp"
#include "serrin/lattice.hpp"

namespace serrin {

/// Nodal level-set values on the grid of a BoxDomain; Omega := {phi < 0}.
class LevelSetField {
 public:
  LevelSetField(BoxDomain box, std::vector<double> values) : box_(box), values_(std::move(values)) {
    if (values_.size() != box_.node_count()) {
      throw InvalidArgument("level set has " + std::to_string(values_.size()) + " values, grid needs " +
                            std::to_string(box_.node_count()));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw InvalidArgument("level set contains a non-finite value");
    }
  }

  /// Samples f(Point) at every grid node.
  template <class F>
  static LevelSetField sample(const BoxDomain& box, F&& f) {
    std::vector<double> values(box.node_count());
    for (int j = 0; j <= box.grid_n(); ++j) {
      for (int i = 0; i <= box.grid_n(); ++i) values[box.index(i, j)] = f(box.node(i, j));
    }
    return LevelSetField(box, std::move(values));
  }

  const BoxDomain& box() const { return box_; }
  std::span<const double> values() const { return values_; }
  double operator()(int i, int j) const { return values_[box_.index(i, j)]; }
  double operator[](std::size_t k) const { return values_[k]; }

  /// Returns a copy with g(value) applied at every node.
  template <class G>
  LevelSetField transformed(G&& g) const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), g);
    return LevelSetField(box_, std::move(out));
  }

 private:
  BoxDomain box_;
  std::vector<double> values_;
};

enum class Axis { X, Y };

/// Area of {phi < 0}, integrated exactly for the piecewise-linear interpolant
/// on the lattice triangulation.
inline double volume(const LevelSetField& phi) {
  const BoxDomain& box = phi.box();
  const double full = 0.5 * box.h() * box.h();
  double total = 0.0;
  for_each_lattice_triangle(box, [&](const std::array<std::size_t, 3>& tri) {
    const std::array<double, 3> v{phi[tri[0]], phi[tri[1]], phi[tri[2]]};
    if (v[0] < 0.0 && v[1] < 0.0 && v[2] < 0.0) {
      total += full;
    } else if (v[0] < 0.0 || v[1] < 0.0 || v[2] < 0.0) {
      total += negative_area({box.node(tri[0]), box.node(tri[1]), box.node(tri[2])}, v);
    }
  });
  return total;
}

/// Signed distance to the circle of the given radius (negative inside).
inline LevelSetField disk_levelset(const BoxDomain& box, double radius, Point center = {}) {
  if (!(radius > 0.0)) throw InvalidArgument("disk radius must be positive");
  const double w = box.half_width();
  if (std::abs(center.x) + radius > w || std::abs(center.y) + radius > w) {
    throw InvalidArgument("disk of radius " + std::to_string(radius) + " is not contained in the box");
  }
  return LevelSetField::sample(box, [&](Point p) { return norm(p - center) - radius; });
}

/// Radius of the disk with the given area.
inline double radius_for_area(double area) { return std::sqrt(area / std::numbers::pi); }

/// Value of the piecewise-linear interpolant at p (clamped into the box).
inline double interpolate(const LevelSetField& phi, Point p) {
  const BoxDomain& box = phi.box();
  const double w = box.half_width();
  const double h = box.h();
  const double sx = std::clamp((p.x + w) / h, 0.0, static_cast<double>(box.grid_n()));
  const double sy = std::clamp((p.y + w) / h, 0.0, static_cast<double>(box.grid_n()));
  const int i = std::min(static_cast<int>(sx), box.grid_n() - 1);
  const int j = std::min(static_cast<int>(sy), box.grid_n() - 1);
  const double fx = sx - i;
  const double fy = sy - j;
  const double v00 = phi(i, j), v10 = phi(i + 1, j), v01 = phi(i, j + 1), v11 = phi(i + 1, j + 1);
  if (uses_main_diagonal(box, i, j)) {
    if (fx >= fy) return v00 + fx * (v10 - v00) + fy * (v11 - v10);
    return v00 + fy * (v01 - v00) + fx * (v11 - v01);
  }
  if (fx + fy <= 1.0) return v00 + fx * (v10 - v00) + fy * (v01 - v00);
  return v11 + (1.0 - fx) * (v01 - v11) + (1.0 - fy) * (v10 - v11);
}

struct Segment {
  Point a;
  Point b;
};

/// Pieces of the zero set of the piecewise-linear interpolant, one per
/// triangle that has both negative and non-negative vertices.
inline std::vector<Segment> zero_set_segments(const LevelSetField& phi) {
  const BoxDomain& box = phi.box();
  std::vector<Segment> out;
  for_each_lattice_triangle(box, [&](const std::array<std::size_t, 3>& tri) {
    int negatives = 0;
    for (std::size_t k : tri) negatives += phi[k] < 0.0 ? 1 : 0;
    if (negatives == 0 || negatives == 3) return;
    std::array<Point, 2> pts;
    int count = 0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t a = tri[k], b = tri[(k + 1) % 3];
      if ((phi[a] < 0.0) != (phi[b] < 0.0)) {
        pts[count++] = edge_crossing(a, box.node(a), phi[a], b, box.node(b), phi[b]);
      }
    }
    out.push_back({pts[0], pts[1]});
  });
  return out;
}

/// For every grid node, the nearest of a set of segments and the distance to it.
struct NearestSegments {
  std::vector<double> distance;
  std::vector<int> segment;  // -1 when there are no segments
};

/// Closest-segment propagation in fast-marching order: nodes near each
/// segment are seeded with exact distances, then accepted in increasing
/// distance, each neighbour testing the segment of the node that reached it.
/// Propagation alone picks the right stretch of the zero set but can stop a
/// few segments short; every accepted node then walks to the nearest segment
/// among those within two cells of its current one until nothing is closer.
inline NearestSegments nearest_segments(const BoxDomain& box, std::span<const Segment> segments) {
  const std::size_t count = box.node_count();
  NearestSegments out{std::vector<double>(count, std::numeric_limits<double>::infinity()),
                      std::vector<int>(count, -1)};
  if (segments.empty()) return out;

  const double h = box.h();
  const double w = box.half_width();
  const int n = box.grid_n();
  auto to_cell = [&](double c) { return static_cast<int>(std::floor((c + w) / h)); };

  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    const int i0 = std::clamp(to_cell(std::min(seg.a.x, seg.b.x)) - 1, 0, n);
    const int i1 = std::clamp(to_cell(std::max(seg.a.x, seg.b.x)) + 2, 0, n);
    const int j0 = std::clamp(to_cell(std::min(seg.a.y, seg.b.y)) - 1, 0, n);
    const int j1 = std::clamp(to_cell(std::max(seg.a.y, seg.b.y)) + 2, 0, n);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const std::size_t k = box.index(i, j);
        const double d = segment_distance(box.node(i, j), seg.a, seg.b);
        if (d < out.distance[k]) {
          out.distance[k] = d;
          out.segment[k] = static_cast<int>(s);
        }
      }
    }
  }

  std::vector<std::vector<int>> bucket(static_cast<std::size_t>(n) * n);
  std::vector<std::pair<int, int>> cell_of(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Point mid = 0.5 * (segments[s].a + segments[s].b);
    const int ci = std::clamp(to_cell(mid.x), 0, n - 1), cj = std::clamp(to_cell(mid.y), 0, n - 1);
    cell_of[s] = {ci, cj};
    bucket[static_cast<std::size_t>(cj) * n + ci].push_back(static_cast<int>(s));
  }
  auto descend = [&](std::size_t k) {
    const Point p = box.node(k);
    int cur = out.segment[k];
    double best = out.distance[k];
    for (bool moved = true; moved;) {
      moved = false;
      const auto [ci, cj] = cell_of[static_cast<std::size_t>(cur)];
      int next = cur;
      for (int j = std::max(cj - 2, 0); j <= std::min(cj + 2, n - 1); ++j) {
        for (int i = std::max(ci - 2, 0); i <= std::min(ci + 2, n - 1); ++i) {
          for (int t : bucket[static_cast<std::size_t>(j) * n + i]) {
            const double d = segment_distance(p, segments[static_cast<std::size_t>(t)].a,
                                              segments[static_cast<std::size_t>(t)].b);
            if (d < best) {
              best = d;
              next = t;
            }
          }
        }
      }
      if (next != cur) {
        cur = next;
        moved = true;
      }
    }
    out.segment[k] = cur;
    out.distance[k] = best;
  };

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t k = 0; k < count; ++k) {
    if (out.segment[k] >= 0) heap.emplace(out.distance[k], k);
  }
  std::vector<char> done(count, 0);
  while (!heap.empty()) {
    const auto [d, k] = heap.top();
    heap.pop();
    if (done[k] || d > out.distance[k]) continue;
    done[k] = 1;
    descend(k);
    const Segment& seg = segments[static_cast<std::size_t>(out.segment[k])];
    const int i = box.column_of(k), j = box.row_of(k);
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int ni = i + di, nj = j + dj;
        if ((di == 0 && dj == 0) || ni < 0 || nj < 0 || ni > n || nj > n) continue;
        const std::size_t m = box.index(ni, nj);
        if (done[m]) continue;
        const double dm = segment_distance(box.node(ni, nj), seg.a, seg.b);
        if (dm < out.distance[m]) {
          out.distance[m] = dm;
          out.segment[m] = out.segment[k];
          heap.emplace(dm, m);
        }
      }
    }
  }
  return out;
}

/// Replaces phi by the signed distance to its (piecewise-linear) zero set.
/// A field without a zero set is returned unchanged.
inline LevelSetField reinitialize(const LevelSetField& phi) {
  const auto segments = zero_set_segments(phi);
  if (segments.empty()) return phi;
  const auto nearest = nearest_segments(phi.box(), segments);
  std::vector<double> out(phi.values().size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double v = phi[k];
    out[k] = v < 0.0 ? -nearest.distance[k] : (v > 0.0 ? nearest.distance[k] : 0.0);
  }
  return LevelSetField(phi.box(), std::move(out));
}

/// phi carried over to another grid on the same box by interpolation,
/// followed by reinitialization (used to warm-start finer runs).
inline LevelSetField resample(const LevelSetField& phi, const BoxDomain& target) {
  if (target.half_width() != phi.box().half_width()) throw InvalidArgument("resample needs the same box");
  return reinitialize(LevelSetField::sample(target, [&](Point p) { return interpolate(phi, p); }));
}

/// 1-D measure of {phi < 0} along grid line `line`, where the line runs
/// along y (a column, fixed x) for Axis::X and along x (a row) for Axis::Y.
inline double section_measure(const LevelSetField& phi, Axis axis, int line) {
  const BoxDomain& box = phi.box();
  const double h = box.h();
  double total = 0.0;
  for (int k = 0; k < box.grid_n(); ++k) {
    const double a = axis == Axis::X ? phi(line, k) : phi(k, line);
    const double b = axis == Axis::X ? phi(line, k + 1) : phi(k + 1, line);
    if (a < 0.0 && b < 0.0) {
      total += h;
    } else if (a < 0.0 && b > 0.0) {
      total += h * a / (a - b);
    } else if (b < 0.0 && a > 0.0) {
      total += h * b / (b - a);
    } else if (a < 0.0 || b < 0.0) {
      total += h;  // one endpoint exactly zero
    }
  }
  return total;
}

/// Steiner symmetrization about the given axis. Axis::X makes the set
/// symmetric under y -> -y: each vertical section is replaced by the
/// centred interval of the same length. The result is reinitialized to a
/// signed distance.
inline LevelSetField steiner_symmetrize(const LevelSetField& phi, Axis axis) {
  const BoxDomain& box = phi.box();
  const double w = box.half_width();
  const double h = box.h();
  std::vector<double> out(box.node_count());
  for (int line = 0; line <= box.grid_n(); ++line) {
    const double half = 0.5 * section_measure(phi, axis, line);
    for (int k = 0; k <= box.grid_n(); ++k) {
      const double t = std::abs(box.coord(k));
      double v;
      if (half <= 0.0) {
        v = t + 0.5 * h;  // empty section
      } else if (half >= w) {
        v = t - w - 0.5 * h;  // full section: keep the walls strictly inside
      } else {
        v = t - half;
      }
      out[axis == Axis::X ? box.index(line, k) : box.index(k, line)] = v;
    }
  }
  return reinitialize(LevelSetField(box, std::move(out)));
}

/// Outcome of a starshapedness test; `witness_angle` is set on failure.
struct StarshapedResult {
  bool starshaped = true;
  std::optional<double> witness_angle;
  explicit operator bool() const { return starshaped; }
};

/// Casts n_rays rays from center and checks that along each ray the domain
/// is left at most once.
inline StarshapedResult is_starshaped(const LevelSetField& phi, Point center, int n_rays) {
  if (!(interpolate(phi, center) < 0.0)) throw InvalidArgument("starshapedness center lies outside the domain");
  if (n_rays < 1) throw InvalidArgument("need at least one ray");
  const BoxDomain& box = phi.box();
  const double step = 0.25 * box.h();
  const double reach = 2.0 * std::sqrt(2.0) * box.half_width();
  for (int r = 0; r < n_rays; ++r) {
    const double angle = 2.0 * std::numbers::pi * r / n_rays;
    const Point dir{std::cos(angle), std::sin(angle)};
    bool left = false;
    for (double t = step; t <= reach; t += step) {
      const Point p = center + t * dir;
      if (box.distance_to_boundary(p) < 0.0) break;
      const bool inside = interpolate(phi, p) < 0.0;
      if (!inside) {
        left = true;
      } else if (left) {
        return {false, angle};
      }
    }
  }
  return {};
}

/// Largest difference between phi and its mirror image about the axis.
inline double mirror_asymmetry(const LevelSetField& phi, Axis axis) {
  const int n = phi.box().grid_n();
  double worst = 0.0;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double mirrored = axis == Axis::X ? phi(i, n - j) : phi(n - i, j);
      worst = std::max(worst, std::abs(phi(i, j) - mirrored));
    }
  }
  return worst;
}

}  // namespace serrin
