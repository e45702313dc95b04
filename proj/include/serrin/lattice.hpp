#pragma once

// Structured grid over the box D = (-w, w)^2 and its fixed triangulation.
//
// Every cell is split along one diagonal. The diagonal always passes through
// the cell corner closest to the origin, which makes the triangulation
// mirror-symmetric about both coordinate axes when grid_n is even.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

#include "serrin/error.hpp"

namespace serrin {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

/// Signed area of the triangle (a, b, c); positive when counter-clockwise.
inline double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

/// Distance from p to the closed segment [a, b].
inline double segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return norm(p - (a + t * ab));
}

/// The confining box D = (-half_width, half_width)^2 with grid_n cells per axis.
class BoxDomain {
 public:
  static constexpr int min_cells = 16;

  BoxDomain(double half_width, int grid_n) : half_width_(half_width), grid_n_(grid_n) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw InvalidArgument("box half width must be positive");
    }
    if (grid_n < min_cells) {
      throw InvalidArgument("grid_n must be at least " + std::to_string(min_cells));
    }
  }

  double half_width() const { return half_width_; }
  int grid_n() const { return grid_n_; }
  double h() const { return 2.0 * half_width_ / grid_n_; }
  double area() const { return 4.0 * half_width_ * half_width_; }

  int nodes_per_axis() const { return grid_n_ + 1; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(grid_n_ + 1) * static_cast<std::size_t>(grid_n_ + 1);
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid_n_ + 1) +
           static_cast<std::size_t>(i);
  }
  int column_of(std::size_t k) const { return static_cast<int>(k % (grid_n_ + 1)); }
  int row_of(std::size_t k) const { return static_cast<int>(k / (grid_n_ + 1)); }

  double coord(int i) const {
    // Exact at both ends and symmetric about zero for even grid_n.
    return half_width_ * (2.0 * i - grid_n_) / grid_n_;
  }
  Point node(int i, int j) const { return {coord(i), coord(j)}; }
  Point node(std::size_t k) const { return node(column_of(k), row_of(k)); }

  /// Distance from p to the boundary of D (negative outside).
  double distance_to_boundary(Point p) const {
    return half_width_ - std::max(std::abs(p.x), std::abs(p.y));
  }

  bool operator==(const BoxDomain&) const = default;

 private:
  double half_width_;
  int grid_n_;
};

/// Whether cell (i, j) is split along the diagonal from node (i, j) to (i+1, j+1).
inline bool uses_main_diagonal(const BoxDomain& box, int i, int j) {
  const int twice_cx = 2 * i + 1 - box.grid_n();
  const int twice_cy = 2 * j + 1 - box.grid_n();
  return static_cast<long>(twice_cx) * twice_cy >= 0;
}

/// The two counter-clockwise triangles of cell (i, j), as node indices.
inline std::array<std::array<std::size_t, 3>, 2> cell_triangles(const BoxDomain& box, int i, int j) {
  const std::size_t n00 = box.index(i, j);
  const std::size_t n10 = box.index(i + 1, j);
  const std::size_t n01 = box.index(i, j + 1);
  const std::size_t n11 = box.index(i + 1, j + 1);
  if (uses_main_diagonal(box, i, j)) {
    return {{{n00, n10, n11}, {n00, n11, n01}}};
  }
  return {{{n00, n10, n01}, {n10, n11, n01}}};
}

/// Calls f(std::array<size_t, 3>) for every lattice triangle in a fixed order.
template <class F>
void for_each_lattice_triangle(const BoxDomain& box, F&& f) {
  for (int j = 0; j < box.grid_n(); ++j) {
    for (int i = 0; i < box.grid_n(); ++i) {
      for (const auto& tri : cell_triangles(box, i, j)) f(tri);
    }
  }
}

/// Order-independent key of the lattice edge between two nodes.
inline std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

/// Point where the linear interpolant between (pa, va) and (pb, vb) vanishes.
/// Evaluated from the endpoint with the smaller node index so that both
/// triangles sharing an edge compute bit-identical crossings.
inline Point edge_crossing(std::size_t a, Point pa, double va, std::size_t b, Point pb, double vb) {
  if (a > b) {
    std::swap(pa, pb);
    std::swap(va, vb);
  }
  const double t = va / (va - vb);
  return pa + t * (pb - pa);
}

/// Area of {phi < 0} inside a triangle on which phi is linear.
inline double negative_area(const std::array<Point, 3>& p, const std::array<double, 3>& v) {
  std::array<Point, 4> poly;
  int count = 0;
  for (int k = 0; k < 3; ++k) {
    const int l = (k + 1) % 3;
    if (v[k] <= 0.0) poly[count++] = p[k];
    if ((v[k] < 0.0 && v[l] > 0.0) || (v[k] > 0.0 && v[l] < 0.0)) {
      const double t = v[k] / (v[k] - v[l]);
      poly[count++] = p[k] + t * (p[l] - p[k]);
    }
  }
  if (count < 3) return 0.0;
  double area = 0.0;
  for (int k = 1; k + 1 < count; ++k) area += signed_area(poly[0], poly[k], poly[k + 1]);
  return area;
}

}  // namespace serrin
