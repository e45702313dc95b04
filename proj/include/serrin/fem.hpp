#pragma once

// Piecewise-linear finite elements on body-fitted triangulations of
// Omega = {phi < 0}: the state problem -Lap u = 1, u = 0 on the boundary,
// its Dirichlet energy and the boundary traces of grad u.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "serrin/error.hpp"
#include "serrin/geometry.hpp"
#include "serrin/sparse.hpp"

namespace serrin {

/// FREE edges lie on the free boundary (inside D), BOX edges on the walls of D.
enum class EdgeTag { Free, Box };

inline const char* to_string(EdgeTag tag) { return tag == EdgeTag::Free ? "FREE" : "BOX"; }

struct BoundaryEdge {
  std::array<int, 2> vertices;  // oriented with the domain on the left
  int triangle;                 // the single triangle owning the edge
  EdgeTag tag;
};

struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<BoundaryEdge> boundary_edges;
  double h = 0.0;  // spacing of the grid the mesh was cut from
  double half_width = 0.0;

  double triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
  }
  Point midpoint(const BoundaryEdge& e) const {
    return 0.5 * (vertices[e.vertices[0]] + vertices[e.vertices[1]]);
  }
  double length(const BoundaryEdge& e) const { return norm(vertices[e.vertices[1]] - vertices[e.vertices[0]]); }

  double area() const {
    double total = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) total += triangle_area(t);
    return total;
  }
  double perimeter(EdgeTag tag) const {
    double total = 0.0;
    for (const auto& e : boundary_edges) {
      if (e.tag == tag) total += length(e);
    }
    return total;
  }
  /// Area centroid of the triangulated domain.
  Point centroid() const {
    Point c;
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      const auto& tri = triangles[t];
      const double at = triangle_area(t);
      c = c + (at / 3.0) * (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]);
      a += at;
    }
    return (1.0 / a) * c;
  }
};

namespace detail {

/// Grid nodes closer than snap_fraction * h (along a lattice edge) to a
/// crossing of the zero set.
inline std::vector<char> snapped_nodes(const LevelSetField& phi, double snap_fraction) {
  const BoxDomain& box = phi.box();
  const double limit = snap_fraction * box.h();
  std::vector<char> snap(box.node_count(), 0);
  auto check = [&](std::size_t a, std::size_t b) {
    const double va = phi[a], vb = phi[b];
    if (!((va < 0.0 && vb > 0.0) || (va > 0.0 && vb < 0.0))) return;
    const double len = norm(box.node(b) - box.node(a));
    const double t = va / (va - vb);
    if (t * len < limit) snap[a] = 1;
    if ((1.0 - t) * len < limit) snap[b] = 1;
  };
  for_each_lattice_triangle(box, [&](const std::array<std::size_t, 3>& tri) {
    for (int k = 0; k < 3; ++k) check(tri[k], tri[(k + 1) % 3]);
  });
  return snap;
}

/// Closest point to node (i, j) on the zero set inside its incident lattice triangles.
inline std::optional<Point> closest_interface_point(const LevelSetField& phi, int i, int j) {
  const BoxDomain& box = phi.box();
  const std::size_t k = box.index(i, j);
  const Point p = box.node(i, j);
  std::optional<Point> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int cj = j - 1; cj <= j; ++cj) {
    for (int ci = i - 1; ci <= i; ++ci) {
      if (ci < 0 || cj < 0 || ci >= box.grid_n() || cj >= box.grid_n()) continue;
      for (const auto& tri : cell_triangles(box, ci, cj)) {
        if (tri[0] != k && tri[1] != k && tri[2] != k) continue;
        std::array<Point, 2> pts;
        int count = 0;
        for (int e = 0; e < 3; ++e) {
          const std::size_t a = tri[e], b = tri[(e + 1) % 3];
          if ((phi[a] < 0.0) != (phi[b] < 0.0) && count < 2) {
            pts[count++] = edge_crossing(a, box.node(a), phi[a], b, box.node(b), phi[b]);
          }
        }
        if (count != 2) continue;
        const Point ab = pts[1] - pts[0];
        const double len2 = dot(ab, ab);
        double t = len2 > 0.0 ? dot(p - pts[0], ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const Point q = pts[0] + t * ab;
        const double d = norm(q - p);
        if (d < best_d) {
          best_d = d;
          best = q;
        }
      }
    }
  }
  return best;
}

}  // namespace detail

struct MeshOptions {
  double snap_fraction = 0.1;  // snap grid nodes closer than this * h to a crossing
};

/// Cuts the lattice triangulation along the zero set of phi.
///
/// A grid node lying within snap_fraction * h of a crossing is merged with
/// the interface: interior nodes move to the closest point of the zero set,
/// nodes on the walls of D keep their position and take the value zero.
inline TriMesh mesh_from_levelset(const LevelSetField& phi_in, const MeshOptions& options = {}) {
  const BoxDomain& box = phi_in.box();
  const double h = box.h();

  std::size_t interior_nodes = 0;
  for (double v : phi_in.values()) interior_nodes += v < 0.0 ? 1 : 0;
  if (interior_nodes < 4) {
    throw MeshError("level set region is empty or degenerate (" + std::to_string(interior_nodes) +
                    " interior grid nodes)");
  }

  std::vector<double> values(phi_in.values().begin(), phi_in.values().end());
  std::vector<Point> positions(box.node_count());
  for (std::size_t k = 0; k < positions.size(); ++k) positions[k] = box.node(k);
  const auto snap = detail::snapped_nodes(phi_in, options.snap_fraction);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!snap[k]) continue;
    const int i = box.column_of(k), j = box.row_of(k);
    if (i > 0 && j > 0 && i < box.grid_n() && j < box.grid_n()) {
      if (auto q = detail::closest_interface_point(phi_in, i, j)) positions[k] = *q;
    }
    values[k] = 0.0;
  }

  TriMesh mesh;
  mesh.h = h;
  mesh.half_width = box.half_width();
  std::vector<int> node_vertex(box.node_count(), -1);
  std::unordered_map<std::uint64_t, int> crossing_vertex;

  auto vertex_at_node = [&](std::size_t k) {
    if (node_vertex[k] < 0) {
      node_vertex[k] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(positions[k]);
    }
    return node_vertex[k];
  };
  auto vertex_at_crossing = [&](std::size_t a, std::size_t b) {
    const auto key = edge_key(a, b);
    auto it = crossing_vertex.find(key);
    if (it != crossing_vertex.end()) return it->second;
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(edge_crossing(a, positions[a], values[a], b, positions[b], values[b]));
    crossing_vertex.emplace(key, id);
    return id;
  };
  auto add_triangle = [&](int a, int b, int c) {
    if (signed_area(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]) <= 0.0) {
      throw MeshError("cut produced a degenerate triangle");
    }
    mesh.triangles.push_back({a, b, c});
  };

  for_each_lattice_triangle(box, [&](const std::array<std::size_t, 3>& tri) {
    bool any_negative = false;
    for (std::size_t k : tri) any_negative |= values[k] < 0.0;
    if (!any_negative) return;
    std::array<int, 4> poly;
    int count = 0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t a = tri[k], b = tri[(k + 1) % 3];
      if (values[a] <= 0.0) poly[count++] = vertex_at_node(a);
      if ((values[a] < 0.0 && values[b] > 0.0) || (values[a] > 0.0 && values[b] < 0.0)) {
        poly[count++] = vertex_at_crossing(a, b);
      }
    }
    if (count == 3) {
      add_triangle(poly[0], poly[1], poly[2]);
    } else {
      // Quadrilateral: split along the shorter diagonal.
      const double d02 = norm(mesh.vertices[poly[2]] - mesh.vertices[poly[0]]);
      const double d13 = norm(mesh.vertices[poly[3]] - mesh.vertices[poly[1]]);
      if (d02 <= d13) {
        add_triangle(poly[0], poly[1], poly[2]);
        add_triangle(poly[0], poly[2], poly[3]);
      } else {
        add_triangle(poly[1], poly[2], poly[3]);
        add_triangle(poly[1], poly[3], poly[0]);
      }
    }
  });

  // Edges seen once are boundary edges; keep the orientation of their owner.
  struct EdgeUse {
    int count = 0;
    int triangle = -1;
    int from = -1, to = -1;
  };
  std::unordered_map<std::uint64_t, EdgeUse> uses;
  uses.reserve(mesh.triangles.size() * 3);
  std::vector<std::uint64_t> order;
  order.reserve(mesh.triangles.size() * 3);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      const auto key = edge_key(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      auto [it, inserted] = uses.try_emplace(key);
      if (inserted) order.push_back(key);
      auto& use = it->second;
      ++use.count;
      use.triangle = static_cast<int>(t);
      use.from = a;
      use.to = b;
    }
  }
  const double tol_box = 0.1 * h;
  for (const auto key : order) {
    const auto& use = uses.at(key);
    if (use.count != 1) continue;
    const bool on_wall = box.distance_to_boundary(mesh.vertices[use.from]) <= tol_box &&
                         box.distance_to_boundary(mesh.vertices[use.to]) <= tol_box;
    mesh.boundary_edges.push_back({{use.from, use.to}, use.triangle, on_wall ? EdgeTag::Box : EdgeTag::Free});
  }
  return mesh;
}

/// Piecewise-linear function on a mesh, one value per vertex.
struct ScalarField {
  std::shared_ptr<const TriMesh> mesh;
  std::vector<double> nodal_values;

  /// Constant gradient on triangle t.
  Point gradient(std::size_t t) const {
    const auto& tri = mesh->triangles[t];
    const Point p0 = mesh->vertices[tri[0]], p1 = mesh->vertices[tri[1]], p2 = mesh->vertices[tri[2]];
    const double u0 = nodal_values[tri[0]], u1 = nodal_values[tri[1]], u2 = nodal_values[tri[2]];
    const double twice_area = cross(p1 - p0, p2 - p0);
    // grad u = sum_k u_k * rot90(opposite edge) / (2A)
    const Point e0 = p2 - p1, e1 = p0 - p2, e2 = p1 - p0;
    return {(u0 * -e0.y + u1 * -e1.y + u2 * -e2.y) / twice_area,
            (u0 * e0.x + u1 * e1.x + u2 * e2.x) / twice_area};
  }
};

/// Marks vertices lying on a boundary edge.
inline std::vector<char> boundary_vertices(const TriMesh& mesh) {
  std::vector<char> on_boundary(mesh.vertices.size(), 0);
  for (const auto& e : mesh.boundary_edges) {
    on_boundary[e.vertices[0]] = 1;
    on_boundary[e.vertices[1]] = 1;
  }
  return on_boundary;
}

struct PoissonOptions {
  double relative_tolerance = 1e-10;
};

/// Galerkin solution of -Lap u = 1 with u = 0 on every boundary vertex.
inline ScalarField solve_poisson(std::shared_ptr<const TriMesh> mesh, const PoissonOptions& options = {}) {
  const auto on_boundary = boundary_vertices(*mesh);
  std::vector<int> unknown(mesh->vertices.size(), -1);
  std::size_t n = 0;
  for (std::size_t v = 0; v < unknown.size(); ++v) {
    if (!on_boundary[v]) unknown[v] = static_cast<int>(n++);
  }
  ScalarField u{mesh, std::vector<double>(mesh->vertices.size(), 0.0)};
  if (n == 0) return u;

  std::vector<Triplet> entries;
  entries.reserve(mesh->triangles.size() * 9);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t t = 0; t < mesh->triangles.size(); ++t) {
    const auto& tri = mesh->triangles[t];
    const std::array<Point, 3> p{mesh->vertices[tri[0]], mesh->vertices[tri[1]], mesh->vertices[tri[2]]};
    const double area = signed_area(p[0], p[1], p[2]);
    std::array<Point, 3> g;  // barycentric gradients times 2A
    for (int k = 0; k < 3; ++k) {
      const Point e = p[(k + 2) % 3] - p[(k + 1) % 3];
      g[k] = {-e.y, e.x};
    }
    for (int a = 0; a < 3; ++a) {
      const int ia = unknown[tri[a]];
      if (ia < 0) continue;
      rhs[ia] += area / 3.0;
      for (int b = 0; b < 3; ++b) {
        const int ib = unknown[tri[b]];
        if (ib < 0) continue;
        entries.push_back({static_cast<std::size_t>(ia), static_cast<std::size_t>(ib),
                           dot(g[a], g[b]) / (4.0 * area)});
      }
    }
  }
  const auto stiffness = CsrMatrix::from_triplets(n, std::move(entries));
  std::vector<double> x(n, 0.0);
  try {
    conjugate_gradient(stiffness, rhs, x, {options.relative_tolerance, 0});
  } catch (const SolverError& e) {
    throw SolverError(std::string("state problem: ") + e.what());
  }
  for (std::size_t v = 0; v < unknown.size(); ++v) {
    if (unknown[v] >= 0) u.nodal_values[v] = x[static_cast<std::size_t>(unknown[v])];
  }
  return u;
}

inline ScalarField solve_poisson(const TriMesh& mesh, const PoissonOptions& options = {}) {
  return solve_poisson(std::make_shared<const TriMesh>(mesh), options);
}

struct EnergyValue {
  double j = 0.0;           // integral of |grad u|^2 / 2 - u
  double compliance = 0.0;  // integral of u
};

/// Exact integrals of piecewise-linear data over the mesh.
inline EnergyValue dirichlet_energy(const ScalarField& u) {
  EnergyValue e;
  double gradient_term = 0.0;
  const TriMesh& mesh = *u.mesh;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.triangle_area(t);
    const Point g = u.gradient(t);
    gradient_term += 0.5 * area * dot(g, g);
    e.compliance += area * (u.nodal_values[tri[0]] + u.nodal_values[tri[1]] + u.nodal_values[tri[2]]) / 3.0;
  }
  e.j = gradient_term - e.compliance;
  return e;
}

struct BoundarySample {
  Point midpoint;
  double grad = 0.0;  // |grad u| on the owning triangle
  double length = 0.0;
  EdgeTag tag = EdgeTag::Free;
  int edge = -1;  // index into TriMesh::boundary_edges
  // False when every vertex of the owning triangle carries Dirichlet data, so
  // the element gradient says nothing about the trace (slivers along the walls).
  bool supported = true;
};

/// |grad u| at each boundary edge, taken from the owning triangle.
inline std::vector<BoundarySample> boundary_gradient(const ScalarField& u) {
  const TriMesh& mesh = *u.mesh;
  const auto on_boundary = boundary_vertices(mesh);
  std::vector<BoundarySample> out;
  out.reserve(mesh.boundary_edges.size());
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& e = mesh.boundary_edges[k];
    const auto& tri = mesh.triangles[static_cast<std::size_t>(e.triangle)];
    const bool supported = !on_boundary[tri[0]] || !on_boundary[tri[1]] || !on_boundary[tri[2]];
    out.push_back({mesh.midpoint(e), norm(u.gradient(static_cast<std::size_t>(e.triangle))), mesh.length(e),
                   e.tag, static_cast<int>(k), supported});
  }
  return out;
}

/// Convenience: mesh, solve and evaluate in one go.
struct StateSolution {
  std::shared_ptr<const TriMesh> mesh;
  ScalarField u;
  EnergyValue energy;
};

inline StateSolution solve_state(const LevelSetField& phi, const MeshOptions& options = {}) {
  auto mesh = std::make_shared<const TriMesh>(mesh_from_levelset(phi, options));
  ScalarField u = solve_poisson(mesh);
  const EnergyValue energy = dirichlet_energy(u);
  return {std::move(mesh), std::move(u), energy};
}

}  // namespace serrin
