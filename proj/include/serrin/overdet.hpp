#pragma once

// The free boundary Gamma = dOmega ∩ D of a computed domain and the
// statistics certifying the overdetermined condition |grad u| = const on it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <vector>

#include "serrin/fem.hpp"

namespace serrin {

struct FreeSample {
  Point midpoint;
  double grad = 0.0;
  double length = 0.0;
  int edge = -1;
};

/// A maximal connected run of FREE edges, in boundary order.
struct FreeChain {
  std::vector<FreeSample> samples;
  bool closed = false;
};

struct FreeBoundary {
  std::vector<FreeChain> chains;
  std::vector<Point> junctions;  // vertices shared by a FREE and a BOX edge
  double h = 0.0;

  std::size_t sample_count() const {
    std::size_t n = 0;
    for (const auto& c : chains) n += c.samples.size();
    return n;
  }
};

/// Groups the FREE edges of the mesh into chains and attaches |grad u|.
inline FreeBoundary extract_free_boundary(const TriMesh& mesh, const ScalarField& u) {
  FreeBoundary fb;
  fb.h = mesh.h;
  const auto samples = boundary_gradient(u);
  const std::size_t nv = mesh.vertices.size();

  // Each oriented boundary edge starts at one vertex; chains follow that orientation.
  std::vector<std::vector<int>> outgoing(nv), incoming(nv);
  std::vector<char> touches_free(nv, 0), touches_box(nv, 0);
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& e = mesh.boundary_edges[k];
    auto& mark = e.tag == EdgeTag::Free ? touches_free : touches_box;
    mark[e.vertices[0]] = mark[e.vertices[1]] = 1;
    if (e.tag != EdgeTag::Free) continue;
    outgoing[e.vertices[0]].push_back(static_cast<int>(k));
    incoming[e.vertices[1]].push_back(static_cast<int>(k));
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (touches_free[v] && touches_box[v]) fb.junctions.push_back(mesh.vertices[v]);
  }

  std::vector<char> used(mesh.boundary_edges.size(), 0);
  auto to_sample = [&](int k) {
    const auto& s = samples[static_cast<std::size_t>(k)];
    return FreeSample{s.midpoint, s.grad, s.length, k};
  };
  auto walk = [&](int first) {
    FreeChain chain;
    int k = first;
    while (k >= 0 && !used[k]) {
      used[k] = 1;
      chain.samples.push_back(to_sample(k));
      const int head = mesh.boundary_edges[k].vertices[1];
      k = outgoing[head].size() == 1 ? outgoing[head][0] : -1;
    }
    chain.closed = k == first;
    return chain;
  };

  // Open chains start where no single FREE edge comes in.
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& e = mesh.boundary_edges[k];
    if (e.tag != EdgeTag::Free || used[k]) continue;
    const int tail = e.vertices[0];
    if (incoming[tail].size() == 1 && outgoing[tail].size() == 1) continue;
    fb.chains.push_back(walk(static_cast<int>(k)));
  }
  // What remains are closed loops.
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    if (mesh.boundary_edges[k].tag != EdgeTag::Free || used[k]) continue;
    fb.chains.push_back(walk(static_cast<int>(k)));
  }
  return fb;
}

struct OverdetReport {
  double lambda_hat = 0.0;     // mean |grad u| on Gamma
  bool lambda_defined = false;  // false when Gamma is empty
  double cv = 0.0;             // coefficient of variation of |grad u| away from junctions
  std::size_t cv_samples = 0;
  std::size_t n_components = 0;
  bool touches_box = false;
  double disk_deviation = 0.0;  // relative RMS deviation of the boundary radius
  double free_length = 0.0;
};

/// Relative RMS deviation of |x - c| over the whole boundary of the mesh,
/// weighted by edge length, where c is the area centroid.
inline double disk_deviation(const TriMesh& mesh) {
  const Point c = mesh.centroid();
  double length = 0.0, mean = 0.0;
  for (const auto& e : mesh.boundary_edges) {
    const double l = mesh.length(e);
    length += l;
    mean += l * norm(mesh.midpoint(e) - c);
  }
  mean /= length;
  double var = 0.0;
  for (const auto& e : mesh.boundary_edges) {
    const double d = norm(mesh.midpoint(e) - c) - mean;
    var += mesh.length(e) * d * d;
  }
  return std::sqrt(var / length) / mean;
}

/// Constancy statistics of |grad u| on Gamma. Samples within
/// junction_exclusion * h of a FREE/BOX junction are left out of cv.
inline OverdetReport overdet_report(const FreeBoundary& fb, const TriMesh& mesh, double junction_exclusion = 2.0) {
  OverdetReport r;
  r.n_components = fb.chains.size();
  r.touches_box = std::any_of(mesh.boundary_edges.begin(), mesh.boundary_edges.end(),
                              [](const BoundaryEdge& e) { return e.tag == EdgeTag::Box; });
  r.disk_deviation = disk_deviation(mesh);
  if (fb.sample_count() == 0) return r;

  const double radius = junction_exclusion * fb.h;
  auto near_junction = [&](Point p) {
    return std::any_of(fb.junctions.begin(), fb.junctions.end(),
                       [&](Point j) { return norm(p - j) < radius; });
  };
  double all_len = 0.0, all_sum = 0.0;
  double len = 0.0, sum = 0.0, sum2 = 0.0;
  for (const auto& chain : fb.chains) {
    for (const auto& s : chain.samples) {
      all_len += s.length;
      all_sum += s.length * s.grad;
      if (near_junction(s.midpoint)) continue;
      len += s.length;
      sum += s.length * s.grad;
      sum2 += s.length * s.grad * s.grad;
      ++r.cv_samples;
    }
  }
  r.free_length = all_len;
  r.lambda_hat = all_sum / all_len;
  r.lambda_defined = true;
  if (len > 0.0) {
    const double mean = sum / len;
    const double var = std::max(0.0, sum2 / len - mean * mean);
    r.cv = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
  }
  return r;
}

}  // namespace serrin
