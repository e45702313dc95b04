#pragma once

// Plain-text dumps and CSV/JSON reports. Every real is written with 17
// significant digits so that files round-trip bit-exactly.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "serrin/fem.hpp"
#include "serrin/geometry.hpp"
#include "serrin/overdet.hpp"
#include "serrin/radial.hpp"
#include "serrin/shapeopt.hpp"

namespace serrin::io {

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- level sets -------------------------------------------------------------

inline void write_levelset(std::ostream& os, const LevelSetField& phi) {
  const BoxDomain& box = phi.box();
  os << "levelset v1 " << box.grid_n() << ' ' << fmt17(box.half_width()) << '\n';
  const int m = box.nodes_per_axis();
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (i) os << ' ';
      os << fmt17(phi(i, j));
    }
    os << '\n';
  }
}

inline LevelSetField read_levelset(std::istream& is) {
  std::string magic, version;
  int grid_n = 0;
  double half_width = 0.0;
  if (!(is >> magic >> version >> grid_n >> half_width) || magic != "levelset" || version != "v1") {
    throw InvalidArgument("not a 'levelset v1' file");
  }
  BoxDomain box(half_width, grid_n);
  std::vector<double> values(box.node_count());
  std::string token;
  for (auto& v : values) {
    if (!(is >> token)) throw InvalidArgument("levelset file truncated");
    // from_chars, unlike stod, accepts subnormals.
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidArgument("bad levelset value '" + token + "'");
  }
  if (is >> token) throw InvalidArgument("trailing data after levelset grid");
  return LevelSetField(box, std::move(values));
}

// ---- mesh + field -----------------------------------------------------------

inline void write_field(std::ostream& os, const ScalarField& u) {
  const TriMesh& mesh = *u.mesh;
  os << "field v1 " << mesh.vertices.size() << ' ' << mesh.triangles.size() << '\n';
  for (std::size_t k = 0; k < mesh.vertices.size(); ++k) {
    os << fmt17(mesh.vertices[k].x) << ' ' << fmt17(mesh.vertices[k].y) << ' ' << fmt17(u.nodal_values[k]) << '\n';
  }
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges) {
    os << e.vertices[0] << ' ' << e.vertices[1] << ' ' << to_string(e.tag) << '\n';
  }
}

/// Contents of a field dump. The dump has no grid metadata, so this is a
/// plain record rather than a TriMesh.
struct FieldDump {
  std::vector<Point> vertices;
  std::vector<double> values;
  std::vector<std::array<std::size_t, 3>> triangles;
  struct Edge {
    std::size_t a = 0, b = 0;
    EdgeTag tag = EdgeTag::Free;
  };
  std::vector<Edge> boundary;
};

inline FieldDump read_field(std::istream& is) {
  std::string magic, version;
  std::size_t nv = 0, nt = 0;
  if (!(is >> magic >> version >> nv >> nt) || magic != "field" || version != "v1") {
    throw InvalidArgument("not a 'field v1' file");
  }
  FieldDump d;
  d.vertices.resize(nv);
  d.values.resize(nv);
  d.triangles.resize(nt);
  for (std::size_t k = 0; k < nv; ++k) {
    if (!(is >> d.vertices[k].x >> d.vertices[k].y >> d.values[k])) throw InvalidArgument("field file truncated");
  }
  for (auto& t : d.triangles) {
    if (!(is >> t[0] >> t[1] >> t[2])) throw InvalidArgument("field file truncated");
    if (t[0] >= nv || t[1] >= nv || t[2] >= nv) throw InvalidArgument("triangle references a missing vertex");
  }
  FieldDump::Edge e;
  std::string tag;
  while (is >> e.a >> e.b >> tag) {
    if (tag == "FREE") {
      e.tag = EdgeTag::Free;
    } else if (tag == "BOX") {
      e.tag = EdgeTag::Box;
    } else {
      throw InvalidArgument("unknown boundary tag '" + tag + "'");
    }
    d.boundary.push_back(e);
  }
  if (!is.eof()) throw InvalidArgument("malformed boundary line in field file");
  return d;
}

// ---- CSV ----------------------------------------------------------------------

inline void write_boundary_gradient_csv(std::ostream& os, const std::vector<BoundarySample>& samples) {
  os << "x,y,grad,tag\n";
  for (const auto& s : samples) {
    os << fmt17(s.midpoint.x) << ',' << fmt17(s.midpoint.y) << ',' << fmt17(s.grad) << ',' << to_string(s.tag)
       << '\n';
  }
}

inline void write_gamma_csv(std::ostream& os, const FreeBoundary& fb) {
  os << "chain,x,y,grad\n";
  for (std::size_t c = 0; c < fb.chains.size(); ++c) {
    for (const auto& s : fb.chains[c].samples) {
      os << c << ',' << fmt17(s.midpoint.x) << ',' << fmt17(s.midpoint.y) << ',' << fmt17(s.grad) << '\n';
    }
  }
}

inline void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history) {
  os << "iter,j,volume,multiplier,step,accepted\n";
  for (const auto& r : history) {
    os << r.iter << ',' << fmt17(r.j) << ',' << fmt17(r.volume) << ',' << fmt17(r.multiplier) << ','
       << fmt17(r.step) << ',' << (r.accepted ? 1 : 0) << '\n';
  }
}

// ---- JSON ---------------------------------------------------------------------
// nlohmann::json prints doubles in shortest round-trip form, which is at most
// 17 significant digits and parses back to the same bits.

inline nlohmann::ordered_json to_json(const OverdetReport& r) {
  nlohmann::ordered_json j;
  j["lambda_hat"] = r.lambda_defined ? nlohmann::ordered_json(r.lambda_hat) : nlohmann::ordered_json(nullptr);
  j["cv"] = r.cv;
  j["cv_samples"] = r.cv_samples;
  j["n_components"] = r.n_components;
  j["touches_box"] = r.touches_box;
  j["disk_deviation"] = r.disk_deviation;
  j["free_length"] = r.free_length;
  return j;
}

inline nlohmann::ordered_json to_json(const radial::VerificationReport& r) {
  nlohmann::ordered_json j;
  j["theorem"] = r.theorem;
  j["n"] = r.n;
  j["max_pde_residual"] = r.max_pde_residual;
  j["breakpoint_gaps"] = nlohmann::ordered_json::array();
  for (const auto& g : r.breakpoint_gaps) j["breakpoint_gaps"].push_back({g[0], g[1], g[2]});
  j["branch_gap"] = r.branch_gap;
  j["eikonal_max_error"] = r.eikonal_max_error;
  j["f_min_slope"] = r.f_min_slope;
  j["f_lipschitz_bound"] = r.f_lipschitz_bound;
  j["f_positive"] = r.f_positive;
  j["f_monotonicity_asserted"] = r.f_monotonicity_asserted;
  j["decay_ok"] = r.decay_ok ? nlohmann::ordered_json(*r.decay_ok) : nlohmann::ordered_json(nullptr);
  j["sphere_data_ok"] = r.sphere_data_ok;
  j["passed"] = r.passed;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw Error("failed writing " + path);
}

template <class Writer>
void write_file(const std::string& path, Writer&& w) {
  std::ostringstream os;
  w(os);
  write_text(path, os.str());
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace serrin::io
