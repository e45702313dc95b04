#pragma once

// The three batch commands behind tools/serrin: optimize, verify, baseline.
// Argument parsing lives in the tool; everything here takes plain structs so
// the commands can be driven from tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "serrin/fem.hpp"
#include "serrin/geometry.hpp"
#include "serrin/io.hpp"
#include "serrin/overdet.hpp"
#include "serrin/radial.hpp"
#include "serrin/shapeopt.hpp"

namespace serrin::cli {

inline void prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create output directory " + dir);
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// ---- optimize -------------------------------------------------------------------

struct OptimizeOptions {
  OptimizerConfig optimizer;
  std::string out = ".";
  std::uint64_t seed = 0;
  double perturb = 0.0;  // relative amplitude of the random boundary wobble of the initial disk
  std::string init;      // optional levelset file to start from, resampled onto the grid
};

/// Centered starting shape for a volume target alpha, aiming at area
/// max(0.8 alpha, alpha - 0.5) and staying two cells inside D: a disk when
/// that is large enough, else a square with corners rounded at radius 1/2.
/// With perturb > 0 the disk radius is modulated by random Fourier modes 1..4
/// drawn from seed, which breaks both mirror symmetries, and the result is
/// shifted back to the target area.
inline LevelSetField initial_shape(const BoxDomain& box, double alpha, double perturb = 0.0, std::uint64_t seed = 0) {
  if (!(alpha > 0.0) || alpha > box.area()) {
    throw InvalidArgument("alpha unreachable: alpha = " + io::fmt17(alpha) + " must lie in (0, " +
                          io::fmt17(box.area()) + "]");
  }
  const double target = std::max(0.8 * alpha, alpha - 0.5);
  const double r_fit = box.half_width() - 2.0 * box.h();
  const double radius = std::min(radius_for_area(target), r_fit);
  if (perturb == 0.0 && std::numbers::pi * radius * radius < 0.8 * alpha) {
    constexpr double corner = 0.5;
    const double half_side = std::min(std::sqrt((target + (4.0 - std::numbers::pi) * corner * corner) / 4.0), r_fit);
    return LevelSetField::sample(box, [&](Point p) {
      const double qx = std::abs(p.x) - (half_side - corner);
      const double qy = std::abs(p.y) - (half_side - corner);
      return std::hypot(std::max(qx, 0.0), std::max(qy, 0.0)) + std::min(std::max(qx, qy), 0.0) - corner;
    });
  }
  if (perturb == 0.0) return disk_levelset(box, radius);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
  std::vector<std::array<double, 2>> modes;
  for (int k = 1; k <= 4; ++k) modes.push_back({coeff(rng), phase(rng)});
  const auto wobbly = LevelSetField::sample(box, [&](Point p) {
    const double theta = std::atan2(p.y, p.x);
    double wobble = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      wobble += modes[k][0] * std::cos(static_cast<double>(k + 1) * theta + modes[k][1]);
    }
    return norm(p) - radius_for_area(target) * (1.0 + perturb * wobble / 4.0);
  });
  // The wobble may push past the walls, where D clips it; shift back to the target area.
  return volume_projection(wobbly, target, 1e-6).field;
}

struct OptimizeOutcome {
  OptimizerState state;
  OverdetReport overdet;
  FreeBoundary free_boundary;
};

inline nlohmann::ordered_json run_report(const OptimizerConfig& config, const OptimizeOutcome& o) {
  nlohmann::ordered_json j;
  j["alpha"] = config.alpha;
  j["grid_n"] = config.grid_n;
  j["final_j"] = o.state.solution.energy.j;
  j["final_volume"] = volume(o.state.phi);
  j["multiplier"] = o.state.multiplier;
  j["free_boundary_cv"] = o.overdet.cv;
  j["touches_box"] = o.overdet.touches_box;
  j["iterations"] = o.state.history.empty() ? 0 : o.state.history.back().iter;
  j["stop_reason"] = to_string(o.state.stop);
  return j;
}

/// Runs the optimizer from initial_shape (or from opts.init) and writes history.csv,
/// levelset.txt, field.txt, boundary_gradient.csv, gamma.csv, report.json
/// and overdet_report.json into opts.out.
inline OptimizeOutcome run_optimize(const OptimizeOptions& opts, std::ostream& log) {
  const OptimizerConfig& config = opts.optimizer;
  config.validate();
  const BoxDomain box(1.0, config.grid_n);
  const LevelSetField init = [&] {
    if (opts.init.empty()) return initial_shape(box, config.alpha, opts.perturb, opts.seed);
    std::ifstream is(opts.init);
    if (!is) throw InvalidArgument("cannot open initial levelset " + opts.init);
    return resample(io::read_levelset(is), box);
  }();
  prepare_output_dir(opts.out);

  OptimizeOutcome o{optimize(config, init,
                             [&](const IterationRecord& r) {
                               log << r.iter << ' ' << to_string(r.kind) << " j=" << io::fmt17(r.j)
                                   << " volume=" << io::fmt17(r.volume) << (r.accepted ? "" : " rejected") << '\n';
                             }),
                    {},
                    {}};
  const auto& sol = o.state.solution;
  o.free_boundary = extract_free_boundary(*sol.mesh, sol.u);
  o.overdet = overdet_report(o.free_boundary, *sol.mesh);

  io::write_file(join(opts.out, "history.csv"), [&](std::ostream& os) { io::write_history_csv(os, o.state.history); });
  io::write_file(join(opts.out, "levelset.txt"), [&](std::ostream& os) { io::write_levelset(os, o.state.phi); });
  io::write_file(join(opts.out, "field.txt"), [&](std::ostream& os) { io::write_field(os, sol.u); });
  io::write_file(join(opts.out, "boundary_gradient.csv"),
                 [&](std::ostream& os) { io::write_boundary_gradient_csv(os, boundary_gradient(sol.u)); });
  io::write_file(join(opts.out, "gamma.csv"), [&](std::ostream& os) { io::write_gamma_csv(os, o.free_boundary); });
  io::write_json(join(opts.out, "report.json"), run_report(config, o));
  io::write_json(join(opts.out, "overdet_report.json"), io::to_json(o.overdet));
  return o;
}

// ---- verify ---------------------------------------------------------------------

/// Parses "4", "2,3,5" or "2..8" into dimensions, each within 2..8.
inline std::vector<int> parse_dimensions(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw InvalidArgument("bad dimension list '" + text + "'");
    return v;
  };
  std::vector<int> dims;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = to_int(text.substr(0, dots));
    const int hi = to_int(text.substr(dots + 2));
    if (hi < lo) throw InvalidArgument("empty dimension range '" + text + "'");
    for (int n = lo; n <= hi; ++n) dims.push_back(n);
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      dims.push_back(to_int(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  for (int n : dims) {
    if (n < 2 || n > 8) throw InvalidArgument("dimension " + std::to_string(n) + " outside 2..8");
  }
  return dims;
}

struct VerifyOptions {
  bool interior = true;
  bool exterior = true;
  std::vector<int> dims{2, 3, 4, 5, 6, 7, 8};
  std::string out = ".";
};

/// Writes verify_<theorem>_n<k>.json per case; returns the reports.
inline std::vector<radial::VerificationReport> run_verify(const VerifyOptions& opts, std::ostream& log) {
  if (!opts.interior && !opts.exterior) throw InvalidArgument("nothing to verify: pick --interior and/or --exterior");
  prepare_output_dir(opts.out);
  std::vector<radial::VerificationReport> reports;
  for (int n : opts.dims) {
    if (opts.interior) reports.push_back(radial::verify_interior(n));
    if (opts.exterior) reports.push_back(radial::verify_exterior(n));
  }
  for (const auto& r : reports) {
    io::write_json(join(opts.out, "verify_" + r.theorem + "_n" + std::to_string(r.n) + ".json"), io::to_json(r));
    log << r.theorem << " n=" << r.n << " residual=" << io::fmt17(r.max_pde_residual)
        << " f_min_slope=" << io::fmt17(r.f_min_slope) << (r.f_monotonicity_asserted ? "" : " (informational)")
        << (r.passed ? " PASS" : " FAIL") << '\n';
  }
  return reports;
}

// ---- baseline -------------------------------------------------------------------

struct BaselineLevel {
  int grid_n = 0;
  double h = 0.0;
  double j = 0.0;
  double j_error = 0.0;        // |J - J_exact|
  double grad_max_error = 0.0;  // max relative deviation of |grad u| on the boundary
  double order = 0.0;           // observed order against the previous level (0 for the first)
};

struct BaselineResult {
  double alpha = 0.0;
  double radius = 0.0;
  double j_exact = 0.0;
  double grad_exact = 0.0;
  std::vector<BaselineLevel> levels;

  bool orders_ok(double lo = 1.5, double hi = 2.5) const {
    for (std::size_t k = 1; k < levels.size(); ++k) {
      if (!(levels[k].order >= lo && levels[k].order <= hi)) return false;
    }
    return true;
  }
};

/// FEM energy of the centered disk of area alpha against the closed-form
/// torsion function, on each grid, with observed convergence orders of J.
inline BaselineResult run_baseline(double alpha, const std::vector<int>& grids, const std::string& out,
                                   std::ostream& log) {
  if (grids.size() < 3) throw InvalidArgument("baseline needs at least 3 grid levels, got " + std::to_string(grids.size()));
  for (std::size_t k = 1; k < grids.size(); ++k) {
    if (grids[k] <= grids[k - 1]) throw InvalidArgument("baseline grids must be increasing");
  }
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  BaselineResult res;
  res.alpha = alpha;
  res.radius = radius_for_area(alpha);
  if (!(res.radius < 1.0)) {
    throw InvalidArgument("a disk of area " + io::fmt17(alpha) + " has radius " + io::fmt17(res.radius) +
                          " and does not fit in D");
  }
  const auto ball = radial::ball_baseline<double>(2, res.radius);
  res.j_exact = -std::numbers::pi * std::pow(res.radius, 4) / 16.0;  // -1/2 of the integral of u
  res.grad_exact = ball.normal_derivative;

  for (int n : grids) {
    const BoxDomain box(1.0, n);
    const StateSolution sol = solve_state(disk_levelset(box, res.radius));
    BaselineLevel lvl{n, box.h(), sol.energy.j, std::abs(sol.energy.j - res.j_exact), 0.0, 0.0};
    for (const auto& s : boundary_gradient(sol.u)) {
      if (s.tag == EdgeTag::Free && s.supported) {
        lvl.grad_max_error = std::max(lvl.grad_max_error, std::abs(s.grad - res.grad_exact) / res.grad_exact);
      }
    }
    if (!res.levels.empty()) {
      const auto& prev = res.levels.back();
      lvl.order = std::log(prev.j_error / lvl.j_error) / std::log(prev.h / lvl.h);
    }
    res.levels.push_back(lvl);
    log << "grid " << n << " j=" << io::fmt17(lvl.j) << " error=" << io::fmt17(lvl.j_error)
        << " order=" << io::fmt17(lvl.order) << '\n';
  }

  prepare_output_dir(out);
  io::write_file(join(out, "baseline.csv"), [&](std::ostream& os) {
    os << "grid_n,h,j,j_exact,j_error,grad_exact,grad_max_rel_error,order\n";
    for (const auto& l : res.levels) {
      os << l.grid_n << ',' << io::fmt17(l.h) << ',' << io::fmt17(l.j) << ',' << io::fmt17(res.j_exact) << ','
         << io::fmt17(l.j_error) << ',' << io::fmt17(res.grad_exact) << ',' << io::fmt17(l.grad_max_error) << ','
         << io::fmt17(l.order) << '\n';
    }
  });
  return res;
}

}  // namespace serrin::cli
