// serrin: shape optimization runs, closed-form verification and the disk
// baseline from the command line.
//
// Exit status: 0 when the command ran and every checked metric passed,
// 1 when a metric failed, 2 on bad input or a module failure.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "serrin/cli.hpp"

namespace {

std::vector<int> parse_grids(const std::string& text) {
  std::vector<int> grids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw serrin::InvalidArgument("bad grid list '" + text + "'");
    grids.push_back(v);
  }
  return grids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially overdetermined torsion problems: optimize, verify, baseline"};
  app.set_config("--config", "", "key = value file; command line flags take precedence");
  app.require_subcommand(1);

  serrin::cli::OptimizeOptions opt;
  opt.optimizer.grid_n = 128;
  auto* optimize = app.add_subcommand("optimize", "minimize J over domains of area alpha inside (-1,1)^2");
  optimize->add_option("--alpha", opt.optimizer.alpha, "target area")->capture_default_str();
  optimize->add_option("--grid", opt.optimizer.grid_n, "cells per axis")->capture_default_str();
  optimize->add_option("--out", opt.out, "output directory")->capture_default_str();
  optimize->add_option("--seed", opt.seed, "seed of the initial-shape perturbation")->capture_default_str();
  optimize->add_option("--perturb", opt.perturb, "relative wobble of the initial disk (0 = centered disk)")
      ->check(CLI::Range(0.0, 0.5))
      ->capture_default_str();
  optimize->add_option("--init", opt.init, "start from this levelset file (e.g. a coarser run) instead")
      ->check(CLI::ExistingFile);
  optimize->add_option("--max-iters", opt.optimizer.max_iters)->capture_default_str();
  optimize->add_option("--symmetrize-every", opt.optimizer.symmetrize_every, "0 = never")->capture_default_str();
  optimize->add_option("--step0", opt.optimizer.step0)->capture_default_str();
  optimize->add_option("--vol-tol", opt.optimizer.vol_tol)->capture_default_str();
  optimize->add_option("--stop-tol", opt.optimizer.stop_tol)->capture_default_str();
  optimize->add_option("--smoothing", opt.optimizer.smoothing, "velocity smoothing width in cells")
      ->capture_default_str();
  bool quiet = false;
  optimize->add_flag("--quiet", quiet, "no per-iteration log");

  serrin::cli::VerifyOptions ver;
  bool interior = false, exterior = false;
  std::string dims = "2..8";
  auto* verify = app.add_subcommand("verify", "check the closed-form interior/exterior solutions");
  verify->add_flag("--interior", interior, "interior construction (u = 0, |grad u| = 8 on the sphere)");
  verify->add_flag("--exterior", exterior, "exterior construction (u = 1, |grad u| = 1/2 on the sphere)");
  verify->add_option("--n", dims, "dimensions: 4, 2,3,5 or 2..8")->capture_default_str();
  verify->add_option("--out", ver.out, "output directory")->capture_default_str();

  double base_alpha = 2.5;
  std::string grids = "64,128,256";
  std::string base_out = ".";
  auto* baseline = app.add_subcommand("baseline", "FEM disk energy against the closed form under refinement");
  baseline->add_option("--alpha", base_alpha, "disk area")->capture_default_str();
  baseline->add_option("--grids", grids, "comma-separated, increasing, at least 3")->capture_default_str();
  baseline->add_option("--out", base_out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*optimize) {
      std::ostringstream sink;
      auto o = serrin::cli::run_optimize(opt, quiet ? sink : std::cerr);
      const double final_volume = serrin::volume(o.state.phi);
      const bool volume_ok = std::abs(final_volume - opt.optimizer.alpha) <= opt.optimizer.vol_tol * opt.optimizer.alpha;
      std::cout << "final_j=" << serrin::io::fmt17(o.state.solution.energy.j)
                << " volume=" << serrin::io::fmt17(final_volume) << " multiplier=" << serrin::io::fmt17(o.state.multiplier)
                << " cv=" << serrin::io::fmt17(o.overdet.cv) << " touches_box=" << (o.overdet.touches_box ? "true" : "false")
                << " stop=" << serrin::to_string(o.state.stop) << '\n';
      return volume_ok ? 0 : 1;
    }
    if (*verify) {
      ver.interior = interior || !exterior;
      ver.exterior = exterior || !interior;
      ver.dims = serrin::cli::parse_dimensions(dims);
      const auto reports = serrin::cli::run_verify(ver, std::cout);
      for (const auto& r : reports) {
        if (!r.passed) return 1;
      }
      return 0;
    }
    if (*baseline) {
      const auto res = serrin::cli::run_baseline(base_alpha, parse_grids(grids), base_out, std::cout);
      if (!res.orders_ok()) {
        std::cout << "observed order outside [1.5, 2.5]\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
