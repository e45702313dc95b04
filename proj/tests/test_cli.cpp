#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "serrin/cli.hpp"

namespace fs = std::filesystem;
using namespace serrin;

namespace {

struct Run {
  int status = -1;
  std::string output;  // stdout and stderr together
};

Run run(const std::string& args) {
  Run r;
  const std::string cmd = std::string(SERRIN_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("serrin_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UnreachableAlphaFails) {
  const auto r = run("optimize --alpha 5 --grid 32 --out " + out("a"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("alpha unreachable"), std::string::npos) << r.output;
  EXPECT_NE(run("optimize --alpha 0 --grid 32 --out " + out("b")).status, 0);
}

TEST_F(Cli, BadFlagsFail) {
  EXPECT_NE(run("").status, 0);
  EXPECT_NE(run("optimize --grid nope").status, 0);
  EXPECT_NE(run("optimize --perturb 0.9").status, 0);
  EXPECT_NE(run("optimize --alpha 2.5 --grid 32 --vol-tol 0.5 --out " + out("c")).status, 0);
  const auto r = run("verify --n 9 --out " + out("v"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("outside 2..8"), std::string::npos) << r.output;
}

TEST_F(Cli, OptimizeWritesEveryArtifact) {
  const auto r = run("optimize --alpha 2.5 --grid 32 --max-iters 6 --quiet --out " + out("run"));
  ASSERT_EQ(r.status, 0) << r.output;
  for (const char* f : {"history.csv", "levelset.txt", "field.txt", "boundary_gradient.csv", "gamma.csv",
                        "report.json", "overdet_report.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  }
  const auto report = nlohmann::json::parse(slurp(dir_ / "run" / "report.json"));
  for (const char* key : {"alpha", "grid_n", "final_j", "final_volume", "multiplier", "free_boundary_cv", "touches_box"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_EQ(report["alpha"].get<double>(), 2.5);
  EXPECT_EQ(report["grid_n"].get<int>(), 32);
  EXPECT_FALSE(report["touches_box"].get<bool>());
  EXPECT_NEAR(report["final_volume"].get<double>(), 2.5, 2.5e-3);
  EXPECT_EQ(slurp(dir_ / "run" / "history.csv").substr(0, 38), "iter,j,volume,multiplier,step,accepted");
  std::ifstream ls(dir_ / "run" / "levelset.txt");
  EXPECT_EQ(io::read_levelset(ls).box().grid_n(), 32);
}

TEST_F(Cli, IdenticalFlagsGiveIdenticalBytes) {
  const std::string flags = "optimize --alpha 3.5 --grid 32 --max-iters 8 --symmetrize-every 3 --perturb 0.2 --seed 9 --quiet";
  ASSERT_EQ(run(flags + " --out " + out("a")).status, 0);
  ASSERT_EQ(run(flags + " --out " + out("b")).status, 0);
  for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "b" / name)) << name;
  }
  // A different seed changes the run.
  ASSERT_EQ(run("optimize --alpha 3.5 --grid 32 --max-iters 8 --symmetrize-every 3 --perturb 0.2 --seed 10 --quiet --out " +
                out("c"))
                .status,
            0);
  EXPECT_NE(slurp(dir_ / "a" / "history.csv"), slurp(dir_ / "c" / "history.csv"));
}

TEST_F(Cli, WarmStartFromACoarserRun) {
  ASSERT_EQ(run("optimize --alpha 3.5 --grid 32 --max-iters 5 --quiet --out " + out("coarse")).status, 0);
  const auto r = run("optimize --alpha 3.5 --grid 64 --max-iters 3 --quiet --init " + out("coarse") + "/levelset.txt --out " +
                     out("fine"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto report = nlohmann::json::parse(slurp(dir_ / "fine" / "report.json"));
  EXPECT_EQ(report["grid_n"].get<int>(), 64);
  EXPECT_TRUE(report["touches_box"].get<bool>());
  EXPECT_NE(run("optimize --alpha 3.5 --grid 64 --init " + out("missing.txt") + " --out " + out("x")).status, 0);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  {
    std::ofstream cfg(dir_ / "run.ini");
    cfg << "[optimize]\nalpha = 5\ngrid = 32\nmax-iters = 4\n";
  }
  const std::string cfg = (dir_ / "run.ini").string();
  const auto bad = run("--config " + cfg + " optimize --out " + out("x"));
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.output.find("alpha unreachable"), std::string::npos) << bad.output;
  const auto good = run("--config " + cfg + " optimize --alpha 2.5 --quiet --out " + out("y"));
  ASSERT_EQ(good.status, 0) << good.output;
  const auto report = nlohmann::json::parse(slurp(dir_ / "y" / "report.json"));
  EXPECT_EQ(report["grid_n"].get<int>(), 32);
  EXPECT_LE(report["iterations"].get<int>(), 4);
}

TEST_F(Cli, VerifyInteriorAllDimensions) {
  const auto r = run("verify --interior --n 2..8 --out " + out("v"));
  ASSERT_EQ(r.status, 0) << r.output;
  for (int n = 2; n <= 8; ++n) {
    const auto j = nlohmann::json::parse(slurp(dir_ / "v" / ("verify_interior_n" + std::to_string(n) + ".json")));
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_LT(j["max_pde_residual"].get<double>(), 1e-10);
  }
  EXPECT_FALSE(fs::exists(dir_ / "v" / "verify_exterior_n2.json"));
}

TEST_F(Cli, VerifyExterior) {
  auto r = run("verify --exterior --n 4 --out " + out("v"));
  ASSERT_EQ(r.status, 0) << r.output;
  auto j = nlohmann::json::parse(slurp(dir_ / "v" / "verify_exterior_n4.json"));
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_GT(j["f_min_slope"].get<double>(), 0.0);
  r = run("verify --exterior --n 3 --out " + out("v"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("informational"), std::string::npos);
  j = nlohmann::json::parse(slurp(dir_ / "v" / "verify_exterior_n3.json"));
  EXPECT_FALSE(j["f_monotonicity_asserted"].get<bool>());
  EXPECT_TRUE(j["decay_ok"].get<bool>());
}

TEST_F(Cli, BaselineOrderIsTwo) {
  const auto r = run("baseline --alpha 2.5 --grids 32,64,128 --out " + out("b"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto csv = slurp(dir_ / "b" / "baseline.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "grid_n,h,j,j_exact,j_error,grad_exact,grad_max_rel_error,order");
  std::ostringstream log;
  const auto res = cli::run_baseline(2.5, {32, 64, 128}, out("b2"), log);
  ASSERT_EQ(res.levels.size(), 3u);
  for (std::size_t k = 1; k < 3; ++k) EXPECT_NEAR(res.levels[k].order, 2.0, 0.5);
  EXPECT_NEAR(res.grad_exact, 0.4460, 5e-5);
}

TEST_F(Cli, BaselineRejectsBadInput) {
  auto r = run("baseline --alpha 2.5 --grids 64 --out " + out("b"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("at least 3"), std::string::npos) << r.output;
  r = run("baseline --alpha 3.9 --out " + out("b"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("does not fit"), std::string::npos) << r.output;
  EXPECT_EQ(run("baseline --grids 128,64,256 --out " + out("b")).status, 2);
}

TEST(InitialShape, CenteredAndPerturbedStarts) {
  BoxDomain box(1.0, 128);
  const auto disk = cli::initial_shape(box, 2.5);
  EXPECT_NEAR(volume(disk), 2.0, 0.01);
  EXPECT_LE(mirror_asymmetry(disk, Axis::X), 1e-12);
  // Large targets fall back to a rounded square that still fits with a margin.
  const auto big = cli::initial_shape(box, 3.9);
  EXPECT_GE(volume(big), 0.8 * 3.9 - 1e-9);
  EXPECT_NO_THROW(mesh_from_levelset(big));
  const auto a = cli::initial_shape(box, 3.5, 0.2, 7);
  const auto b = cli::initial_shape(box, 3.5, 0.2, 7);
  EXPECT_TRUE(std::ranges::equal(a.values(), b.values()));
  EXPECT_GT(mirror_asymmetry(a, Axis::X), box.h());
  EXPECT_GT(mirror_asymmetry(a, Axis::Y), box.h());
  EXPECT_THROW(cli::initial_shape(box, 4.5), InvalidArgument);
}

TEST(ParseDimensions, Forms) {
  EXPECT_EQ(cli::parse_dimensions("4"), std::vector<int>{4});
  EXPECT_EQ(cli::parse_dimensions("2,3,5"), (std::vector<int>{2, 3, 5}));
  EXPECT_EQ(cli::parse_dimensions("2..8").size(), 7u);
  EXPECT_THROW(cli::parse_dimensions("1..3"), InvalidArgument);
  EXPECT_THROW(cli::parse_dimensions("5..3"), InvalidArgument);
  EXPECT_THROW(cli::parse_dimensions("x"), InvalidArgument);
  EXPECT_THROW(cli::parse_dimensions("2,,3"), InvalidArgument);
}
