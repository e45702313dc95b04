#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "serrin/overdet.hpp"

using namespace serrin;

namespace {

struct Solved {
  StateSolution sol;
  FreeBoundary fb;
  OverdetReport report;
};

Solved solve_and_report(const LevelSetField& phi) {
  auto sol = solve_state(phi);
  auto fb = extract_free_boundary(*sol.mesh, sol.u);
  auto report = overdet_report(fb, *sol.mesh);
  return {std::move(sol), std::move(fb), report};
}

// Arc-length weighted radius statistics of a square about its center, in closed form.
// On one side r(s) = sqrt(a^2 + s^2), s in [-a, a]; the ratio is scale free, so take a = 1.
double square_disk_deviation() {
  const double mean_r = 0.5 * (std::sqrt(2.0) + std::asinh(1.0));
  const double mean_r2 = 1.0 + 1.0 / 3.0;
  return std::sqrt(mean_r2 - mean_r * mean_r) / mean_r;
}

}  // namespace

TEST(FreeBoundary, DiskIsOneClosedChain) {
  BoxDomain box(1.0, 128);
  const auto s = solve_and_report(disk_levelset(box, 0.7, {0.05, -0.1}));
  ASSERT_EQ(s.fb.chains.size(), 1u);
  EXPECT_TRUE(s.fb.chains[0].closed);
  EXPECT_TRUE(s.fb.junctions.empty());
  EXPECT_EQ(s.report.n_components, 1u);
  EXPECT_FALSE(s.report.touches_box);
  // Consecutive samples are neighbours along the curve.
  const auto& c = s.fb.chains[0].samples;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) EXPECT_LT(norm(c[k + 1].midpoint - c[k].midpoint), 2 * box.h());
}

TEST(FreeBoundary, HalfSpaceIsOneOpenChainOnTheLine) {
  BoxDomain box(1.0, 64);
  const auto s = solve_and_report(LevelSetField::sample(box, [](Point p) { return p.x; }));
  ASSERT_EQ(s.fb.chains.size(), 1u);
  EXPECT_FALSE(s.fb.chains[0].closed);
  EXPECT_EQ(s.fb.chains[0].samples.size(), 64u);
  for (const auto& f : s.fb.chains[0].samples) EXPECT_NEAR(f.midpoint.x, 0.0, 1e-12);
  EXPECT_EQ(s.fb.junctions.size(), 2u);
  EXPECT_TRUE(s.report.touches_box);
  EXPECT_NEAR(s.report.free_length, 2.0, 1e-12);
}

TEST(FreeBoundary, TagPartition) {
  BoxDomain box(1.0, 64);
  const auto phi = LevelSetField::sample(box, [](Point p) {
    return std::min(std::hypot(p.x - 0.5, p.y) - 0.7, std::hypot(p.x + 0.6, p.y + 0.6) - 0.3);
  });
  const auto s = solve_and_report(phi);
  std::set<int> seen;
  for (const auto& c : s.fb.chains) {
    for (const auto& f : c.samples) {
      EXPECT_TRUE(seen.insert(f.edge).second) << "edge " << f.edge << " twice";
      EXPECT_EQ(s.sol.mesh->boundary_edges[static_cast<std::size_t>(f.edge)].tag, EdgeTag::Free);
    }
  }
  for (std::size_t k = 0; k < s.sol.mesh->boundary_edges.size(); ++k) {
    const bool free = s.sol.mesh->boundary_edges[k].tag == EdgeTag::Free;
    EXPECT_EQ(seen.count(static_cast<int>(k)) == 1, free);
  }
  EXPECT_EQ(s.report.n_components, s.fb.chains.size());
  EXPECT_GE(s.report.n_components, 2u);
  EXPECT_TRUE(s.report.touches_box);
}

TEST(FreeBoundary, FullBoxHasNoFreeBoundary) {
  BoxDomain box(1.0, 32);
  const auto s = solve_and_report(LevelSetField::sample(box, [](Point) { return -1.0; }));
  EXPECT_TRUE(s.fb.chains.empty());
  EXPECT_EQ(s.report.n_components, 0u);
  EXPECT_FALSE(s.report.lambda_defined);
  EXPECT_TRUE(s.report.touches_box);
}

TEST(OverdetReport, DiskStatistics) {
  BoxDomain box(1.0, 256);
  const double r = 0.8;
  const auto s = solve_and_report(disk_levelset(box, r));
  EXPECT_TRUE(s.report.lambda_defined);
  EXPECT_NEAR(s.report.lambda_hat, r / 2, 0.02 * r / 2);
  EXPECT_LT(s.report.cv, 0.03);
  EXPECT_LT(s.report.disk_deviation, 0.01);
  EXPECT_GE(s.report.cv, 0.0);
}

TEST(OverdetReport, SquareDiskDeviation) {
  EXPECT_NEAR(square_disk_deviation(), 0.10987, 5e-5);
  BoxDomain box(1.0, 256);
  const auto s = solve_and_report(LevelSetField::sample(box, [](Point p) { return std::max(std::abs(p.x), std::abs(p.y)) - 0.6; }));
  EXPECT_FALSE(s.report.touches_box);
  EXPECT_NEAR(s.report.disk_deviation, square_disk_deviation(), 0.02 * square_disk_deviation());
}

TEST(OverdetReport, DiskDeviationIsScaleAndTranslationFree) {
  BoxDomain box(1.0, 256);
  auto dd = [&](double a, Point c) {
    return solve_and_report(LevelSetField::sample(box, [&](Point p) {
             return std::max(std::abs(p.x - c.x) / 1.5, std::abs(p.y - c.y)) - a;
           }))
        .report.disk_deviation;
  };
  const double base = dd(0.5, {0, 0});
  EXPECT_NEAR(dd(0.4, {0, 0}), base, 0.02 * base);
  EXPECT_NEAR(dd(0.4, {0.1, -0.2}), base, 0.02 * base);
}

TEST(OverdetReport, ScalingTheStateScalesLambdaOnly) {
  BoxDomain box(1.0, 96);
  const auto phi = LevelSetField::sample(box, [](Point p) { return std::hypot(p.x / 0.9, p.y / 0.6) - 1.0; });
  const auto s = solve_and_report(phi);
  ScalarField scaled{s.sol.u.mesh, s.sol.u.nodal_values};
  for (double& v : scaled.nodal_values) v *= 3.0;
  const auto r = overdet_report(extract_free_boundary(*s.sol.mesh, scaled), *s.sol.mesh);
  EXPECT_NEAR(r.lambda_hat, 3.0 * s.report.lambda_hat, 1e-12);
  EXPECT_NEAR(r.cv, s.report.cv, 1e-12);
  EXPECT_GT(s.report.cv, 0.05);  // an ellipse is far from overdetermined
}

TEST(OverdetReport, DiskConstancyConvergesAtLeastLinearly) {
  const double r = std::sqrt(2.5 / std::numbers::pi);
  std::vector<double> cv;
  for (int n : {64, 128, 256}) cv.push_back(solve_and_report(disk_levelset(BoxDomain(1.0, n), r)).report.cv);
  EXPECT_LT(cv[1], 0.6 * cv[0]);
  EXPECT_LT(cv[2], 0.6 * cv[1]);
}

TEST(OverdetReport, JunctionSamplesAreExcludedFromConstancy) {
  BoxDomain box(1.0, 64);
  const auto s = solve_and_report(LevelSetField::sample(box, [](Point p) { return p.x; }));
  std::size_t free = s.fb.sample_count();
  // Two junctions, each removing the samples within 2h of it.
  EXPECT_LT(s.report.cv_samples, free);
  EXPECT_GE(s.report.cv_samples, free - 8);
}
