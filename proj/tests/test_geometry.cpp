#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "serrin/geometry.hpp"

using namespace serrin;

namespace {

constexpr double pi = std::numbers::pi;

// Central-difference |grad phi| at interior node (i, j).
double grad_norm(const LevelSetField& phi, int i, int j) {
  const double h = phi.box().h();
  const double gx = (phi(i + 1, j) - phi(i - 1, j)) / (2 * h);
  const double gy = (phi(i, j + 1) - phi(i, j - 1)) / (2 * h);
  return std::hypot(gx, gy);
}

LevelSetField annulus(const BoxDomain& box, double r_in, double r_out) {
  return LevelSetField::sample(box, [&](Point p) { return std::max(r_in - norm(p), norm(p) - r_out); });
}

}  // namespace

TEST(LevelSetField, RejectsBadValues) {
  BoxDomain box(1.0, 16);
  EXPECT_THROW(LevelSetField(box, std::vector<double>(10, 1.0)), InvalidArgument);
  std::vector<double> v(box.node_count(), 1.0);
  v[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(LevelSetField(box, v), InvalidArgument);
}

TEST(Volume, EmptyAndHalfBox) {
  BoxDomain box(1.0, 32);
  EXPECT_EQ(volume(LevelSetField::sample(box, [](Point) { return 1.0; })), 0.0);
  EXPECT_NEAR(volume(LevelSetField::sample(box, [](Point p) { return p.x; })), 2.0, 1e-13);
  EXPECT_NEAR(volume(LevelSetField::sample(box, [](Point) { return -1.0; })), 4.0, 1e-12);
}

TEST(Volume, DiskOfRadiusHalf) {
  BoxDomain box(1.0, 256);
  EXPECT_NEAR(volume(disk_levelset(box, 0.5)), pi / 4, 1e-3);
}

TEST(Volume, ExactForGridAlignedHalfPlanes) {
  BoxDomain box(1.0, 40);
  // y < 0.3 sits on a grid line only for some n; the linear interface is exact anyway.
  EXPECT_NEAR(volume(LevelSetField::sample(box, [](Point p) { return p.y - 0.3; })), 2.0 * 1.3, 1e-13);
}

TEST(Volume, MonotoneUnderNodewiseOrder) {
  BoxDomain box(1.0, 48);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> bump(0.0, 0.05);
  const auto phi2 = disk_levelset(box, 0.6, {0.1, -0.05});
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> v(phi2.values().begin(), phi2.values().end());
    for (auto& x : v) x += bump(rng);
    EXPECT_LE(volume(LevelSetField(box, v)), volume(phi2));
  }
}

TEST(DiskLevelset, Examples) {
  BoxDomain box(1.0, 128);
  EXPECT_NEAR(radius_for_area(2.5), 0.8921, 1e-4);
  EXPECT_NEAR(volume(disk_levelset(box, radius_for_area(2.5))), 2.5, 2e-3);
  EXPECT_THROW(disk_levelset(box, 1.0, {0.5, 0.0}), InvalidArgument);
  EXPECT_THROW(disk_levelset(box, 0.0), InvalidArgument);
  const auto phi = disk_levelset(box, 0.5);
  EXPECT_DOUBLE_EQ(phi(64, 64), -0.5);
}

TEST(Interpolate, ReproducesNodesAndLinearFunctions) {
  BoxDomain box(1.0, 32);
  const auto lin = LevelSetField::sample(box, [](Point p) { return 0.3 * p.x - 1.7 * p.y + 0.2; });
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Point p{u(rng), u(rng)};
    EXPECT_NEAR(interpolate(lin, p), 0.3 * p.x - 1.7 * p.y + 0.2, 1e-13);
  }
  const auto disk = disk_levelset(box, 0.4);
  EXPECT_DOUBLE_EQ(interpolate(disk, box.node(5, 9)), disk(5, 9));
}

TEST(Steiner, CenteredDiskIsAFixedPoint) {
  BoxDomain box(1.0, 128);
  const auto phi = disk_levelset(box, 0.6);
  const auto sym = steiner_symmetrize(phi, Axis::X);
  for (int i = 0; i <= box.grid_n(); ++i) {
    EXPECT_NEAR(section_measure(sym, Axis::X, i), section_measure(phi, Axis::X, i), box.h());
  }
  EXPECT_NEAR(volume(sym), volume(phi), box.grid_n() * box.h() * box.h());
}

TEST(Steiner, OffCenterDiskMovesOntoTheAxis) {
  BoxDomain box(1.0, 128);
  const auto phi = disk_levelset(box, 0.4, {0.2, 0.35});
  const auto sym = steiner_symmetrize(phi, Axis::X);
  EXPECT_LT(mirror_asymmetry(sym, Axis::X), 1e-12);
  EXPECT_NEAR(volume(sym), volume(phi), box.grid_n() * box.h() * box.h());
  // Oracle: the same disk centered on the x axis.
  const auto moved = disk_levelset(box, 0.4, {0.2, 0.0});
  for (std::size_t k = 0; k < box.node_count(); ++k) {
    if (std::abs(moved[k]) < 3 * box.h()) {
      EXPECT_NEAR(sym[k], moved[k], box.h());
    }
  }
}

TEST(Steiner, StackedDisksMergeIntoOneSlabPerColumn) {
  BoxDomain box(1.0, 128);
  const auto phi = LevelSetField::sample(box, [](Point p) {
    return std::min(norm(p - Point{0.0, 0.5}), norm(p - Point{0.0, -0.5})) - 0.3;
  });
  const auto sym = steiner_symmetrize(phi, Axis::X);
  for (int i = 0; i <= box.grid_n(); ++i) {
    const double m = section_measure(phi, Axis::X, i);
    EXPECT_NEAR(section_measure(sym, Axis::X, i), m, box.h());
    // One centered interval: the column is inside exactly where |y| < m/2.
    if (m > 4 * box.h()) {
      EXPECT_LT(sym(i, box.grid_n() / 2), 0.0);
    }
  }
  EXPECT_NEAR(volume(sym), volume(phi), box.grid_n() * box.h() * box.h());
}

TEST(Steiner, IsIdempotentAndAxisYWorks) {
  BoxDomain box(1.0, 96);
  const auto phi = LevelSetField::sample(box, [](Point p) {
    return std::hypot((p.x - 0.15) / 0.7, (p.y + 0.1) / 0.4) - 1.0;
  });
  const auto once = steiner_symmetrize(phi, Axis::Y);
  const auto twice = steiner_symmetrize(once, Axis::Y);
  EXPECT_LT(mirror_asymmetry(once, Axis::Y), 1e-12);
  for (int j = 0; j <= box.grid_n(); ++j) {
    EXPECT_NEAR(section_measure(twice, Axis::Y, j), section_measure(once, Axis::Y, j), box.h());
  }
}

TEST(Steiner, FullSectionsStayInsideTheBox) {
  BoxDomain box(1.0, 32);
  const auto phi = LevelSetField::sample(box, [](Point p) { return std::abs(p.x) - 0.5; });  // vertical slab
  const auto sym = steiner_symmetrize(phi, Axis::X);
  EXPECT_NEAR(volume(sym), volume(phi), box.grid_n() * box.h() * box.h());
  EXPECT_LT(sym(16, 0), 0.0);
  EXPECT_LT(sym(16, 32), 0.0);
}

TEST(Starshaped, DiskAndAnnulus) {
  BoxDomain box(1.0, 128);
  EXPECT_TRUE(is_starshaped(disk_levelset(box, 0.7), {0, 0}, 360));
  EXPECT_TRUE(is_starshaped(disk_levelset(box, 0.7), {0.3, -0.2}, 360));
  const auto ring = is_starshaped(annulus(box, 0.3, 0.8), {0.55, 0.0}, 360);
  EXPECT_FALSE(ring.starshaped);
  ASSERT_TRUE(ring.witness_angle.has_value());
  // The offending ray heads into the hole, i.e. roughly towards -x.
  EXPECT_LT(std::cos(*ring.witness_angle), -0.5);
  EXPECT_THROW(is_starshaped(annulus(box, 0.3, 0.8), {0, 0}, 36), InvalidArgument);
}

TEST(Starshaped, DoubleSymmetrizationOfADumbbell) {
  BoxDomain box(1.0, 96);
  const auto dumbbell = LevelSetField::sample(box, [](Point p) {
    const double lobes = std::min(norm(p - Point{0.45, 0.1}), norm(p - Point{-0.45, 0.1})) - 0.35;
    const double bar = std::max(std::abs(p.x) - 0.5, std::abs(p.y - 0.1) - 0.08);
    return std::min(lobes, bar);
  });
  const auto sym = steiner_symmetrize(steiner_symmetrize(dumbbell, Axis::Y), Axis::X);
  EXPECT_TRUE(is_starshaped(sym, {0, 0}, 720));
}

TEST(Reinitialize, FixedPointForLines) {
  BoxDomain box(1.0, 64);
  const double c = std::cos(0.4), s = std::sin(0.4);
  const auto line = LevelSetField::sample(box, [&](Point p) { return c * p.x + s * p.y - 0.1; });
  const auto out = reinitialize(line);
  for (std::size_t k = 0; k < box.node_count(); ++k) {
    // The zero set ends at the walls; where the foot point leaves D the distance is to an end instead.
    const Point foot = box.node(k) - line[k] * Point{c, s};
    if (std::abs(foot.x) <= 1.0 && std::abs(foot.y) <= 1.0) {
      EXPECT_NEAR(out[k], line[k], 1e-6);
    } else {
      EXPECT_GE(std::abs(out[k]), std::abs(line[k]) - 1e-12);
    }
  }
}

TEST(Reinitialize, RescaledDistanceRecovers) {
  BoxDomain box(1.0, 128);
  const auto sdf = disk_levelset(box, 0.55, {0.05, 0.0});
  const auto out = reinitialize(sdf.transformed([](double v) { return 3.0 * v; }));
  for (std::size_t k = 0; k < box.node_count(); ++k) {
    if (std::abs(sdf[k]) < 3 * box.h()) {
      EXPECT_NEAR(out[k], sdf[k], 0.05 * box.h());
    }
    EXPECT_EQ(out[k] < 0.0, sdf[k] < 0.0);
  }
}

TEST(Reinitialize, GradientNearOneAwayFromZeroSet) {
  BoxDomain box(1.0, 96);
  const auto wobbly = LevelSetField::sample(box, [](Point p) {
    const double t = std::atan2(p.y, p.x);
    return 5.0 * (norm(p) - 0.6 - 0.08 * std::cos(3 * t));
  });
  const auto out = reinitialize(wobbly);
  const double h = box.h();
  int checked = 0;
  for (int j = 1; j < box.grid_n(); ++j) {
    for (int i = 1; i < box.grid_n(); ++i) {
      // Away from the zero set and from the inner ridge where distance kinks.
      if (std::abs(out(i, j)) < 2 * h || out(i, j) < -0.3) continue;
      const double g = grad_norm(out, i, j);
      EXPECT_GE(g, 0.8) << i << ',' << j;
      EXPECT_LE(g, 1.2) << i << ',' << j;
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(Reinitialize, NoInterfaceLeavesFieldAlone) {
  BoxDomain box(1.0, 16);
  const auto inside = LevelSetField::sample(box, [](Point) { return -1.0; });
  const auto out = reinitialize(inside);
  for (std::size_t k = 0; k < box.node_count(); ++k) EXPECT_EQ(out[k], -1.0);
}

TEST(Resample, KeepsTheDisk) {
  const auto coarse = disk_levelset(BoxDomain(1.0, 64), 0.7);
  const BoxDomain fine(1.0, 128);
  const auto out = resample(coarse, fine);
  EXPECT_NEAR(volume(out), volume(disk_levelset(fine, 0.7)), 5e-3);
  EXPECT_THROW(resample(coarse, BoxDomain(2.0, 128)), InvalidArgument);
}

TEST(MirrorAsymmetry, DetectsOffset) {
  BoxDomain box(1.0, 64);
  EXPECT_LT(mirror_asymmetry(disk_levelset(box, 0.5), Axis::X), 1e-15);
  EXPECT_LT(mirror_asymmetry(disk_levelset(box, 0.5), Axis::Y), 1e-15);
  EXPECT_GT(mirror_asymmetry(disk_levelset(box, 0.5, {0.1, 0.0}), Axis::Y), 0.1);
  EXPECT_LT(mirror_asymmetry(disk_levelset(box, 0.5, {0.1, 0.0}), Axis::X), 1e-15);
}
