#include <gtest/gtest.h>

#include <cmath>

#include "infground/error.hpp"
#include "infground/geometry.hpp"
#include "infground/grid.hpp"
#include "oracles.hpp"

using namespace infground;

namespace {

const Ball& ball_at(const DomainSpec& spec, std::size_t i) { return std::get<Ball>(spec.primitives().at(i)); }

}  // namespace

TEST(Dumbbell, SymmetricBulbsAndTube) {
  const DomainSpec d = make_dumbbell(0.1, 0.0);
  ASSERT_EQ(d.primitives().size(), 3u);
  EXPECT_DOUBLE_EQ(ball_at(d, 0).radius, 1.0);
  EXPECT_DOUBLE_EQ(ball_at(d, 0).center.x, -5.0);
  EXPECT_DOUBLE_EQ(ball_at(d, 2).radius, 1.0);
  EXPECT_DOUBLE_EQ(ball_at(d, 2).center.x, 5.0);
  const Rect& tube = std::get<Rect>(d.primitives()[1]);
  EXPECT_DOUBLE_EQ(tube.ymax, 0.1);
  EXPECT_DOUBLE_EQ(tube.ymin, -0.1);
  EXPECT_DOUBLE_EQ(tube.xmin, -5.0);
  EXPECT_DOUBLE_EQ(tube.xmax, 5.0);
}

TEST(Dumbbell, ShrunkLeftBulb) {
  const DomainSpec d = make_dumbbell(0.1, 0.2);
  EXPECT_DOUBLE_EQ(ball_at(d, 0).radius, 0.8);
  EXPECT_DOUBLE_EQ(ball_at(d, 2).radius, 1.0);
}

TEST(Dumbbell, RejectsDegenerateParameters) {
  EXPECT_THROW(make_dumbbell(0.1, 1.0), InvalidParameter);
  EXPECT_THROW(make_dumbbell(0.0, 0.0), InvalidParameter);
  EXPECT_THROW(make_dumbbell(1.0, 0.0), InvalidParameter);
  EXPECT_THROW(make_dumbbell(0.1, -0.1), InvalidParameter);
}

TEST(Contains, DumbbellPoints) {
  const DomainSpec d = make_dumbbell(0.1, 0.0);
  EXPECT_TRUE(contains(d, {5.0, 0.0}));
  EXPECT_TRUE(contains(d, {0.0, 0.05}));
  EXPECT_FALSE(contains(d, {0.0, 0.2}));
  EXPECT_FALSE(contains(d, {0.0, 0.1}));
}

TEST(Primitives, RejectInvalidShapes) {
  EXPECT_THROW(make_ball({0, 0}, 0.0), InvalidParameter);
  EXPECT_THROW(make_rect(1, 0, 0, 1), InvalidParameter);
  EXPECT_THROW(make_rect(0, 1, 0, 0), InvalidParameter);
  EXPECT_THROW(DomainSpec("empty", {}), InvalidParameter);
}

TEST(Rasterize, DumbbellGridShape) {
  const double h = 0.025;
  const GridDomain g = rasterize(make_dumbbell(0.1, 0.0), {.h = h});
  const double pad = 2 * h;
  // Covers [-6, 6] x [-1, 1] expanded by the padding, with less than one
  // spacing to spare on each side.
  EXPECT_LE(g.x(0), -6.0 - pad + 1e-12);
  EXPECT_GT(g.x(0), -6.0 - pad - h);
  EXPECT_GE(g.x(g.nx() - 1), 6.0 + pad - 1e-12);
  EXPECT_LT(g.x(g.nx() - 1), 6.0 + pad + h);
  EXPECT_LE(g.y(0), -1.0 - pad + 1e-12);
  EXPECT_GE(g.y(g.ny() - 1), 1.0 + pad - 1e-12);
  EXPECT_NEAR(static_cast<double>(g.nx()), 490.0, 10.0);
  EXPECT_NEAR(static_cast<double>(g.ny()), 90.0, 10.0);

  // Every tube column has at least 7 inside nodes across.
  for (std::size_t i = 0; i < g.nx(); ++i) {
    const double x = g.x(i);
    if (x < -3.9 || x > 3.9) continue;
    int across = 0;
    for (std::size_t j = 0; j < g.ny(); ++j) across += g.inside(g.index(i, j)) ? 1 : 0;
    EXPECT_GE(across, 7) << "column x=" << x;
  }
}

TEST(Rasterize, UnitBallMatchesLatticeEnumeration) {
  for (double h : {0.5, 0.8, 0.3}) {
    const GridDomain g = rasterize(make_ball_domain({0, 0}, 1.0), {.h = h});
    const auto expected = oracle::lattice_points_in_ball({0, 0}, 1.0, h);
    std::vector<Point> got;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (g.inside(k)) got.push_back(g.node(k));
    }
    ASSERT_EQ(got.size(), expected.size()) << "h=" << h;
    for (std::size_t n = 0; n < got.size(); ++n) {
      EXPECT_NEAR(got[n].x, expected[n].x, 1e-12);
      EXPECT_NEAR(got[n].y, expected[n].y, 1e-12);
    }
  }
  // h = 0.5 gives the 3x3 block; h = 0.8 the 5-node cross.
  EXPECT_EQ(oracle::lattice_points_in_ball({0, 0}, 1.0, 0.5).size(), 9u);
  EXPECT_EQ(oracle::lattice_points_in_ball({0, 0}, 1.0, 0.8).size(), 5u);
}

TEST(Rasterize, CoarseGridHasNoInterior) {
  const GridDomain g = rasterize(make_ball_domain({0.5, 0.5}, 0.3), {.h = 2.0});
  EXPECT_EQ(g.inside_count(), 0u);
  EXPECT_TRUE(g.ridge().empty());
  EXPECT_THROW(distance_field(g), EmptyDomain);
  EXPECT_THROW(lambda_inf(g.dist()), EmptyDomain);
}

TEST(Rasterize, ValidatesSpacingAndBudget) {
  const DomainSpec ball = make_ball_domain({0, 0}, 1.0);
  EXPECT_THROW(rasterize(ball, {.h = 0.0}), InvalidParameter);
  EXPECT_THROW(rasterize(ball, {.h = 0.1, .padding = 0.05}), InvalidParameter);
  try {
    rasterize(ball, {.h = 0.001, .node_budget = 1000});
    FAIL() << "expected ResourceError";
  } catch (const ResourceError& e) {
    EXPECT_NE(std::string(e.what()).find("1000"), std::string::npos);
  }
}

TEST(DistanceField, BallCentreIsOne) {
  const double h = 1.0 / 32;
  const GridDomain g = rasterize(make_ball_domain({5, 0}, 1.0), {.h = h});
  const long k = g.nearest_inside_node({5, 0});
  ASSERT_GE(k, 0);
  EXPECT_NEAR(g.dist()[static_cast<std::size_t>(k)], 1.0, h);
}

TEST(DistanceField, AsymmetricDumbbellMaxNearRightCentre) {
  const double h = 0.025;
  const GridDomain g = rasterize(make_dumbbell(0.1, 0.2), {.h = h});
  const auto& d = g.dist();
  std::size_t arg = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (d[k] > d[arg]) arg = k;
  }
  EXPECT_NEAR(d[arg], 1.0, h);
  EXPECT_NEAR(g.node(arg).x, 5.0, 2 * h);
  EXPECT_NEAR(g.node(arg).y, 0.0, 2 * h);
}

TEST(DistanceField, HalfDumbbellMax) {
  const double h = 0.025;
  const GridDomain g = rasterize(make_half_dumbbell(0.1, 0.2), {.h = h});
  EXPECT_NEAR(g.dist().max(), 0.8, h);
}

TEST(DistanceField, ZeroOutside) {
  const GridDomain g = rasterize(make_dumbbell(0.1, 0.0), {.h = 0.05});
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.inside(k)) {
      EXPECT_EQ(g.dist()[k], 0.0);
    }
  }
}

TEST(LambdaInf, KnownDomains) {
  const double h = 0.025;
  EXPECT_NEAR(lambda_inf(rasterize(make_dumbbell(0.1, 0.0), {.h = h}).dist()), 1.0, 2 * h);
  EXPECT_NEAR(lambda_inf(rasterize(make_half_dumbbell(0.1, 0.2), {.h = h}).dist()), 1.25, 2 * h);
  EXPECT_NEAR(lambda_inf(rasterize(make_ball_domain({0, 0}, 2.0), {.h = 0.05}).dist()), 0.5, 0.05);
}

TEST(LambdaInf, RejectsZeroField) {
  EXPECT_THROW(lambda_inf(ScalarField(3, 3, 0.0)), EmptyDomain);
}

TEST(Ridge, DumbbellHasTwoComponents) {
  const GridDomain g = rasterize(make_dumbbell(0.05, 0.0), {.h = 0.0125});
  const auto comps = ridge_components(g);
  ASSERT_EQ(comps.size(), 2u);
  const auto right = right_ridge(g);
  ASSERT_FALSE(right.empty());
  for (std::size_t k : right) EXPECT_GT(g.node(k).x, 4.0);
}

TEST(Ridge, NonEmptyWhenInterior) {
  for (const DomainSpec& s : {make_stadium(), make_ball_domain({0, 0}, 1), make_disjoint_balls(0.2)}) {
    const GridDomain g = rasterize(s, {.h = 0.05});
    EXPECT_FALSE(g.ridge().empty()) << s.name();
  }
}

TEST(Mirror, DumbbellGridIsExactlySymmetric) {
  const GridDomain g = rasterize(make_dumbbell(0.1, 0.0), {.h = 0.025});
  for (std::size_t k = 0; k < g.size(); ++k) {
    const long m = g.mirror_x(k);
    ASSERT_GE(m, 0);
    EXPECT_EQ(g.inside(k), g.inside(static_cast<std::size_t>(m)));
    EXPECT_EQ(g.dist()[k], g.dist()[static_cast<std::size_t>(m)]);
  }
}
