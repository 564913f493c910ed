#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "densreg/geodesic.hpp"
#include "densreg/rng.hpp"
#include "test_util.hpp"

using namespace densreg;

namespace {

DensityModel constant_model_2d(int res, double value, double lo = 0.0, double hi = 1.0) {
  const GridSpec grid = testutil::grid2d(lo, hi, res);
  return testutil::manual_model(grid, std::vector<double>(grid.node_count(), value));
}

}  // namespace

TEST(BuildGraph, AlphaZeroWeightsAreExactlyEuclidean) {
  const DensityModel model = constant_model_2d(5, 3.7);
  const GeodesicGraph g = build_graph(model, 0.0, Connectivity::eight);
  std::ostringstream dump;
  g.dump_edges(dump);
  std::string line;
  std::istringstream in(dump.str());
  const double cell = model.grid.spacing(0);
  std::size_t edges = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    int u, v;
    double w;
    ls >> u >> v >> w;
    const double len = euclidean_distance(g.node_point(u), g.node_point(v));
    EXPECT_DOUBLE_EQ(w, len);
    EXPECT_LT(u, v);
    EXPECT_TRUE(std::abs(w - cell) < 1e-12 || std::abs(w - cell * std::sqrt(2.0)) < 1e-12);
    ++edges;
  }
  EXPECT_GT(edges, 0u);
}

TEST(BuildGraph, ConstantDensityScalesWeights) {
  const DensityModel model = constant_model_2d(5, 4.0);
  const GeodesicGraph g = build_graph(model, 1.0, Connectivity::four);
  const Point a = model.grid.node_point(0);
  const Point b = model.grid.node_point(1);  // axis neighbor
  const auto res = geodesic_distance(g, a, b);
  ASSERT_TRUE(res.reachable);
  EXPECT_DOUBLE_EQ(res.value, model.grid.spacing(0) / 4.0);
}

TEST(BuildGraph, TrapezoidRuleHandValue) {
  // neighbors with phat {1, 4}, spacing 0.1, alpha 1 -> 0.1*(1 + 0.25)/2 = 0.0625
  const GridSpec grid = testutil::grid1d(0.0, 0.2, 2);
  const DensityModel model = testutil::manual_model(grid, {1.0, 4.0});
  const GeodesicGraph g = build_graph(model, 1.0, Connectivity::four);
  const auto res = geodesic_distance(g, Point{0.05}, Point{0.15});
  ASSERT_TRUE(res.reachable);
  EXPECT_DOUBLE_EQ(res.value, 0.0625);
}

TEST(BuildGraph, EmptyInteriorThrows) {
  const GridSpec grid = testutil::grid1d(0.0, 1.0, 4);
  const DensityModel model = testutil::manual_model(grid, std::vector<double>(4, 0.0));
  EXPECT_THROW(build_graph(model, 1.0), validation_error);
}

TEST(Distance, CoincidentInteriorPointsAreZero) {
  const DensityModel model = constant_model_2d(10, 1.0);
  const GeodesicGraph g = build_graph(model, 1.0);
  const auto res = geodesic_distance(g, Point{0.52, 0.52}, Point{0.52, 0.52});
  EXPECT_TRUE(res.reachable);
  EXPECT_DOUBLE_EQ(res.value, 0.0);
}

TEST(Distance, DisconnectedComponentsAreUnreachable) {
  // 1-D support with a hole in the middle
  const GridSpec grid = testutil::grid1d(0.0, 1.0, 10);
  std::vector<double> phat(10, 1.0);
  phat[5] = 0.0;
  const DensityModel model = testutil::manual_model(grid, phat);
  const GeodesicGraph g = build_graph(model, 0.0, Connectivity::four);
  const auto res = geodesic_distance(g, Point{0.05}, Point{0.95});
  EXPECT_FALSE(res.reachable);
  EXPECT_TRUE(std::isinf(res.value));
}

TEST(Distance, OffInteriorQueryIsUnreachableInStrictMode) {
  const GridSpec grid = testutil::grid1d(0.0, 1.0, 10);
  std::vector<double> phat(10, 1.0);
  phat[9] = 0.0;
  // delta chosen so the snap radius (2 delta) reaches the nearest interior node
  const DensityModel model = testutil::manual_model(grid, phat, 0.1);
  const GeodesicGraph g = build_graph(model, 0.0, Connectivity::four);
  EXPECT_FALSE(geodesic_distance(g, Point{0.95}, Point{0.05}).reachable);
  // snap mode recovers the query by moving it to the nearest interior node
  EXPECT_TRUE(geodesic_distance(g, Point{0.95}, Point{0.05}, true).reachable);
}

TEST(Distance, ConstantDensityLineIntegral) {
  // constant phat = 2 on [0,1], alpha 1: D(0, 1) ~ 1/2 within one grid cell
  const GridSpec grid = testutil::grid1d(0.0, 1.0, 100);
  const DensityModel model =
      testutil::manual_model(grid, std::vector<double>(100, 2.0));
  const GeodesicGraph g = build_graph(model, 1.0, Connectivity::four);
  const auto res = geodesic_distance(g, Point{0.0}, Point{1.0});
  ASSERT_TRUE(res.reachable);
  EXPECT_NEAR(res.value, 0.5, grid.spacing(0));
}

TEST(DistancesFrom, SourceFieldBasics) {
  const DensityModel model = constant_model_2d(20, 1.0);
  const GeodesicGraph g = build_graph(model, 0.0, Connectivity::eight);
  const Point src{0.525, 0.525};
  const DistanceField field = distances_from(g, src);
  const std::int32_t c = g.snap(src);
  ASSERT_GE(c, 0);
  EXPECT_DOUBLE_EQ(field.dist[c], 0.0);
  for (double v : field.dist) EXPECT_GE(v, 0.0);
}

TEST(DistancesFrom, NonInteriorSourceGivesAllUnreachable) {
  const GridSpec grid = testutil::grid1d(0.0, 1.0, 10);
  std::vector<double> phat(10, 1.0);
  phat[0] = 0.0;
  const DensityModel model = testutil::manual_model(grid, phat);
  const GeodesicGraph g = build_graph(model, 0.0, Connectivity::four);
  const DistanceField field = distances_from(g, Point{0.03});
  for (double v : field.dist) EXPECT_TRUE(std::isinf(v));
}

TEST(DistancesFrom, SymmetricAcrossSources) {
  const DensityModel model = constant_model_2d(15, 1.3);
  const GeodesicGraph g = build_graph(model, 2.0, Connectivity::eight);
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    const auto a = static_cast<std::int32_t>(rng.bounded(g.node_count()));
    const auto b = static_cast<std::int32_t>(rng.bounded(g.node_count()));
    const double ab = distances_from_compact(g, a).dist[b];
    const double ba = distances_from_compact(g, b).dist[a];
    EXPECT_NEAR(ab, ba, 1e-12 * std::max(1.0, ab));
  }
}

// Known stencil overshoot against straight-line length on a convex interior:
// <= 1.0824 for 8 neighbors, <= 1.0280 with knight moves, in 2-D.
TEST(DistancesFrom, ConnectivityOvershootBounds) {
  const DensityModel model = constant_model_2d(40, 1.0);
  const GeodesicGraph g8 = build_graph(model, 0.0, Connectivity::eight);
  const GeodesicGraph g16 = build_graph(model, 0.0, Connectivity::sixteen);
  Rng rng(23);
  for (int t = 0; t < 25; ++t) {
    const auto a = static_cast<std::int32_t>(rng.bounded(g8.node_count()));
    const auto b = static_cast<std::int32_t>(rng.bounded(g8.node_count()));
    if (a == b) continue;
    const double euclid = euclidean_distance(g8.node_point(a), g8.node_point(b));
    const double d8 = distances_from_compact(g8, a).dist[b];
    const double d16 = distances_from_compact(g16, a).dist[b];
    EXPECT_LE(d8, 1.0824 * euclid + 1e-9);
    EXPECT_LE(d16, 1.0280 * euclid + 1e-9);
    EXPECT_GE(d8, euclid - 1e-12);
    EXPECT_GE(d16, euclid - 1e-12);
  }
}

TEST(Metric, TriangleInequalityOnRandomTriples) {
  Rng rng(31);
  const GridSpec grid = testutil::grid2d(0.0, 1.0, 12);
  std::vector<double> phat(grid.node_count());
  for (auto& v : phat) v = rng.uniform(0.5, 3.0);
  const DensityModel model = testutil::manual_model(grid, phat);
  const GeodesicGraph g = build_graph(model, 1.5, Connectivity::eight);
  for (int t = 0; t < 40; ++t) {
    const auto a = static_cast<std::int32_t>(rng.bounded(g.node_count()));
    const auto b = static_cast<std::int32_t>(rng.bounded(g.node_count()));
    const auto c = static_cast<std::int32_t>(rng.bounded(g.node_count()));
    const auto fa = distances_from_compact(g, a);
    const auto fb = distances_from_compact(g, b);
    EXPECT_LE(fa.dist[c], fa.dist[b] + fb.dist[c] + 1e-12);
  }
}

TEST(Metric, ScalingLawIsExact) {
  Rng rng(37);
  const GridSpec grid = testutil::grid2d(0.0, 1.0, 10);
  std::vector<double> phat(grid.node_count());
  for (auto& v : phat) v = rng.uniform(0.5, 2.0);
  for (const double alpha : {0.0, 1.0, 3.0}) {
    for (const double c : {0.5, 2.0, 10.0}) {
      std::vector<double> scaled = phat;
      for (auto& v : scaled) v *= c;
      const GeodesicGraph g1 =
          build_graph(testutil::manual_model(grid, phat), alpha, Connectivity::eight);
      const GeodesicGraph g2 =
          build_graph(testutil::manual_model(grid, scaled), alpha, Connectivity::eight);
      const auto f1 = distances_from_compact(g1, 0);
      const auto f2 = distances_from_compact(g2, 0);
      const double factor = std::pow(c, -alpha);
      for (std::size_t i = 0; i < f1.dist.size(); ++i) {
        if (!std::isfinite(f1.dist[i])) continue;
        EXPECT_NEAR(f2.dist[i], f1.dist[i] * factor,
                    1e-12 * std::max(1.0, std::abs(f1.dist[i] * factor)));
      }
    }
  }
}

TEST(Metric, MonotoneInAlphaOnSupraUnitDensities) {
  Rng rng(41);
  const GridSpec grid = testutil::grid2d(0.0, 1.0, 10);
  std::vector<double> phat(grid.node_count());
  for (auto& v : phat) v = rng.uniform(1.0, 4.0);  // phat >= 1 everywhere
  const DensityModel model = testutil::manual_model(grid, phat);
  const GeodesicGraph g1 = build_graph(model, 0.7, Connectivity::eight);
  const GeodesicGraph g2 = build_graph(model, 2.1, Connectivity::eight);
  const auto f1 = distances_from_compact(g1, 3);
  const auto f2 = distances_from_compact(g2, 3);
  for (std::size_t i = 0; i < f1.dist.size(); ++i)
    EXPECT_LE(f2.dist[i], f1.dist[i] + 1e-12);
}

// Perturbation sandwich: with sup|ptilde - p| <= eps and p >= lambda0, every
// pairwise distance obeys
//   (l0/(l0+eps))^a Dtilde <= Dhat <= (l0/(l0-eps))^a Dtilde.
TEST(Metric, PerturbationSandwich) {
  Rng rng(43);
  const GridSpec grid = testutil::grid2d(0.0, 1.0, 9);
  const double lambda0 = 1.0, eps = 0.4, alpha = 1.7;
  std::vector<double> p(grid.node_count()), pt(grid.node_count());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = rng.uniform(lambda0, 2.5);
    pt[i] = p[i] + rng.uniform(-eps, eps);
  }
  const GeodesicGraph gt =
      build_graph(testutil::manual_model(grid, p), alpha, Connectivity::eight);
  const GeodesicGraph gh =
      build_graph(testutil::manual_model(grid, pt), alpha, Connectivity::eight);
  const double lo = std::pow(lambda0 / (lambda0 + eps), alpha);
  const double hi = std::pow(lambda0 / (lambda0 - eps), alpha);
  for (std::int32_t s = 0; s < static_cast<std::int32_t>(gt.node_count()); s += 7) {
    const auto ft = distances_from_compact(gt, s);
    const auto fh = distances_from_compact(gh, s);
    for (std::size_t i = 0; i < ft.dist.size(); ++i) {
      if (!std::isfinite(ft.dist[i])) continue;
      EXPECT_GE(fh.dist[i], lo * ft.dist[i] - 1e-9);
      EXPECT_LE(fh.dist[i], hi * ft.dist[i] + 1e-9);
    }
  }
}

TEST(Oracle, MatchesDijkstraOnSmallGraphs) {
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const GridSpec grid = testutil::grid2d(0.0, 1.0, 4);  // at most 16 nodes
    std::vector<double> phat(grid.node_count());
    for (auto& v : phat) v = rng.uniform() < 0.8 ? rng.uniform(0.5, 3.0) : 0.0;
    if (std::none_of(phat.begin(), phat.end(), [](double v) { return v > 0.0; })) continue;
    const DensityModel model = testutil::manual_model(grid, phat);
    const GeodesicGraph g = build_graph(model, rng.uniform(0.0, 2.0), Connectivity::eight);
    for (std::int32_t a = 0; a < static_cast<std::int32_t>(g.node_count()); ++a) {
      const auto field = distances_from_compact(g, a);
      for (std::int32_t b = 0; b < static_cast<std::int32_t>(g.node_count()); ++b) {
        const double exact = oracle_distance(g, a, b);
        if (std::isinf(exact)) {
          EXPECT_TRUE(std::isinf(field.dist[b]));
        } else {
          EXPECT_NEAR(field.dist[b], exact, 1e-12 * std::max(1.0, exact));
        }
      }
    }
  }
}

TEST(Oracle, SingleEdgeAndDisconnected) {
  const GridSpec grid = testutil::grid1d(0.0, 0.2, 2);
  const DensityModel model = testutil::manual_model(grid, {1.0, 1.0});
  const GeodesicGraph g = build_graph(model, 0.0, Connectivity::four);
  EXPECT_DOUBLE_EQ(oracle_distance(g, 0, 1), 0.1);

  const GridSpec grid3 = testutil::grid1d(0.0, 0.3, 3);
  const DensityModel model3 = testutil::manual_model(grid3, {1.0, 0.0, 1.0});
  const GeodesicGraph g3 = build_graph(model3, 0.0, Connectivity::four);
  EXPECT_TRUE(std::isinf(oracle_distance(g3, 0, 1)));
}

TEST(Oracle, RefusesLargeGraphs) {
  const DensityModel model = constant_model_2d(5, 1.0);  // 25 nodes
  const GeodesicGraph g = build_graph(model, 0.0);
  EXPECT_THROW(oracle_distance(g, 0, 1), std::domain_error);
}

// Knight moves must not tunnel through a one-node wall.
TEST(Connectivity16, NoTunnelingThroughWalls) {
  GridSpec grid;
  grid.lower = Point{0.0, 0.0};
  grid.upper = Point{0.3, 0.5};
  grid.resolution = {3, 5};
  std::vector<double> phat(grid.node_count(), 1.0);
  for (int j = 0; j < 5; ++j) phat[grid.flat_index({1, j})] = 0.0;  // wall column
  const DensityModel model = testutil::manual_model(grid, phat);
  const GeodesicGraph g = build_graph(model, 0.0, Connectivity::sixteen);
  const auto res =
      geodesic_distance(g, grid.node_point(grid.flat_index({0, 2})),
                        grid.node_point(grid.flat_index({2, 2})));
  EXPECT_FALSE(res.reachable);
}
