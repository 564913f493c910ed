#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "densreg/rng.hpp"
#include "densreg/synth.hpp"
#include "test_util.hpp"

using namespace densreg;

TEST(UniformComponents, SingleUnitBox) {
  const std::vector<Box> boxes = {{Point{0.0, 0.0}, Point{1.0, 1.0}}};
  const ProblemInstance inst = make_uniform_components(boxes, {0.0}, 0.0);
  EXPECT_DOUBLE_EQ(inst.p_true(Point{0.5, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(inst.f_star(Point{0.5, 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(inst.p_true(Point{1.5, 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(inst.pclass.lambda0, 1.0);
}

TEST(UniformComponents, OverlappingBoxesRejected) {
  const std::vector<Box> boxes = {{Point{0.0, 0.0}, Point{0.6, 1.0}},
                                  {Point{0.5, 0.0}, Point{1.0, 1.0}}};
  EXPECT_THROW(make_uniform_components(boxes, {1.0, -1.0}, 0.0), validation_error);
}

TEST(UniformComponents, TwoComponentsCarryTheirLabels) {
  const std::vector<Box> boxes = {{Point{0.0, 0.0}, Point{0.4, 1.0}},
                                  {Point{0.6, 0.0}, Point{1.0, 1.0}}};
  const ProblemInstance inst = make_uniform_components(boxes, {2.0, -2.0}, 0.0);
  EXPECT_DOUBLE_EQ(inst.f_star(Point{0.2, 0.5}), 2.0);
  EXPECT_DOUBLE_EQ(inst.f_star(Point{0.8, 0.5}), -2.0);
  EXPECT_EQ(inst.pclass.K, 2);
  EXPECT_DOUBLE_EQ(inst.pclass.M, 2.0);
  // density is uniform over the union
  EXPECT_DOUBLE_EQ(inst.p_true(Point{0.2, 0.5}), 1.0 / 0.8);
}

TEST(UniformComponents, SamplerRespectsSupport) {
  const std::vector<Box> boxes = {{Point{0.0, 0.0}, Point{0.4, 1.0}},
                                  {Point{0.6, 0.0}, Point{1.0, 1.0}}};
  const ProblemInstance inst = make_uniform_components(boxes, {1.0, -1.0}, 0.3);
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const Point x = inst.sample_x(rng);
    ASSERT_GT(inst.p_true(x), 0.0);
  }
}

TEST(UniformComponents, NoiseVarianceContract) {
  const std::vector<Box> boxes = {{Point{0.0, 0.0}, Point{1.0, 1.0}}};
  const double sigma = 0.4;
  const ProblemInstance inst = make_uniform_components(boxes, {1.0}, sigma);
  Rng rng(6);
  const std::size_t n = 50000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point x = inst.sample_x(rng);
    const double e = inst.sample_y(x, rng) - inst.f_star(x);
    s += e;
    s2 += e * e;
  }
  const double var = s2 / n - (s / n) * (s / n);
  EXPECT_LE(var, sigma * sigma * (1.0 + 4.0 / std::sqrt(static_cast<double>(n))));
  EXPECT_GE(var, sigma * sigma * 0.9);
}

TEST(UniformComponents, DeterministicUnderSeed) {
  const std::vector<Box> boxes = {{Point{0.0, 0.0}, Point{1.0, 1.0}}};
  const ProblemInstance inst = make_uniform_components(boxes, {1.0}, 0.2);
  Rng a(11), b(11);
  const LabeledSet la = inst.draw_labeled(50, a);
  const LabeledSet lb = inst.draw_labeled(50, b);
  EXPECT_EQ(la.labels, lb.labels);
  for (std::size_t i = 0; i < la.n(); ++i) EXPECT_EQ(la.points[i], lb.points[i]);
}

// --- hard instance -----------------------------------------------------

TEST(BumpProfile, PaperValues) {
  const double r = 0.1;
  EXPECT_NEAR(bump_profile(0.0, r), 0.5, 1e-15);       // apex: r + (1/2 - r)
  EXPECT_DOUBLE_EQ(bump_profile(0.5, r), 0.0);         // zero beyond radius 1/2
  EXPECT_DOUBLE_EQ(bump_profile(0.7, r), 0.0);
  EXPECT_NEAR(bump_profile(0.5 - r, r), r, 1e-7);  // junction; sqrt amplifies ulp noise
  EXPECT_GT(bump_profile(0.45, r), 0.0);
}

TEST(BumpRadius, SolvesTheDesignEquation) {
  for (int d : {2, 3, 4}) {
    const double r = solve_bump_radius(d);
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, 0.25);
    const double residual =
        std::pow(1.0 - 2.0 * r, d) - (4.0 * d / std::sqrt(3.14159265358979323846)) * r - 0.5;
    EXPECT_NEAR(residual, 0.0, 1e-12);
  }
  EXPECT_NEAR(solve_bump_radius(2), 0.06044685269908559, 1e-9);  // frozen bisection value
}

TEST(LowerBound, ConstructionConstants) {
  const std::int64_t q = lower_bound_q(10, 2, 3.0);
  EXPECT_EQ(q, 30);  // l = floor(3 * 10) = 30 bumps in 2-D
  auto omega = omega_all_ones(q);
  const ProblemInstance inst = make_lower_bound_instance(10, 2, omega, 1.0, 3.0);
  const auto& desc = inst.support_descriptor;
  EXPECT_EQ(desc.at("l").get<int>(), 30);
  EXPECT_NEAR(desc.at("eps").get<double>(), 1.0 / 32.0, 1e-15);
  const double r = desc.at("r").get<double>();
  const double eps = desc.at("eps").get<double>();
  EXPECT_NEAR(desc.at("tau_lower_bound").get<double>(),
              0.5 * eps * (std::sqrt(0.25 + r * r) - 0.5), 1e-15);
  EXPECT_DOUBLE_EQ(inst.pclass.tau0, desc.at("tau_lower_bound").get<double>());
}

TEST(LowerBound, PreconditionsEnforced) {
  EXPECT_THROW(make_lower_bound_instance(10, 1, omega_all_ones(1), 1.0, 3.0),
               validation_error);  // d = 1 unsupported
  EXPECT_THROW(make_lower_bound_instance(1, 2, omega_all_ones(3), 1.0, 3.0),
               validation_error);  // eps = 1/5 breaks the slab geometry
  EXPECT_THROW(make_lower_bound_instance(10, 2, omega_all_ones(7), 1.0, 3.0),
               validation_error);  // wrong omega length
  LowerBoundOptions opts;
  opts.r = 0.3;  // outside (0, 1/4)
  EXPECT_THROW(make_lower_bound_instance(10, 2, omega_all_ones(30), 1.0, 3.0, opts),
               std::domain_error);
  EXPECT_THROW(make_lower_bound_instance(10, 2, omega_all_ones(30), 1.0, 2.0),
               validation_error);  // c0 >= 3
}

TEST(LowerBound, TwoValuedRegressionFunction) {
  auto omega = omega_from_seed(lower_bound_q(5, 2, 3.0), 99);
  const ProblemInstance inst = make_lower_bound_instance(5, 2, omega, 2.0, 3.0);
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const Point x = inst.sample_x(rng);
    const double f = inst.f_star(x);
    ASSERT_TRUE(f == 2.0 || f == -2.0);
    ASSERT_GT(inst.p_true(x), 0.0);
  }
}

TEST(LowerBound, LowerAndUpperSetsAreDisjoint) {
  const LowerBoundGeometry geo(5, 2, omega_from_seed(lower_bound_q(5, 2, 3.0), 4), 1.0, 3.0,
                               std::nullopt);
  Rng rng(8);
  std::size_t in_lower = 0, in_upper = 0;
  for (int i = 0; i < 100000; ++i) {
    const Point x{rng.uniform(), rng.uniform()};
    const bool lo = geo.in_lower(x);
    const bool up = geo.in_upper(x);
    ASSERT_FALSE(lo && up);
    in_lower += lo;
    in_upper += up;
  }
  EXPECT_GT(in_lower, 0u);
  EXPECT_GT(in_upper, 0u);
}

// Composite membership must agree with mask-algebra rasterization built from
// the same primitives (slab dilation, bump profile, ownership bits) composed
// independently.
TEST(LowerBound, MembershipAgreesWithRasterAlgebra) {
  const std::int64_t q = lower_bound_q(5, 2, 3.0);
  auto omega = omega_from_seed(q, 21);
  const LowerBoundGeometry geo(5, 2, omega, 1.0, 3.0, std::nullopt);
  const double eps = geo.eps(), r = geo.r();
  const std::int64_t l = geo.l();

  auto dist_to_interval = [](double x, double lo, double hi) {
    return std::max({0.0, lo - x, x - hi});
  };
  auto in_slab = [&](const Point& x, double zlo, double zhi) {
    const double dx = dist_to_interval(x[0], eps, 1.0 - eps);
    const double dz = dist_to_interval(x[1], zlo, zhi);
    return std::sqrt(dx * dx + dz * dz) <= eps;
  };
  // independent composition: evaluate each primitive separately, then combine
  auto raster_lower = [&](const Point& x) {
    if (in_slab(x, eps, 0.125 - eps)) return true;
    for (std::int64_t i = 1; i <= l; ++i) {
      const double center = (i + 0.5) / static_cast<double>(l + 2);
      if (!omega[static_cast<std::size_t>(i - 1)]) continue;
      const double u = (x[0] - center) / eps;
      const double t = (x[1] - 0.125) / eps;
      if (std::abs(u) <= 0.5 && t >= 0.0 && t <= bump_profile(u, r)) return true;
    }
    return false;
  };
  auto raster_upper = [&](const Point& x) {
    if (!in_slab(x, 0.125 + eps * r + eps, 1.0 - eps)) return false;
    for (std::int64_t i = 1; i <= l; ++i) {
      const double center = (i + 0.5) / static_cast<double>(l + 2);
      if (!omega[static_cast<std::size_t>(i - 1)]) continue;
      const double u = (x[0] - center) / eps;
      const double t = (x[1] - 0.125) / eps - r;
      if (std::abs(u) <= 0.5 && t >= 0.0 && t <= bump_profile(u, r)) return false;
    }
    return true;
  };

  Rng rng(31);
  for (int i = 0; i < 100000; ++i) {
    Point x{rng.uniform(), rng.uniform()};
    ASSERT_EQ(geo.in_lower(x), raster_lower(x)) << "at (" << x[0] << ", " << x[1] << ")";
    ASSERT_EQ(geo.in_upper(x), raster_upper(x)) << "at (" << x[0] << ", " << x[1] << ")";
  }
}

// Dense minimization over the two bump surfaces reproduces the closed-form
// separation sqrt(1/4 + r^2) - 1/2 (in unit bump coordinates).
TEST(LowerBound, UnitGapFormulaMatchesDenseMinimization) {
  for (const double r : {solve_bump_radius(2), 0.24, 0.1}) {
    double best = std::numeric_limits<double>::infinity();
    double bu = 0.0, bv = 0.0;
    const int M = 700;
    for (int i = 0; i <= M; ++i) {
      const double u = -0.5 + static_cast<double>(i) / M;
      const double gu = bump_profile(u, r);
      for (int j = 0; j <= M; ++j) {
        const double v = -0.5 + static_cast<double>(j) / M;
        const double dz = gu - bump_profile(v, r) - r;
        const double dd = (u - v) * (u - v) + dz * dz;
        if (dd < best) {
          best = dd;
          bu = u;
          bv = v;
        }
      }
    }
    double step = 1.0 / M;
    for (int round = 0; round < 6; ++round) {
      double cbest = best, cu = bu, cv = bv;
      for (int i = -12; i <= 12; ++i)
        for (int j = -12; j <= 12; ++j) {
          const double u = std::clamp(bu + i * step / 10.0, -0.5, 0.5);
          const double v = std::clamp(bv + j * step / 10.0, -0.5, 0.5);
          const double dz = bump_profile(u, r) - bump_profile(v, r) - r;
          const double dd = (u - v) * (u - v) + dz * dz;
          if (dd < cbest) {
            cbest = dd;
            cu = u;
            cv = v;
          }
        }
      best = cbest;
      bu = cu;
      bv = cv;
      step /= 6.0;
    }
    EXPECT_NEAR(std::sqrt(best), bump_unit_gap(r), 1e-4) << "r = " << r;
  }
}

// Set-level check: the minimal Euclidean gap between the rasterized boundary
// of the lower and upper sets near one bump matches eps * unit_gap up to
// raster quantization.
TEST(LowerBound, SetLevelGapNearABump) {
  const std::int64_t q = lower_bound_q(5, 2, 3.0);
  LowerBoundOptions opts;
  opts.r = 0.24;  // widest fillet: largest, easiest-to-raster gap
  const LowerBoundGeometry geo(5, 2, omega_all_ones(q), 1.0, 3.0, opts.r);
  const double eps = geo.eps();
  const double expected = geo.min_gap();

  // window around the first bump
  const double cx = (1 + 0.5) / static_cast<double>(geo.l() + 2);
  const double x_lo = cx - 0.6 * eps, x_hi = cx + 0.6 * eps;
  const double z_lo = 0.125 - 0.1 * eps, z_hi = 0.125 + eps * (0.5 + geo.r()) + 0.2 * eps;
  const double cell = expected / 6.0;
  const int nx = static_cast<int>((x_hi - x_lo) / cell) + 1;
  const int nz = static_cast<int>((z_hi - z_lo) / cell) + 1;

  std::vector<Point> lower_cells, upper_cells;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nz; ++j) {
      const Point x{x_lo + i * cell, z_lo + j * cell};
      if (geo.in_lower(x)) lower_cells.push_back(x);
      if (geo.in_upper(x)) upper_cells.push_back(x);
    }
  ASSERT_FALSE(lower_cells.empty());
  ASSERT_FALSE(upper_cells.empty());
  double min_dist = std::numeric_limits<double>::infinity();
  for (const auto& a : lower_cells)
    for (const auto& b : upper_cells)
      min_dist = std::min(min_dist, euclidean_distance(a, b));
  EXPECT_NEAR(min_dist, expected, 3.0 * cell * std::sqrt(2.0));
}

TEST(LowerBound, MassBalanceBetweenOmegaExtremes) {
  // with all bumps attached the lower set gains exactly the bump volume the
  // upper set loses; total support volume must not depend on omega
  const std::int64_t q = lower_bound_q(5, 2, 3.0);
  const ProblemInstance ones = make_lower_bound_instance(5, 2, omega_all_ones(q), 1.0, 3.0);
  const ProblemInstance zeros =
      make_lower_bound_instance(5, 2, std::vector<std::uint8_t>(q, 0), 1.0, 3.0);
  EXPECT_DOUBLE_EQ(ones.support_descriptor.at("lambda").get<double>(),
                   zeros.support_descriptor.at("lambda").get<double>());
  Rng ra(12), rb(12);
  std::size_t plus_ones = 0, plus_zeros = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    plus_ones += ones.f_star(ones.sample_x(ra)) > 0.0;
    plus_zeros += zeros.f_star(zeros.sample_x(rb)) > 0.0;
  }
  EXPECT_GT(plus_ones, plus_zeros);  // attached bumps move mass to the +M side
}

// --- smooth instance ----------------------------------------------------

TEST(Smooth, AnchorIsZeroAndBounded) {
  const ProblemInstance inst = make_smooth_instance(0.0, 1.0, 7);
  const auto anchor_coords =
      inst.support_descriptor.at("anchor").get<std::vector<double>>();
  EXPECT_DOUBLE_EQ(inst.f_star(Point(anchor_coords)), 0.0);
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const Point x = inst.sample_x(rng);
    const double f = inst.f_star(x);
    ASSERT_GE(f, 0.0);
    ASSERT_LE(f, inst.pclass.M + 1e-12);
    ASSERT_GT(inst.p_true(x), 0.0);
  }
}

TEST(Smooth, DensityBoundsHold) {
  const ProblemInstance inst = make_smooth_instance(1.0, 1.0, 9);
  Rng rng(3);
  for (int i = 0; i < 3000; ++i) {
    const Point x{rng.uniform(), rng.uniform()};
    const double p = inst.p_true(x);
    ASSERT_GE(p, inst.pclass.lambda0 - 1e-9);
    ASSERT_LE(p, inst.pclass.Lambda0 + 1e-9);
  }
}

// The stated smoothness: |f(x1) - f(x2)| <= C1 D_alpha(x1, x2)^beta, with the
// reference-grid metric as the oracle.
TEST(Smooth, HolderSmoothnessAgainstReferenceMetric) {
  for (const double beta : {1.0, 0.5}) {
    SmoothOptions opts;
    opts.ref_resolution = 64;
    const double alpha_true = 0.0;
    const ProblemInstance inst = make_smooth_instance(alpha_true, beta, 17, opts);
    const double C1 = inst.pclass.C1;

    // rebuild the identical reference metric
    const GridSpec ref = default_grid(Point{0.0, 0.0}, Point{1.0, 1.0}, opts.ref_resolution);
    DensityModel model;
    model.grid = ref;
    model.m = 0;
    model.h_m = ref.min_spacing();
    model.delta_m = ref.min_spacing();
    model.eps_m = 1.0;
    model.phat.resize(ref.node_count());
    for (std::int64_t i = 0; i < ref.node_count(); ++i)
      model.phat[i] = inst.p_true(ref.node_point(i));
    model.support_mask.assign(model.phat.size(), 1);
    model.interior_mask.assign(model.phat.size(), 1);
    const GeodesicGraph g = build_graph(model, alpha_true, opts.conn);

    Rng rng(19);
    for (int s = 0; s < 25; ++s) {
      const Point a{rng.uniform(), rng.uniform()};
      const auto field = distances_from(g, a);
      for (int t = 0; t < 40; ++t) {
        const Point b{rng.uniform(), rng.uniform()};
        const double d = field.dist[g.snap(b)];
        ASSERT_TRUE(std::isfinite(d));
        EXPECT_LE(std::abs(inst.f_star(a) - inst.f_star(b)),
                  C1 * std::pow(d, beta) + 1e-9);
      }
    }
  }
}

TEST(Smooth, LipschitzAtAlphaZeroBetaOne) {
  // alpha_true = 0, beta = 1: Lipschitz with respect to the (grid) Euclidean
  // metric up to the stencil overshoot factor
  const ProblemInstance inst = make_smooth_instance(0.0, 1.0, 23);
  const double C1 = inst.pclass.C1;
  Rng rng(29);
  for (int t = 0; t < 2000; ++t) {
    const Point a{rng.uniform(), rng.uniform()};
    const Point b{rng.uniform(), rng.uniform()};
    const double cell = 1.0 / 128.0;
    EXPECT_LE(std::abs(inst.f_star(a) - inst.f_star(b)),
              C1 * (1.028 * euclidean_distance(a, b) + 2.0 * cell) + 1e-9);
  }
}

TEST(Smooth, BetaOutOfRangeRejected) {
  EXPECT_THROW(make_smooth_instance(0.0, 1.5, 1), validation_error);
  EXPECT_THROW(make_smooth_instance(-0.5, 1.0, 1), validation_error);
}

TEST(Smooth, DeterministicUnderSeed) {
  const ProblemInstance a = make_smooth_instance(2.0, 1.0, 31);
  const ProblemInstance b = make_smooth_instance(2.0, 1.0, 31);
  Rng ra(7), rb(7);
  for (int i = 0; i < 200; ++i) {
    const Point xa = a.sample_x(ra);
    const Point xb = b.sample_x(rb);
    ASSERT_EQ(xa, xb);
    ASSERT_DOUBLE_EQ(a.f_star(xa), b.f_star(xb));
  }
}
