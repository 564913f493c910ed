#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "densreg/adapt.hpp"
#include "densreg/density.hpp"
#include "densreg/geodesic.hpp"
#include "densreg/regress.hpp"
#include "densreg/rng.hpp"
#include "densreg/synth.hpp"
#include "densreg/types.hpp"

namespace densreg {

/// Knobs shared by every end-to-end run. The schedule constants default to
/// the theory placeholders (1.0); desk-scale experiments calibrate them, see
/// the README for working values.
struct PipelineOptions {
  int grid_per_axis = 100;
  double margin = 0.05;               // grid margin beyond the data/support box
  double c1 = 1.0;
  double c2 = 1.0;
  std::optional<double> h_m;          // override the schedule's KDE bandwidth
  std::optional<double> delta_m;      // override the boundary strip half-width
  Connectivity conn = Connectivity::sixteen;
  unsigned threads = 0;
  bool snap_queries = false;
  std::optional<double> m_trunc;
};

inline GridSpec grid_for_box(const Point& lower, const Point& upper,
                             const PipelineOptions& opts) {
  Point lo = lower, hi = upper;
  for (int k = 0; k < lo.dim(); ++k) {
    lo[k] -= opts.margin;
    hi[k] += opts.margin;
  }
  return default_grid(lo, hi, opts.grid_per_axis);
}

inline GridSpec grid_for_instance(const ProblemInstance& inst, const PipelineOptions& opts) {
  return grid_for_box(inst.domain_lower, inst.domain_upper, opts);
}

inline GridSpec grid_for_data(const UnlabeledSet& u, const PipelineOptions& opts) {
  auto [lo, hi] = bounding_box(u.points, opts.margin);
  return default_grid(lo, hi, opts.grid_per_axis);
}

inline DensityModel build_density(const UnlabeledSet& u, const GridSpec& grid,
                                  const PipelineOptions& opts) {
  Schedule s = schedule(static_cast<std::int64_t>(u.m()), grid.dim(), opts.c1, opts.c2);
  if (opts.delta_m) s.delta_m = *opts.delta_m;
  if (opts.h_m) s.h_m = *opts.h_m;
  return fit_kde(u, grid, s, opts.threads);
}

// ---------------------------------------------------------------------------
// Sweep harness
// ---------------------------------------------------------------------------

struct SweepConfig {
  std::int64_t n = 100;
  std::int64_t m = 1000;
  std::vector<std::uint64_t> seeds = {1};
  std::vector<std::string> methods = {"ss_cv", "ss_fixed", "euclidean_cv"};
  double split_fraction = 0.5;
  std::int64_t n_mc = 2000;
  double fixed_alpha = 2.0;
  double fixed_h = 0.0;               // 0 → middle of the automatic bandwidth span
  std::vector<double> alphas;         // empty → default ladder
  std::vector<double> bandwidths;     // empty → automatic per alpha
  PipelineOptions pipeline;
};

struct SweepRow {
  std::uint64_t seed = 0;
  std::string method;
  std::int64_t n = 0, m = 0;
  double alpha = 0.0, h = 0.0;
  double excess_risk = 0.0;
  double uncovered_fraction = 0.0;
  double wall_ms = 0.0;
  std::string status = "ok";
};

/// Data and fitted density shared by every method evaluated at one seed.
struct SeedContext {
  LabeledSet labeled;
  UnlabeledSet unlabeled;
  GridSpec grid;
  DensityModel model;
};

inline SeedContext prepare_seed(const ProblemInstance& inst, const SweepConfig& cfg,
                                std::uint64_t seed) {
  SeedContext ctx;
  Rng rng_l(derive_seed(seed, 1));
  Rng rng_u(derive_seed(seed, 2));
  ctx.labeled = inst.draw_labeled(static_cast<std::size_t>(cfg.n), rng_l);
  ctx.unlabeled = inst.draw_unlabeled(static_cast<std::size_t>(cfg.m), rng_u);
  ctx.grid = grid_for_instance(inst, cfg.pipeline);
  ctx.model = build_density(ctx.unlabeled, ctx.grid, cfg.pipeline);
  return ctx;
}

namespace detail {

inline std::vector<AlphaBandwidths> sweep_groups(const SweepConfig& cfg) {
  std::vector<AlphaBandwidths> groups;
  const std::vector<double> alphas =
      cfg.alphas.empty() ? default_alphas(cfg.m) : cfg.alphas;
  for (double a : alphas) groups.push_back({a, cfg.bandwidths});
  return groups;
}

inline SelectOptions sweep_select_options(const SweepConfig& cfg) {
  SelectOptions so;
  so.conn = cfg.pipeline.conn;
  so.threads = cfg.pipeline.threads;
  so.m_trunc = cfg.pipeline.m_trunc;
  so.snap_queries = cfg.pipeline.snap_queries;
  return so;
}

}  // namespace detail

/// Evaluate one (method, seed) cell. Methods:
///   ss_cv        — validation-selected (alpha, h), trained on T
///   ss_fixed     — fixed (alpha, h), trained on the same T
///   euclidean_cv — validation-selected bandwidth for the Euclidean baseline
/// All three train on the same T/V split so the comparison isolates the
/// metric and the selection rule.
inline SweepRow run_method(const ProblemInstance& inst, const SweepConfig& cfg,
                           const SeedContext& ctx, const std::string& method,
                           std::uint64_t seed) {
  SweepRow row;
  row.seed = seed;
  row.method = method;
  row.n = cfg.n;
  row.m = cfg.m;
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t cv_seed = derive_seed(seed, 3);
  const std::uint64_t mc_seed = derive_seed(seed, 4);
  try {
    if (method == "euclidean_cv") {
      const SelectionReport rep =
          select_euclidean(ctx.labeled, cfg.bandwidths, cfg.split_fraction, cv_seed);
      auto [train, val] = split(ctx.labeled, cfg.split_fraction, cv_seed);
      row.alpha = 0.0;
      row.h = rep.chosen.h;
      const auto st = excess_risk_stats(
          [&](const Point& x) { return predict_baseline(train, x, rep.chosen.h); }, inst,
          cfg.n_mc, mc_seed);
      row.excess_risk = st.excess;
      row.uncovered_fraction = st.uncovered_fraction;
    } else if (method == "ss_cv" || method == "ss_fixed") {
      auto [train, val] = split(ctx.labeled, cfg.split_fraction, cv_seed);
      EstimatorSpec spec;
      if (method == "ss_cv") {
        const SelectionReport rep =
            select_grouped(ctx.labeled, ctx.model, detail::sweep_groups(cfg),
                           cfg.split_fraction, cv_seed, detail::sweep_select_options(cfg));
        spec = rep.chosen;
      } else {
        spec.alpha = cfg.fixed_alpha;
        spec.h = cfg.fixed_h;
      }
      const GeodesicGraph graph =
          build_graph(ctx.model, spec.alpha, cfg.pipeline.conn, cfg.pipeline.threads);
      EstimatorSpec fit_spec = spec;
      if (fit_spec.h <= 0.0) fit_spec.h = 1.0;  // placeholder until auto below
      FittedRegressor reg =
          FittedRegressor::fit(train, graph, fit_spec, cfg.pipeline.m_trunc,
                               cfg.pipeline.threads, cfg.pipeline.snap_queries);
      if (method == "ss_fixed" && cfg.fixed_h <= 0.0) {
        // pick the middle of the automatic bandwidth span for this alpha
        const auto scale = detail::labeled_scale(reg, ctx.labeled);
        spec.h = (scale.any_finite && std::isfinite(scale.min_positive))
                     ? std::sqrt(scale.min_positive * std::max(scale.max_finite,
                                                               scale.min_positive))
                     : 1.0;
      }
      row.alpha = spec.alpha;
      row.h = spec.h;
      const double h = spec.h;
      const auto st = excess_risk_stats([&](const Point& x) { return reg.predict(x, h); }, inst,
                                        cfg.n_mc, mc_seed);
      row.excess_risk = st.excess;
      row.uncovered_fraction = st.uncovered_fraction;
    } else {
      throw config_error("unknown sweep method '" + method + "'");
    }
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
    row.excess_risk = std::numeric_limits<double>::quiet_NaN();
    row.uncovered_fraction = std::numeric_limits<double>::quiet_NaN();
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return row;
}

/// Full sweep: every seed x method cell, one density fit per seed. Partial
/// failures land in the row's status column and the sweep continues.
inline std::vector<SweepRow> run_sweep(const ProblemInstance& inst, const SweepConfig& cfg) {
  if (cfg.seeds.empty()) throw config_error("sweep: at least one seed required");
  std::vector<SweepRow> rows;
  for (const std::uint64_t seed : cfg.seeds) {
    SeedContext ctx;
    bool prepared = false;
    std::string prep_error;
    try {
      ctx = prepare_seed(inst, cfg, seed);
      prepared = true;
    } catch (const std::exception& e) {
      prep_error = std::string("error: ") + e.what();
    }
    for (const auto& method : cfg.methods) {
      if (!prepared) {
        SweepRow row;
        row.seed = seed;
        row.method = method;
        row.n = cfg.n;
        row.m = cfg.m;
        row.status = prep_error;
        row.excess_risk = std::numeric_limits<double>::quiet_NaN();
        row.uncovered_fraction = std::numeric_limits<double>::quiet_NaN();
        rows.push_back(row);
        continue;
      }
      rows.push_back(run_method(inst, cfg, ctx, method, seed));
    }
  }
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "schema_version,seed,method,n,m,alpha,h,excess_risk,uncovered_fraction,wall_ms,status\n";
  char buf[64];
  auto num = [&buf](double v) -> std::string {
    if (std::isnan(v)) return "nan";
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  };
  for (const auto& r : rows) {
    out << 1 << ',' << r.seed << ',' << r.method << ',' << r.n << ',' << r.m << ','
        << num(r.alpha) << ',' << num(r.h) << ',' << num(r.excess_risk) << ','
        << num(r.uncovered_fraction) << ',' << num(r.wall_ms) << ',' << r.status << '\n';
  }
}

inline nlohmann::json predictions_json(const std::vector<Point>& queries,
                                       const std::vector<Prediction>& preds, double alpha,
                                       double h) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < queries.size(); ++i)
    arr.push_back({{"x", queries[i].coords}, {"yhat", preds[i].value},
                   {"covered", preds[i].covered}});
  return nlohmann::json{
      {"schema_version", 1}, {"alpha", alpha}, {"h", h}, {"predictions", arr}};
}

}  // namespace densreg
