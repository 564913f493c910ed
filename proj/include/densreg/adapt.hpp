#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <json.hpp>

#include "densreg/density.hpp"
#include "densreg/errors.hpp"
#include "densreg/geodesic.hpp"
#include "densreg/regress.hpp"
#include "densreg/rng.hpp"
#include "densreg/synth.hpp"
#include "densreg/types.hpp"

namespace densreg {

/// Finite candidate set A x H for validation selection. A must contain 0 so
/// the sweep always includes the no-assumption estimator.
struct CandidateGrid {
  std::vector<double> alphas;
  std::vector<double> bandwidths;
  double split_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (alphas.empty() || bandwidths.empty())
      throw validation_error("CandidateGrid: |A| >= 1 and |H| >= 1 required");
    if (std::none_of(alphas.begin(), alphas.end(), [](double a) { return a == 0.0; }))
      throw validation_error("CandidateGrid: A must contain alpha = 0");
    for (double a : alphas)
      if (!(a >= 0.0)) throw validation_error("CandidateGrid: alphas must be >= 0");
    for (double h : bandwidths)
      if (!(h > 0.0)) throw validation_error("CandidateGrid: bandwidths must be > 0");
    if (!(split_fraction > 0.0) || !(split_fraction < 1.0))
      throw validation_error("CandidateGrid: split_fraction in (0, 1) required");
  }
};

struct CandidateRisk {
  double alpha = 0.0;
  double h = 0.0;
  double risk = 0.0;  // +inf marks a failed candidate
};

struct SelectionReport {
  EstimatorSpec chosen;
  std::vector<CandidateRisk> table;  // lexicographic (alpha, h) order
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::uint64_t seed = 0;
  double split_fraction = 0.5;
};

/// Index of the winning candidate: smallest risk, ties broken toward the
/// lexicographically smallest (alpha, h).
inline std::size_t argmin_candidate(const std::vector<CandidateRisk>& table) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const bool better = table[i].risk < table[best].risk;
    const bool tie = table[i].risk == table[best].risk &&
                     (table[i].alpha < table[best].alpha ||
                      (table[i].alpha == table[best].alpha && table[i].h < table[best].h));
    if (better || tie) best = i;
  }
  return best;
}

/// Disjoint, exhaustive, uniformly random split; |T| = round(fraction * n).
inline std::pair<LabeledSet, LabeledSet> split(const LabeledSet& labeled, double fraction,
                                               std::uint64_t seed) {
  labeled.validate();
  const std::size_t n = labeled.n();
  if (n < 2) throw validation_error("split: n >= 2 required");
  const auto n_train = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    throw validation_error("split: fraction yields an empty training or validation set");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x5917));
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.bounded(i + 1)]);
  auto take = [&](std::size_t begin, std::size_t end) {
    std::vector<Point> pts;
    std::vector<double> ys;
    pts.reserve(end - begin);
    ys.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      pts.push_back(labeled.points[order[i]]);
      ys.push_back(labeled.labels[order[i]]);
    }
    return LabeledSet(std::move(pts), std::move(ys));
  };
  return {take(0, n_train), take(n_train, n)};
}

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1)
    throw validation_error("log_spaced: need 0 < lo <= hi and count >= 1");
  std::vector<double> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(std::sqrt(lo * hi));
    return out;
  }
  const double step = (std::log(hi) - std::log(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) out.push_back(std::exp(std::log(lo) + step * i));
  return out;
}

/// Default sensitivity ladder {0, 1, 2, 4, 8, log m}.
inline std::vector<double> default_alphas(std::int64_t m) {
  std::vector<double> a = {0.0, 1.0, 2.0, 4.0, 8.0};
  if (m >= 2) a.push_back(std::log(static_cast<double>(m)));
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end(),
                      [](double x, double y) { return std::abs(x - y) < 1e-9; }),
          a.end());
  return a;
}

namespace detail {

// Distance scale of the labeled sample under a fitted regressor's metric:
// smallest positive and largest finite pairwise plug-in distance between
// training sources and all labeled points.
struct DistanceScale {
  double min_positive = std::numeric_limits<double>::infinity();
  double max_finite = 0.0;
  bool any_finite = false;
};

inline DistanceScale labeled_scale(const FittedRegressor& reg, const LabeledSet& all) {
  DistanceScale s;
  const auto& g = reg.graph();
  for (std::size_t j = 0; j < all.n(); ++j) {
    const std::int32_t c = g.snap(all.points[j]);
    if (c < 0) continue;
    for (std::size_t i = 0; i < reg.field_count(); ++i) {
      const double v = reg.field_distance(i, c);
      if (!std::isfinite(v)) continue;
      s.any_finite = true;
      s.max_finite = std::max(s.max_finite, v);
      if (v > 0.0) s.min_positive = std::min(s.min_positive, v);
    }
  }
  return s;
}

}  // namespace detail

struct SelectOptions {
  Fallback fallback = Fallback::LabeledMean;
  Connectivity conn = Connectivity::eight;
  unsigned threads = 0;
  int auto_bandwidth_count = 8;
  std::optional<double> m_trunc;
  bool snap_queries = false;  // selection evaluates the estimator as deployed
};

/// Candidates grouped per alpha; a group with an empty bandwidth list gets
/// log-spaced bandwidths spanning the labeled sample's own distance scale
/// under that alpha.
struct AlphaBandwidths {
  double alpha = 0.0;
  std::vector<double> bandwidths;
};

/// Validation-risk selection over grouped candidates. One graph is built per
/// alpha and reused across bandwidths; a candidate whose validation pass
/// raises uncovered-query errors scores +inf and is never chosen unless all
/// candidates fail, which is a selection error.
inline SelectionReport select_grouped(const LabeledSet& labeled, const DensityModel& model,
                                      std::vector<AlphaBandwidths> groups, double split_fraction,
                                      std::uint64_t seed, const SelectOptions& opts = {}) {
  labeled.validate();
  if (groups.empty()) throw validation_error("select: no candidates");
  std::sort(groups.begin(), groups.end(),
            [](const AlphaBandwidths& a, const AlphaBandwidths& b) { return a.alpha < b.alpha; });
  for (auto& g : groups) std::sort(g.bandwidths.begin(), g.bandwidths.end());

  auto [train, val] = split(labeled, split_fraction, seed);
  SelectionReport report;
  report.n_train = train.n();
  report.n_val = val.n();
  report.seed = seed;
  report.split_fraction = split_fraction;

  for (const auto& group : groups) {
    const GeodesicGraph graph = build_graph(model, group.alpha, opts.conn, opts.threads);
    EstimatorSpec spec;
    spec.alpha = group.alpha;
    spec.h = 1.0;  // placeholder, overridden per candidate
    spec.fallback = opts.fallback;
    const FittedRegressor reg = FittedRegressor::fit(train, graph, spec, opts.m_trunc,
                                                     opts.threads, opts.snap_queries);

    std::vector<double> bandwidths = group.bandwidths;
    if (bandwidths.empty()) {
      const auto scale = detail::labeled_scale(reg, labeled);
      if (scale.any_finite && scale.min_positive < std::numeric_limits<double>::infinity())
        bandwidths = log_spaced(scale.min_positive, std::max(scale.max_finite, scale.min_positive),
                                opts.auto_bandwidth_count);
      else
        bandwidths = {1.0};  // metric degenerate for this alpha; keep the sweep total
    }

    for (double h : bandwidths) {
      CandidateRisk row{group.alpha, h, std::numeric_limits<double>::infinity()};
      try {
        double s = 0.0;
        for (std::size_t i = 0; i < val.n(); ++i) {
          const double r = reg.predict(val.points[i], h).value - val.labels[i];
          s += r * r;
        }
        row.risk = s / static_cast<double>(val.n());
      } catch (const uncovered_error&) {
        row.risk = std::numeric_limits<double>::infinity();
      }
      report.table.push_back(row);
    }
  }

  const std::size_t best = argmin_candidate(report.table);
  if (!std::isfinite(report.table[best].risk))
    throw validation_error("select: every candidate failed (all validation risks infinite)");
  report.chosen.alpha = report.table[best].alpha;
  report.chosen.h = report.table[best].h;
  report.chosen.fallback = opts.fallback;
  return report;
}

/// Rectangle-grid selection per the candidate-grid contract.
inline SelectionReport select(const LabeledSet& labeled, const DensityModel& model,
                              const CandidateGrid& grid, const SelectOptions& opts = {}) {
  grid.validate();
  std::vector<AlphaBandwidths> groups;
  groups.reserve(grid.alphas.size());
  for (double a : grid.alphas) groups.push_back({a, grid.bandwidths});
  return select_grouped(labeled, model, std::move(groups), grid.split_fraction, grid.seed, opts);
}

/// Default-ladder selection with per-alpha automatic bandwidths.
inline SelectionReport select_auto(const LabeledSet& labeled, const DensityModel& model,
                                   double split_fraction, std::uint64_t seed,
                                   const SelectOptions& opts = {}) {
  std::vector<AlphaBandwidths> groups;
  for (double a : default_alphas(model.m)) groups.push_back({a, {}});
  return select_grouped(labeled, model, std::move(groups), split_fraction, seed, opts);
}

/// Validation-risk bandwidth selection for the Euclidean supervised baseline.
/// Bandwidths default to a log-spaced span of the labeled pairwise distances.
inline SelectionReport select_euclidean(const LabeledSet& labeled,
                                        std::vector<double> bandwidths, double split_fraction,
                                        std::uint64_t seed,
                                        Fallback fallback = Fallback::LabeledMean,
                                        int auto_count = 8) {
  labeled.validate();
  auto [train, val] = split(labeled, split_fraction, seed);
  if (bandwidths.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < labeled.n(); ++i)
      for (std::size_t j = i + 1; j < labeled.n(); ++j) {
        const double v = euclidean_distance(labeled.points[i], labeled.points[j]);
        hi = std::max(hi, v);
        if (v > 0.0) lo = std::min(lo, v);
      }
    if (!(hi > 0.0) || !std::isfinite(lo)) {
      bandwidths = {1.0};
    } else {
      bandwidths = log_spaced(lo, hi, auto_count);
    }
  }
  std::sort(bandwidths.begin(), bandwidths.end());

  SelectionReport report;
  report.n_train = train.n();
  report.n_val = val.n();
  report.seed = seed;
  report.split_fraction = split_fraction;
  for (double h : bandwidths) {
    CandidateRisk row{0.0, h, std::numeric_limits<double>::infinity()};
    try {
      double s = 0.0;
      for (std::size_t i = 0; i < val.n(); ++i) {
        const double r = predict_baseline(train, val.points[i], h, fallback).value - val.labels[i];
        s += r * r;
      }
      row.risk = s / static_cast<double>(val.n());
    } catch (const uncovered_error&) {
    }
    report.table.push_back(row);
  }
  const std::size_t best = argmin_candidate(report.table);
  if (!std::isfinite(report.table[best].risk))
    throw validation_error("select_euclidean: every candidate failed");
  report.chosen = EstimatorSpec{0.0, report.table[best].h, fallback};
  return report;
}

/// Monte-Carlo excess risk against the instance ground truth:
/// mean over fresh draws X ~ P of (pred(X) - f*(X))^2.
inline double excess_risk(const std::function<double(const Point&)>& predict,
                          const ProblemInstance& instance, std::int64_t n_mc,
                          std::uint64_t seed) {
  if (n_mc < 1) throw std::domain_error("excess_risk: n_mc >= 1 required");
  Rng rng(derive_seed(seed, 0xec5));
  double s = 0.0;
  for (std::int64_t i = 0; i < n_mc; ++i) {
    const Point x = instance.sample_x(rng);
    const double r = predict(x) - instance.f_star(x);
    s += r * r;
  }
  return s / static_cast<double>(n_mc);
}

struct ExcessRiskStats {
  double excess = 0.0;
  double uncovered_fraction = 0.0;
};

inline ExcessRiskStats excess_risk_stats(const Predictor& predict,
                                         const ProblemInstance& instance, std::int64_t n_mc,
                                         std::uint64_t seed) {
  if (n_mc < 1) throw std::domain_error("excess_risk: n_mc >= 1 required");
  Rng rng(derive_seed(seed, 0xec5));
  ExcessRiskStats st;
  std::int64_t uncovered = 0;
  double s = 0.0;
  for (std::int64_t i = 0; i < n_mc; ++i) {
    const Point x = instance.sample_x(rng);
    const Prediction p = predict(x);
    const double r = p.value - instance.f_star(x);
    s += r * r;
    if (!p.covered) ++uncovered;
  }
  st.excess = s / static_cast<double>(n_mc);
  st.uncovered_fraction = static_cast<double>(uncovered) / static_cast<double>(n_mc);
  return st;
}

inline nlohmann::json to_json(const SelectionReport& report) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : report.table) {
    nlohmann::json r = {{"alpha", row.alpha}, {"h", row.h}};
    if (std::isfinite(row.risk))
      r["risk"] = row.risk;
    else
      r["risk"] = nullptr;  // JSON has no infinity; null marks a failed candidate
    table.push_back(r);
  }
  return nlohmann::json{{"schema_version", 1},
                        {"chosen", {{"alpha", report.chosen.alpha}, {"h", report.chosen.h}}},
                        {"table", table},
                        {"n_train", report.n_train},
                        {"n_val", report.n_val},
                        {"seed", report.seed},
                        {"split_fraction", report.split_fraction}};
}

}  // namespace densreg
