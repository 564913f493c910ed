#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "densreg/errors.hpp"
#include "densreg/geodesic.hpp"
#include "densreg/parallel.hpp"
#include "densreg/types.hpp"

namespace densreg {

struct Prediction {
  double value = 0.0;
  bool covered = false;
};

/// Boxcar kernel regressor over the plug-in distance: a prediction is the
/// mean label over training points within bandwidth h of the query. The
/// graph must outlive the regressor; one shortest-path field is precomputed
/// per training point and labels never enter the distance computation.
class FittedRegressor {
 public:
  /// With snap_queries, both the training sources and later queries fall back
  /// to the nearest interior node within the graph's snap radius instead of
  /// strict infinite distance.
  static FittedRegressor fit(const LabeledSet& labeled, const GeodesicGraph& g,
                             const EstimatorSpec& spec,
                             std::optional<double> m_trunc = std::nullopt,
                             unsigned threads = 0, bool snap_queries = false) {
    labeled.validate();
    spec.validate();
    if (spec.alpha != g.alpha())
      throw config_error("fit: spec.alpha does not match the graph alpha");
    FittedRegressor r;
    r.spec_ = spec;
    r.labeled_ = labeled;
    r.graph_ = &g;
    r.m_trunc_ = m_trunc;
    r.snap_queries_ = snap_queries;
    double mean = 0.0;
    for (std::size_t i = 0; i < labeled.n(); ++i) mean += labeled.labels[i];
    r.label_mean_ = mean / static_cast<double>(labeled.n());
    r.fields_.resize(labeled.n());
    parallel_for(
        labeled.n(),
        [&](std::size_t i) {
          r.fields_[i] = distances_from(g, labeled.points[i], snap_queries);
        },
        threads);
    return r;
  }

  const EstimatorSpec& spec() const { return spec_; }
  const LabeledSet& labeled() const { return labeled_; }
  const GeodesicGraph& graph() const { return *graph_; }
  std::size_t field_count() const { return fields_.size(); }

  /// Plug-in distance from training point i to a compact graph node.
  double field_distance(std::size_t i, std::int32_t compact) const {
    return fields_[i].dist[compact];
  }

  Prediction predict(const Point& x) const { return predict(x, spec_.h); }

  /// Predict with a bandwidth override (the fields do not depend on h, so
  /// sweeping h over a fitted regressor is cheap).
  Prediction predict(const Point& x, double h) const {
    const std::int32_t c = graph_->snap(x, snap_queries_);
    double sum = 0.0;
    std::size_t count = 0;
    if (c >= 0) {
      for (std::size_t i = 0; i < fields_.size(); ++i) {
        const double d = fields_[i].dist[c];
        if (d <= h) {  // boxcar: K_h(inf) = 0 falls out of the comparison
          sum += labeled_.labels[i];
          ++count;
        }
      }
    }
    Prediction p;
    if (count > 0) {
      p.value = sum / static_cast<double>(count);
      p.covered = true;
    } else {
      if (spec_.fallback == Fallback::Undefined)
        throw uncovered_error("predict: empty kernel neighborhood under Undefined fallback");
      p.value = label_mean_;
      p.covered = false;
    }
    if (m_trunc_) p.value = std::clamp(p.value, -*m_trunc_, *m_trunc_);
    return p;
  }

  void set_snap_queries(bool on) { snap_queries_ = on; }

 private:
  EstimatorSpec spec_;
  LabeledSet labeled_;
  const GeodesicGraph* graph_ = nullptr;
  std::vector<DistanceField> fields_;
  double label_mean_ = 0.0;
  std::optional<double> m_trunc_;
  bool snap_queries_ = false;
};

/// Euclidean boxcar Nadaraya-Watson on the labeled data alone — the
/// supervised comparator. Same fallback semantics as the graph regressor.
inline Prediction predict_baseline(const LabeledSet& labeled, const Point& x, double h,
                                   Fallback fallback = Fallback::LabeledMean,
                                   std::optional<double> m_trunc = std::nullopt) {
  labeled.validate();
  if (!(h > 0.0)) throw validation_error("predict_baseline: h > 0 required");
  const double h2 = h * h;
  double sum = 0.0, total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < labeled.n(); ++i) {
    total += labeled.labels[i];
    if (squared_distance(labeled.points[i], x) <= h2) {
      sum += labeled.labels[i];
      ++count;
    }
  }
  Prediction p;
  if (count > 0) {
    p.value = sum / static_cast<double>(count);
    p.covered = true;
  } else {
    if (fallback == Fallback::Undefined)
      throw uncovered_error("predict_baseline: empty neighborhood under Undefined fallback");
    p.value = total / static_cast<double>(labeled.n());
    p.covered = false;
  }
  if (m_trunc) p.value = std::clamp(p.value, -*m_trunc, *m_trunc);
  return p;
}

using Predictor = std::function<Prediction(const Point&)>;

/// Mean squared prediction error over an evaluation set, summed in index
/// order for reproducibility. Uncovered-query errors propagate.
inline double empirical_risk(const Predictor& predict, const LabeledSet& eval) {
  eval.validate();
  double s = 0.0;
  for (std::size_t i = 0; i < eval.n(); ++i) {
    const double r = predict(eval.points[i]).value - eval.labels[i];
    s += r * r;
  }
  return s / static_cast<double>(eval.n());
}

struct RiskStats {
  double mse = 0.0;
  double uncovered_fraction = 0.0;
};

inline RiskStats empirical_risk_stats(const Predictor& predict, const LabeledSet& eval) {
  eval.validate();
  RiskStats st;
  std::size_t uncovered = 0;
  double s = 0.0;
  for (std::size_t i = 0; i < eval.n(); ++i) {
    const Prediction p = predict(eval.points[i]);
    const double r = p.value - eval.labels[i];
    s += r * r;
    if (!p.covered) ++uncovered;
  }
  st.mse = s / static_cast<double>(eval.n());
  st.uncovered_fraction = static_cast<double>(uncovered) / static_cast<double>(eval.n());
  return st;
}

}  // namespace densreg
