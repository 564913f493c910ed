#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "densreg/errors.hpp"

namespace densreg {

/// A point in R^d. Coordinates are unitless positions in the compact domain.
struct Point {
  std::vector<double> coords;

  Point() = default;
  Point(std::initializer_list<double> c) : coords(c) {}
  explicit Point(std::vector<double> c) : coords(std::move(c)) {}

  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](std::size_t i) const { return coords[i]; }
  double& operator[](std::size_t i) { return coords[i]; }
  bool operator==(const Point& o) const { return coords == o.coords; }
};

inline bool point_is_finite(const Point& p) {
  for (double c : p.coords)
    if (!std::isfinite(c)) return false;
  return true;
}

inline double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.coords.size(); ++k) {
    const double d = a.coords[k] - b.coords[k];
    s += d * d;
  }
  return s;
}

inline double euclidean_distance(const Point& a, const Point& b) {
  return std::sqrt(squared_distance(a, b));
}

namespace detail {

inline void check_points(const std::vector<Point>& pts, const char* what) {
  if (pts.empty()) return;
  const int d = pts.front().dim();
  if (d < 1) throw validation_error(std::string(what) + ": points must have dimension >= 1");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].dim() != d)
      throw validation_error(std::string(what) + ": inconsistent dimension at point " +
                             std::to_string(i));
    if (!point_is_finite(pts[i]))
      throw validation_error(std::string(what) + ": non-finite coordinate at point " +
                             std::to_string(i));
  }
}

}  // namespace detail

/// Labeled sample {(X_i, Y_i)}. Construction rejects dimension mismatches and
/// non-finite values; emptiness is checked where a nonempty set is required
/// (validate()), so transient empty sets can exist before use.
struct LabeledSet {
  std::vector<Point> points;
  std::vector<double> labels;

  LabeledSet() = default;
  LabeledSet(std::vector<Point> pts, std::vector<double> ys)
      : points(std::move(pts)), labels(std::move(ys)) {
    detail::check_points(points, "LabeledSet");
    if (points.size() != labels.size())
      throw validation_error("LabeledSet: point/label count mismatch");
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (!std::isfinite(labels[i]))
        throw validation_error("LabeledSet: non-finite label at row " + std::to_string(i));
  }

  std::size_t n() const { return points.size(); }
  int dim() const { return points.empty() ? 0 : points.front().dim(); }

  void validate() const {
    if (points.empty()) throw validation_error("LabeledSet: n >= 1 required");
  }
};

/// Unlabeled sample {X_i}.
struct UnlabeledSet {
  std::vector<Point> points;

  UnlabeledSet() = default;
  explicit UnlabeledSet(std::vector<Point> pts) : points(std::move(pts)) {
    detail::check_points(points, "UnlabeledSet");
  }

  std::size_t m() const { return points.size(); }
  int dim() const { return points.empty() ? 0 : points.front().dim(); }

  void validate() const {
    if (points.empty()) throw validation_error("UnlabeledSet: m >= 1 required");
  }
};

/// Constants describing the distribution class an instance belongs to.
/// This is generator metadata: nothing in the pipeline estimates these from
/// data, they travel with synthetic instances for bookkeeping and reporting.
struct ProblemClass {
  int d = 0;             // ambient dimension
  double lambda0 = 0.0;  // lower density bound on the support
  double Lambda0 = 0.0;  // upper density bound
  double M = 0.0;        // bound on |f*|
  double sigma = 0.0;    // conditional noise standard deviation
  int K = 1;             // maximum number of connected support components
  double tau0 = 0.0;     // condition number (lower bound for hard instances)
  double beta = 1.0;     // smoothness exponent of f* in the warped metric
  double C1 = 1.0;       // smoothness constant of f*
  double eta = 1.0;      // Holder exponent of the density
  double C2 = 1.0;       // Holder constant of the density

  void validate() const {
    if (d < 1) throw validation_error("ProblemClass: d >= 1 required");
    if (!(lambda0 > 0.0) || !(Lambda0 >= lambda0) || !std::isfinite(Lambda0))
      throw validation_error("ProblemClass: need 0 < lambda0 <= Lambda0 < inf");
    if (!(M > 0.0)) throw validation_error("ProblemClass: M > 0 required");
    if (sigma < 0.0) throw validation_error("ProblemClass: sigma >= 0 required");
    if (K < 1) throw validation_error("ProblemClass: K >= 1 required");
    if (!(tau0 > 0.0)) throw validation_error("ProblemClass: tau0 > 0 required");
    if (!(beta > 0.0)) throw validation_error("ProblemClass: beta > 0 required");
    if (!(eta > 0.0)) throw validation_error("ProblemClass: eta > 0 required");
  }
};

/// What to return when a query's kernel neighborhood is empty.
enum class Fallback {
  LabeledMean,  // mean of all training labels, flagged uncovered
  Undefined,    // raise uncovered_error
};

inline std::string to_string(Fallback f) {
  return f == Fallback::LabeledMean ? "labeled_mean" : "undefined";
}

/// Estimator hyperparameters. The bandwidth h is measured in units of the
/// density-sensitive distance, not Euclidean length.
struct EstimatorSpec {
  double alpha = 0.0;
  double h = 1.0;
  Fallback fallback = Fallback::LabeledMean;

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
      throw validation_error("EstimatorSpec: alpha >= 0 required");
    if (!(h > 0.0) || !std::isfinite(h))
      throw validation_error("EstimatorSpec: h > 0 required");
  }
};

}  // namespace densreg
