#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "densreg/errors.hpp"
#include "densreg/types.hpp"

namespace densreg {

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
  return std::pow(3.14159265358979323846, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// Regular grid over the box [lower, upper]; `resolution[k]` cells per axis,
/// evaluation nodes at cell centers. Node memory is Theta(prod resolution),
/// which is Theta(res^d) for cubic grids — callers pick the resolution.
struct GridSpec {
  Point lower;
  Point upper;
  std::vector<int> resolution;

  int dim() const { return static_cast<int>(resolution.size()); }

  void validate() const {
    const int d = dim();
    if (d < 1) throw validation_error("GridSpec: dimension >= 1 required");
    if (lower.dim() != d || upper.dim() != d)
      throw validation_error("GridSpec: bounds dimension mismatch");
    for (int k = 0; k < d; ++k) {
      if (!(lower[k] < upper[k]))
        throw validation_error("GridSpec: lower < upper required on axis " +
                               std::to_string(k));
      if (resolution[k] < 1)
        throw validation_error("GridSpec: resolution >= 1 required on axis " +
                               std::to_string(k));
    }
  }

  double spacing(int axis) const {
    return (upper[axis] - lower[axis]) / resolution[axis];
  }

  double min_spacing() const {
    double s = spacing(0);
    for (int k = 1; k < dim(); ++k) s = std::min(s, spacing(k));
    return s;
  }

  std::int64_t node_count() const {
    std::int64_t n = 1;
    for (int r : resolution) n *= r;
    return n;
  }

  std::int64_t flat_index(const std::vector<int>& multi) const {
    std::int64_t idx = 0, stride = 1;
    for (int k = 0; k < dim(); ++k) {
      idx += multi[k] * stride;
      stride *= resolution[k];
    }
    return idx;
  }

  std::vector<int> multi_index(std::int64_t flat) const {
    std::vector<int> multi(dim());
    for (int k = 0; k < dim(); ++k) {
      multi[k] = static_cast<int>(flat % resolution[k]);
      flat /= resolution[k];
    }
    return multi;
  }

  double node_coord(int axis, int i) const {
    return lower[axis] + (i + 0.5) * spacing(axis);
  }

  Point node_point(std::int64_t flat) const {
    Point p;
    p.coords.resize(dim());
    for (int k = 0; k < dim(); ++k) {
      p.coords[k] = node_coord(k, static_cast<int>(flat % resolution[k]));
      flat /= resolution[k];
    }
    return p;
  }

  bool contains(const Point& p) const {
    for (int k = 0; k < dim(); ++k)
      if (p[k] < lower[k] || p[k] > upper[k]) return false;
    return true;
  }

  /// Nearest node (clamped to the grid).
  std::int64_t snap(const Point& p) const {
    std::int64_t idx = 0, stride = 1;
    for (int k = 0; k < dim(); ++k) {
      const double t = (p[k] - lower[k]) / spacing(k) - 0.5;
      long i = std::lround(t);
      if (i < 0) i = 0;
      if (i >= resolution[k]) i = resolution[k] - 1;
      idx += i * stride;
      stride *= resolution[k];
    }
    return idx;
  }
};

/// Cubic grid over the given box with per-axis resolution capped so the total
/// node count stays at or below `max_nodes` (default keeps memory sane for
/// exploratory runs; 100 per axis in 2-D).
inline GridSpec default_grid(const Point& lower, const Point& upper, int per_axis = 100,
                             std::int64_t max_nodes = 1000000) {
  GridSpec g;
  g.lower = lower;
  g.upper = upper;
  const int d = lower.dim();
  int res = per_axis;
  while (res > 1 && std::pow(static_cast<double>(res), d) > static_cast<double>(max_nodes))
    --res;
  g.resolution.assign(d, res);
  g.validate();
  return g;
}

/// Bounding box of a point cloud expanded by `margin` on every side.
inline std::pair<Point, Point> bounding_box(const std::vector<Point>& pts, double margin) {
  if (pts.empty()) throw validation_error("bounding_box: empty point set");
  Point lo = pts.front(), hi = pts.front();
  for (const auto& p : pts)
    for (int k = 0; k < p.dim(); ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  for (int k = 0; k < lo.dim(); ++k) {
    lo[k] -= margin;
    hi[k] += margin;
  }
  return {lo, hi};
}

}  // namespace densreg
