#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "densreg/grid.hpp"
#include "densreg/parallel.hpp"
#include "densreg/types.hpp"

namespace densreg {

/// Theory-driven schedules tied to the unlabeled sample size:
///   eps_m   = c1 (log m)^{-1/2}          nominal sup-norm error
///   delta_m = 2 c2 sqrt(d) (log^2 m / m)^{1/d}   boundary strip half-width
///   h_m     = delta_m / (2 sqrt d)       KDE bandwidth (keeps the support
///                                        dilation inside the delta_m strip)
/// All three are defaults; callers may override h_m independently.
struct Schedule {
  double eps_m = 0.0;
  double delta_m = 0.0;
  double h_m = 0.0;
};

inline Schedule schedule(std::int64_t m, int d, double c1, double c2) {
  if (m < 2) throw std::domain_error("schedule: m >= 2 required (log m must be positive)");
  if (d < 1) throw std::domain_error("schedule: d >= 1 required");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::domain_error("schedule: c1, c2 > 0 required");
  const double logm = std::log(static_cast<double>(m));
  Schedule s;
  s.eps_m = c1 / std::sqrt(logm);
  s.h_m = c2 * std::pow(logm * logm / static_cast<double>(m), 1.0 / d);
  s.delta_m = 2.0 * std::sqrt(static_cast<double>(d)) * s.h_m;
  return s;
}

/// Grid-sampled kernel density estimate with the derived support and
/// interior (eroded-support) masks.
struct DensityModel {
  GridSpec grid;
  std::vector<double> phat;           // per node, >= 0
  std::vector<std::uint8_t> support_mask;   // phat > 0
  std::vector<std::uint8_t> interior_mask;  // support, > 2*delta_m from any gap
  std::int64_t m = 0;                 // unlabeled sample count behind phat
  double h_m = 0.0;
  double delta_m = 0.0;
  double eps_m = 0.0;
  bool bandwidth_warning = false;     // h_m below one grid cell

  bool is_support(std::int64_t node) const { return support_mask[node] != 0; }
  bool is_interior(std::int64_t node) const { return interior_mask[node] != 0; }

  std::int64_t interior_count() const {
    std::int64_t c = 0;
    for (auto v : interior_mask) c += v;
    return c;
  }
};

namespace detail {

// Sentinel for "no seed": large but finite, so the parabola arithmetic in the
// transform needs no special cases. Any real squared node distance is far
// smaller than this.
inline constexpr double kNoSeed = 1e18;

// One-dimensional squared distance transform (lower envelope of parabolas),
// with physical spacing w along the axis.
inline void dt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                  std::vector<double>& z, double w) {
  const int n = static_cast<int>(f.size());
  const double w2 = w * w;
  const double INF = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -INF;
  z[1] = INF;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      s = ((f[q] + w2 * q * q) - (f[v[k]] + w2 * v[k] * v[k])) /
          (2.0 * w2 * (q - v[k]));
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[k]) {
      // replaces the only parabola on the envelope
      v[k] = q;
      z[k] = -INF;
      z[k + 1] = INF;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = INF;
    }
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = w * (q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

// Exact squared Euclidean distance from every node to the nearest seed node
// (seed = true). Separable transform, one pass per axis. Nodes with no seed
// anywhere keep values at or above kNoSeed.
inline std::vector<double> squared_distance_transform(const GridSpec& grid,
                                                      const std::vector<std::uint8_t>& seed) {
  const std::int64_t total = grid.node_count();
  std::vector<double> dist(total);
  for (std::int64_t i = 0; i < total; ++i) dist[i] = seed[i] ? 0.0 : kNoSeed;

  std::int64_t stride = 1;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const int n = grid.resolution[axis];
    const std::int64_t lines = total / n;
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    for (std::int64_t line = 0; line < lines; ++line) {
      const std::int64_t lo = line % stride;
      const std::int64_t hi = line / stride;
      const std::int64_t base = hi * stride * n + lo;
      for (int i = 0; i < n; ++i) f[i] = dist[base + i * stride];
      dt_1d(f, d, v, z, grid.spacing(axis));
      for (int i = 0; i < n; ++i) dist[base + i * stride] = d[i];
    }
    stride *= n;
  }
  return dist;
}

// Sample-to-cell bins (CSR layout) for fast ball counting.
struct CellBins {
  std::vector<std::int64_t> offsets;
  std::vector<std::int32_t> samples;
};

inline CellBins bin_samples(const GridSpec& grid, const std::vector<Point>& pts) {
  const std::int64_t total = grid.node_count();
  CellBins bins;
  bins.offsets.assign(total + 1, 0);
  std::vector<std::int64_t> cell(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cell[i] = grid.snap(pts[i]);
    ++bins.offsets[cell[i] + 1];
  }
  for (std::int64_t c = 0; c < total; ++c) bins.offsets[c + 1] += bins.offsets[c];
  bins.samples.resize(pts.size());
  std::vector<std::int64_t> cursor(bins.offsets.begin(), bins.offsets.end() - 1);
  for (std::size_t i = 0; i < pts.size(); ++i)
    bins.samples[cursor[cell[i]]++] = static_cast<std::int32_t>(i);
  return bins;
}

}  // namespace detail

/// Erode a support mask: a node stays iff it is in the support and its
/// Euclidean distance to the nearest node outside the support exceeds
/// `radius`. With no outside nodes at all the mask is returned unchanged.
inline std::vector<std::uint8_t> interior_from_support(const GridSpec& grid,
                                                       const std::vector<std::uint8_t>& support,
                                                       double radius) {
  std::vector<std::uint8_t> non_support(support.size());
  bool any = false;
  for (std::size_t i = 0; i < support.size(); ++i) {
    non_support[i] = support[i] ? 0 : 1;
    any = any || !support[i];
  }
  if (!any) return support;
  const auto sq = detail::squared_distance_transform(grid, non_support);
  std::vector<std::uint8_t> interior(support.size(), 0);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < support.size(); ++i)
    interior[i] = (support[i] && sq[i] > r2) ? 1 : 0;
  return interior;
}

/// Boxcar kernel density estimate on the grid:
///   phat(x) = #{i : |x - X_i| <= h_m} / (m * v_d * h_m^d)
/// normalized by the unit-ball volume v_d so phat is a probability density.
/// The support mask is {phat > 0}; the interior mask erodes it by 2*delta_m.
inline DensityModel fit_kde(const UnlabeledSet& u, const GridSpec& grid, const Schedule& sched,
                            unsigned threads = 0) {
  grid.validate();
  u.validate();
  if (u.dim() != grid.dim())
    throw validation_error("fit_kde: data dimension does not match the grid");
  if (!(sched.h_m > 0.0)) throw std::domain_error("fit_kde: h_m > 0 required");
  if (!(sched.delta_m > 0.0)) throw std::domain_error("fit_kde: delta_m > 0 required");
  for (std::size_t i = 0; i < u.points.size(); ++i)
    if (!grid.contains(u.points[i]))
      throw std::domain_error("fit_kde: point " + std::to_string(i) + " outside grid bounds");

  const int d = grid.dim();
  const double h = sched.h_m;
  const double norm = 1.0 / (static_cast<double>(u.m()) * unit_ball_volume(d) * std::pow(h, d));
  const auto bins = detail::bin_samples(grid, u.points);

  // per-axis cell window wide enough to cover any point within h of a node
  std::vector<int> reach(d);
  for (int k = 0; k < d; ++k)
    reach[k] = static_cast<int>(std::ceil(h / grid.spacing(k) + 0.5));

  DensityModel model;
  model.grid = grid;
  model.m = static_cast<std::int64_t>(u.m());
  model.h_m = h;
  model.delta_m = sched.delta_m;
  model.eps_m = sched.eps_m;
  model.bandwidth_warning = h < grid.min_spacing();

  const std::int64_t total = grid.node_count();
  model.phat.assign(total, 0.0);
  const double h2 = h * h;

  parallel_for(
      static_cast<std::size_t>(total),
      [&](std::size_t node) {
        const auto center = grid.multi_index(static_cast<std::int64_t>(node));
        Point x = grid.node_point(static_cast<std::int64_t>(node));
        std::int64_t count = 0;
        // iterate the cell window around the node (odometer over d axes)
        std::vector<int> off(d);
        for (int k = 0; k < d; ++k) off[k] = -reach[k];
        while (true) {
          bool in_grid = true;
          std::int64_t cell = 0, stride = 1;
          for (int k = 0; k < d; ++k) {
            const int idx = center[k] + off[k];
            if (idx < 0 || idx >= grid.resolution[k]) {
              in_grid = false;
              break;
            }
            cell += idx * stride;
            stride *= grid.resolution[k];
          }
          if (in_grid) {
            for (std::int64_t s = bins.offsets[cell]; s < bins.offsets[cell + 1]; ++s) {
              if (squared_distance(x, u.points[bins.samples[s]]) <= h2) ++count;
            }
          }
          int k = 0;
          while (k < d && ++off[k] > reach[k]) {
            off[k] = -reach[k];
            ++k;
          }
          if (k == d) break;
        }
        model.phat[node] = count * norm;
      },
      threads);

  model.support_mask.resize(total);
  for (std::int64_t i = 0; i < total; ++i) model.support_mask[i] = model.phat[i] > 0.0 ? 1 : 0;
  model.interior_mask = interior_from_support(grid, model.support_mask, 2.0 * sched.delta_m);
  return model;
}

inline DensityModel fit_kde(const UnlabeledSet& u, const GridSpec& grid, double h_m,
                            double delta_m, double eps_m = 0.1, unsigned threads = 0) {
  Schedule s;
  s.h_m = h_m;
  s.delta_m = delta_m;
  s.eps_m = eps_m;
  return fit_kde(u, grid, s, threads);
}

struct SupErrorResult {
  double value = 0.0;
  bool empty_interior = false;
};

/// max over interior nodes of |truth - phat|; +inf sentinel when the interior
/// is empty. Verification helper only, never on the estimation path.
inline SupErrorResult sup_error(const DensityModel& model,
                                const std::function<double(const Point&)>& truth) {
  SupErrorResult r;
  bool any = false;
  for (std::int64_t i = 0; i < model.grid.node_count(); ++i) {
    if (!model.is_interior(i)) continue;
    any = true;
    r.value = std::max(r.value, std::abs(truth(model.grid.node_point(i)) - model.phat[i]));
  }
  if (!any) {
    r.value = std::numeric_limits<double>::infinity();
    r.empty_interior = true;
  }
  return r;
}

/// Grid quadrature of phat (cell volume times node values).
inline double grid_quadrature(const DensityModel& model) {
  double cell = 1.0;
  for (int k = 0; k < model.grid.dim(); ++k) cell *= model.grid.spacing(k);
  double s = 0.0;
  for (double v : model.phat) s += v;
  return s * cell;
}

inline nlohmann::json to_json(const DensityModel& model) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["grid"] = {{"lower", model.grid.lower.coords},
               {"upper", model.grid.upper.coords},
               {"resolution", model.grid.resolution}};
  j["m"] = model.m;
  j["h_m"] = model.h_m;
  j["delta_m"] = model.delta_m;
  j["eps_m"] = model.eps_m;
  j["bandwidth_warning"] = model.bandwidth_warning;
  j["phat"] = model.phat;
  j["support"] = std::vector<int>(model.support_mask.begin(), model.support_mask.end());
  j["interior"] = std::vector<int>(model.interior_mask.begin(), model.interior_mask.end());
  return j;
}

inline DensityModel density_model_from_json(const nlohmann::json& j) {
  DensityModel model;
  model.grid.lower = Point(j.at("grid").at("lower").get<std::vector<double>>());
  model.grid.upper = Point(j.at("grid").at("upper").get<std::vector<double>>());
  model.grid.resolution = j.at("grid").at("resolution").get<std::vector<int>>();
  model.grid.validate();
  model.m = j.at("m").get<std::int64_t>();
  model.h_m = j.at("h_m").get<double>();
  model.delta_m = j.at("delta_m").get<double>();
  model.eps_m = j.at("eps_m").get<double>();
  model.bandwidth_warning = j.at("bandwidth_warning").get<bool>();
  model.phat = j.at("phat").get<std::vector<double>>();
  const auto sup = j.at("support").get<std::vector<int>>();
  const auto inte = j.at("interior").get<std::vector<int>>();
  model.support_mask.assign(sup.begin(), sup.end());
  model.interior_mask.assign(inte.begin(), inte.end());
  const auto total = static_cast<std::size_t>(model.grid.node_count());
  if (model.phat.size() != total || model.support_mask.size() != total ||
      model.interior_mask.size() != total)
    throw validation_error("density model JSON: array sizes do not match the grid");
  return model;
}

}  // namespace densreg
