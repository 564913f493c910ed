#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <vector>

#include "densreg/density.hpp"
#include "densreg/errors.hpp"
#include "densreg/grid.hpp"
#include "densreg/parallel.hpp"
#include "densreg/types.hpp"

namespace densreg {

/// Neighborhood stencil on the grid. Four-connectivity is axis moves,
/// eight adds the full diagonal set, sixteen adds knight moves (2-D) or
/// their two-axis analogues in higher dimension.
enum class Connectivity { four = 4, eight = 8, sixteen = 16 };

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct DistanceResult {
  double value = kUnreachable;
  bool reachable = false;
};

/// Weighted graph over the interior grid nodes. Edge weights discretize the
/// path integral of 1/phat^alpha by the trapezoid rule:
///   w(u, v) = |u - v| * (phat(u)^-alpha + phat(v)^-alpha) / 2
/// Immutable after build; shared read-only across workers.
class GeodesicGraph {
 public:
  struct Edge {
    std::int32_t to;
    double weight;
  };

  double alpha() const { return alpha_; }
  Connectivity connectivity() const { return conn_; }
  const GridSpec& grid() const { return grid_; }
  double snap_radius() const { return snap_radius_; }

  std::size_t node_count() const { return node_of_.size(); }

  std::int64_t grid_node(std::int32_t compact) const { return node_of_[compact]; }

  /// Compact id of a grid node, or -1 when the node is not interior.
  std::int32_t compact_of(std::int64_t grid_node) const { return compact_of_[grid_node]; }

  Point node_point(std::int32_t compact) const { return grid_.node_point(node_of_[compact]); }

  /// Nearest-node snap. Strict mode (default): a query whose nearest node is
  /// not interior maps to -1, which queries report as unreachable. With
  /// allow_snap, the nearest interior node within `snap_radius` is used.
  std::int32_t snap(const Point& p, bool allow_snap = false) const {
    const std::int64_t node = grid_.snap(p);
    const std::int32_t c = compact_of_[node];
    if (c >= 0 || !allow_snap) return c;
    // bounded search over interior nodes within the snap radius
    std::int32_t best = -1;
    double best_sq = snap_radius_ * snap_radius_;
    for (std::size_t i = 0; i < node_of_.size(); ++i) {
      const double sq = squared_distance(grid_.node_point(node_of_[i]), p);
      if (sq <= best_sq) {
        best_sq = sq;
        best = static_cast<std::int32_t>(i);
      }
    }
    return best;
  }

  const std::vector<Edge>& edges_of(std::int32_t compact, std::size_t& begin,
                                    std::size_t& end) const {
    begin = offsets_[compact];
    end = offsets_[compact + 1];
    return edges_;
  }

  /// `u_index v_index weight` per line, each undirected edge once, with
  /// round-trippable weights.
  void dump_edges(std::ostream& out) const {
    char buf[40];
    for (std::size_t u = 0; u < node_count(); ++u)
      for (std::size_t e = offsets_[u]; e < offsets_[u + 1]; ++e)
        if (static_cast<std::int32_t>(u) < edges_[e].to) {
          std::snprintf(buf, sizeof(buf), "%.17g", edges_[e].weight);
          out << u << ' ' << edges_[e].to << ' ' << buf << '\n';
        }
  }

  friend GeodesicGraph build_graph(const DensityModel&, double, Connectivity, unsigned);

 private:
  GridSpec grid_;
  double alpha_ = 0.0;
  Connectivity conn_ = Connectivity::eight;
  double snap_radius_ = 0.0;
  std::vector<std::int64_t> node_of_;    // compact -> grid flat index
  std::vector<std::int32_t> compact_of_;  // grid flat index -> compact or -1
  std::vector<std::size_t> offsets_;      // CSR
  std::vector<Edge> edges_;
};

namespace detail {

struct Offset {
  std::vector<int> step;
  // knight moves only: two nodes flanking the segment midpoint, both of which
  // must be interior for the edge to exist (no tunnelling through walls)
  std::vector<int> way1, way2;
  bool has_waypoints = false;
};

inline std::vector<Offset> neighbor_offsets(int d, Connectivity conn) {
  std::vector<Offset> out;
  if (d == 1) {
    Offset o;
    o.step = {1};
    out.push_back(o);
    return out;
  }
  if (conn == Connectivity::four) {
    for (int k = 0; k < d; ++k) {
      Offset o;
      o.step.assign(d, 0);
      o.step[k] = 1;
      out.push_back(o);
    }
    return out;
  }
  // all nonzero offsets in {-1,0,1}^d, one direction per undirected pair
  std::vector<int> v(d, -1);
  while (true) {
    bool nonzero = false, lead_positive = false;
    for (int k = d - 1; k >= 0; --k)
      if (v[k] != 0) {
        nonzero = true;
        lead_positive = v[k] > 0;
        break;
      }
    if (nonzero && lead_positive) {
      Offset o;
      o.step = v;
      out.push_back(o);
    }
    int k = 0;
    while (k < d && ++v[k] > 1) {
      v[k] = -1;
      ++k;
    }
    if (k == d) break;
  }
  if (conn == Connectivity::sixteen) {
    // knight moves: +-2 on one axis, +-1 on another
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        if (a == b) continue;
        for (int sa : {2, -2})
          for (int sb : {1, -1}) {
            std::vector<int> s(d, 0);
            s[a] = sa;
            s[b] = sb;
            // canonical direction: first nonzero from the back positive
            bool lead_positive = false;
            for (int k = d - 1; k >= 0; --k)
              if (s[k] != 0) {
                lead_positive = s[k] > 0;
                break;
              }
            if (!lead_positive) continue;
            Offset o;
            o.step = s;
            o.way1.assign(d, 0);
            o.way1[a] = sa / 2;
            o.way2 = o.way1;
            o.way2[b] = sb;
            o.has_waypoints = true;
            out.push_back(o);
          }
      }
  }
  return out;
}

}  // namespace detail

/// Build the shortest-path graph realizing the plug-in distance at the given
/// density sensitivity. Throws when the model has no interior node. alpha = 0
/// yields exactly Euclidean edge lengths.
inline GeodesicGraph build_graph(const DensityModel& model, double alpha,
                                 Connectivity conn = Connectivity::eight,
                                 unsigned threads = 0) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw validation_error("build_graph: alpha >= 0 required");
  GeodesicGraph g;
  g.grid_ = model.grid;
  g.alpha_ = alpha;
  g.conn_ = conn;
  g.snap_radius_ = 2.0 * model.delta_m;
  const std::int64_t total = model.grid.node_count();
  g.compact_of_.assign(total, -1);
  for (std::int64_t i = 0; i < total; ++i) {
    if (model.is_interior(i)) {
      g.compact_of_[i] = static_cast<std::int32_t>(g.node_of_.size());
      g.node_of_.push_back(i);
    }
  }
  if (g.node_of_.empty()) throw validation_error("build_graph: empty interior, no graph");

  const int d = model.grid.dim();
  const auto offsets = detail::neighbor_offsets(d, conn);

  // physical length of each stencil step
  std::vector<double> step_len(offsets.size());
  for (std::size_t o = 0; o < offsets.size(); ++o) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
      const double dx = offsets[o].step[k] * model.grid.spacing(k);
      s += dx * dx;
    }
    step_len[o] = std::sqrt(s);
  }

  // 1/phat^alpha per interior node
  std::vector<double> inv_pow(g.node_of_.size());
  parallel_for(
      g.node_of_.size(),
      [&](std::size_t c) {
        const double p = model.phat[g.node_of_[c]];
        if (!(p > 0.0)) {
          assert(false && "interior node with phat == 0");
          throw std::logic_error("build_graph: interior node with phat == 0");
        }
        inv_pow[c] = alpha == 0.0 ? 1.0 : std::pow(p, -alpha);
      },
      threads);

  const auto& res = model.grid.resolution;
  auto neighbor_compact = [&](const std::vector<int>& multi,
                              const std::vector<int>& step) -> std::int32_t {
    std::int64_t flat = 0, stride = 1;
    for (int k = 0; k < d; ++k) {
      const int idx = multi[k] + step[k];
      if (idx < 0 || idx >= res[k]) return -1;
      flat += idx * stride;
      stride *= res[k];
    }
    return g.compact_of_[flat];
  };

  // count then fill (CSR, undirected: each pair stored in both rows)
  std::vector<std::vector<GeodesicGraph::Edge>> rows(g.node_of_.size());
  parallel_for(
      g.node_of_.size(),
      [&](std::size_t c) {
        const auto multi = model.grid.multi_index(g.node_of_[c]);
        auto& row = rows[c];
        for (std::size_t o = 0; o < offsets.size(); ++o) {
          for (int dir : {1, -1}) {
            std::vector<int> step(d);
            for (int k = 0; k < d; ++k) step[k] = dir * offsets[o].step[k];
            const std::int32_t nb = neighbor_compact(multi, step);
            if (nb < 0) continue;
            if (offsets[o].has_waypoints) {
              std::vector<int> w1(d), w2(d);
              for (int k = 0; k < d; ++k) {
                w1[k] = dir * offsets[o].way1[k];
                w2[k] = dir * offsets[o].way2[k];
              }
              if (neighbor_compact(multi, w1) < 0 || neighbor_compact(multi, w2) < 0)
                continue;
            }
            const double w =
                step_len[o] * 0.5 * (inv_pow[c] + inv_pow[static_cast<std::size_t>(nb)]);
            row.push_back({nb, w});
          }
        }
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.to < b.to; });
      },
      threads);

  g.offsets_.assign(g.node_of_.size() + 1, 0);
  for (std::size_t c = 0; c < rows.size(); ++c) g.offsets_[c + 1] = g.offsets_[c] + rows[c].size();
  g.edges_.resize(g.offsets_.back());
  for (std::size_t c = 0; c < rows.size(); ++c)
    std::copy(rows[c].begin(), rows[c].end(), g.edges_.begin() + g.offsets_[c]);
  return g;
}

/// Single-source shortest-path field, indexed by compact node id.
struct DistanceField {
  std::vector<double> dist;  // kUnreachable where no path exists

  DistanceResult at(std::int32_t compact) const {
    if (compact < 0) return {kUnreachable, false};
    const double v = dist[compact];
    return {v, std::isfinite(v)};
  }
};

inline DistanceField distances_from_compact(const GeodesicGraph& g, std::int32_t source) {
  DistanceField field;
  field.dist.assign(g.node_count(), kUnreachable);
  if (source < 0) return field;
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  field.dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (du > field.dist[u]) continue;
    std::size_t begin, end;
    const auto& edges = g.edges_of(u, begin, end);
    for (std::size_t e = begin; e < end; ++e) {
      const double alt = du + edges[e].weight;
      if (alt < field.dist[edges[e].to]) {
        field.dist[edges[e].to] = alt;
        heap.push({alt, edges[e].to});
      }
    }
  }
  return field;
}

/// Field of plug-in distances from an arbitrary source point. A source whose
/// snap fails yields an all-unreachable field.
inline DistanceField distances_from(const GeodesicGraph& g, const Point& source,
                                    bool allow_snap = false) {
  return distances_from_compact(g, g.snap(source, allow_snap));
}

/// Plug-in distance between two query points; infinity when either endpoint
/// leaves the interior (strict mode) or no interior path connects them.
inline DistanceResult geodesic_distance(const GeodesicGraph& g, const Point& a, const Point& b,
                                        bool allow_snap = false) {
  const std::int32_t ca = g.snap(a, allow_snap);
  const std::int32_t cb = g.snap(b, allow_snap);
  if (ca < 0 || cb < 0) return {kUnreachable, false};
  if (ca == cb) return {0.0, true};
  // Dijkstra with early exit at the target
  std::vector<double> dist(g.node_count(), kUnreachable);
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[ca] = 0.0;
  heap.push({0.0, ca});
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (u == cb) return {du, true};
    if (du > dist[u]) continue;
    std::size_t begin, end;
    const auto& edges = g.edges_of(u, begin, end);
    for (std::size_t e = begin; e < end; ++e) {
      const double alt = du + edges[e].weight;
      if (alt < dist[edges[e].to]) {
        dist[edges[e].to] = alt;
        heap.push({alt, edges[e].to});
      }
    }
  }
  return {kUnreachable, false};
}

/// Exact shortest-path weight by exhaustive enumeration of simple paths.
/// Refuses graphs with more than 16 nodes.
inline double oracle_distance(const GeodesicGraph& g, std::int32_t a, std::int32_t b) {
  if (g.node_count() > 16)
    throw std::domain_error("oracle_distance: refused, graph has more than 16 nodes");
  if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= g.node_count() ||
      static_cast<std::size_t>(b) >= g.node_count())
    throw std::domain_error("oracle_distance: node out of range");
  if (a == b) return 0.0;
  double best = kUnreachable;
  std::vector<bool> on_path(g.node_count(), false);
  // depth-first over simple paths
  std::function<void(std::int32_t, double)> walk = [&](std::int32_t u, double acc) {
    if (acc >= best) return;
    if (u == b) {
      best = acc;
      return;
    }
    on_path[u] = true;
    std::size_t begin, end;
    const auto& edges = g.edges_of(u, begin, end);
    for (std::size_t e = begin; e < end; ++e)
      if (!on_path[edges[e].to]) walk(edges[e].to, acc + edges[e].weight);
    on_path[u] = false;
  };
  walk(a, 0.0);
  return best;
}

}  // namespace densreg
