#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "densreg/density.hpp"
#include "densreg/errors.hpp"
#include "densreg/geodesic.hpp"
#include "densreg/grid.hpp"
#include "densreg/rng.hpp"
#include "densreg/types.hpp"

namespace densreg {

/// Ground-truth problem: samplers, the regression function, the marginal
/// density, and the class constants the construction certifies.
struct ProblemInstance {
  ProblemClass pclass;
  std::function<Point(Rng&)> sample_x;
  std::function<double(const Point&, Rng&)> sample_y;
  std::function<double(const Point&)> f_star;
  std::function<double(const Point&)> p_true;
  Point domain_lower, domain_upper;  // bounding box of the support
  nlohmann::json support_descriptor;

  LabeledSet draw_labeled(std::size_t n, Rng& rng) const {
    std::vector<Point> pts;
    std::vector<double> ys;
    pts.reserve(n);
    ys.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Point x = sample_x(rng);
      ys.push_back(sample_y(x, rng));
      pts.push_back(std::move(x));
    }
    return LabeledSet(std::move(pts), std::move(ys));
  }

  UnlabeledSet draw_unlabeled(std::size_t m, Rng& rng) const {
    std::vector<Point> pts;
    pts.reserve(m);
    for (std::size_t i = 0; i < m; ++i) pts.push_back(sample_x(rng));
    return UnlabeledSet(std::move(pts));
  }
};

// ---------------------------------------------------------------------------
// Uniform components: piecewise-constant regression over disjoint boxes.
// ---------------------------------------------------------------------------

struct Box {
  Point lower, upper;

  void validate() const {
    if (lower.dim() < 1 || lower.dim() != upper.dim())
      throw validation_error("Box: bound dimension mismatch");
    for (int k = 0; k < lower.dim(); ++k)
      if (!(lower[k] < upper[k])) throw validation_error("Box: lower < upper required");
  }

  double volume() const {
    double v = 1.0;
    for (int k = 0; k < lower.dim(); ++k) v *= upper[k] - lower[k];
    return v;
  }

  bool contains(const Point& p) const {
    for (int k = 0; k < lower.dim(); ++k)
      if (p[k] < lower[k] || p[k] > upper[k]) return false;
    return true;
  }
};

namespace detail {

inline bool boxes_overlap(const Box& a, const Box& b) {
  for (int k = 0; k < a.lower.dim(); ++k)
    if (a.upper[k] <= b.lower[k] || b.upper[k] <= a.lower[k]) return false;
  return true;
}

inline double box_gap(const Box& a, const Box& b) {
  double s = 0.0;
  for (int k = 0; k < a.lower.dim(); ++k) {
    const double g = std::max({0.0, b.lower[k] - a.upper[k], a.lower[k] - b.upper[k]});
    s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace detail

inline ProblemInstance make_uniform_components(const std::vector<Box>& boxes,
                                               const std::vector<double>& labels,
                                               double sigma) {
  if (boxes.empty() || boxes.size() != labels.size())
    throw validation_error("make_uniform_components: one label per box required");
  if (sigma < 0.0) throw validation_error("make_uniform_components: sigma >= 0 required");
  const int d = boxes.front().lower.dim();
  for (const auto& b : boxes) {
    b.validate();
    if (b.lower.dim() != d)
      throw validation_error("make_uniform_components: box dimension mismatch");
  }
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      if (detail::boxes_overlap(boxes[i], boxes[j]))
        throw validation_error("make_uniform_components: boxes " + std::to_string(i) + " and " +
                               std::to_string(j) + " overlap");

  std::vector<double> cum;
  double total = 0.0;
  for (const auto& b : boxes) {
    total += b.volume();
    cum.push_back(total);
  }
  const double lambda = 1.0 / total;

  double max_abs = 0.0, min_gap = std::numeric_limits<double>::infinity(),
         min_side = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(labels[i]));
    for (int k = 0; k < d; ++k)
      min_side = std::min(min_side, boxes[i].upper[k] - boxes[i].lower[k]);
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      min_gap = std::min(min_gap, detail::box_gap(boxes[i], boxes[j]));
  }

  ProblemInstance inst;
  inst.pclass.d = d;
  inst.pclass.lambda0 = lambda;
  inst.pclass.Lambda0 = lambda;
  inst.pclass.M = max_abs > 0.0 ? max_abs : 1.0;  // nominal bound for all-zero labels
  inst.pclass.sigma = sigma;
  inst.pclass.K = static_cast<int>(boxes.size());
  inst.pclass.tau0 = boxes.size() > 1 && std::isfinite(min_gap) && min_gap > 0.0
                         ? 0.5 * min_gap
                         : 0.25 * min_side;
  inst.pclass.validate();

  auto shared_boxes = std::make_shared<std::vector<Box>>(boxes);
  auto shared_labels = std::make_shared<std::vector<double>>(labels);
  auto shared_cum = std::make_shared<std::vector<double>>(cum);

  inst.p_true = [shared_boxes, lambda](const Point& x) {
    for (const auto& b : *shared_boxes)
      if (b.contains(x)) return lambda;
    return 0.0;
  };
  inst.f_star = [shared_boxes, shared_labels](const Point& x) {
    for (std::size_t i = 0; i < shared_boxes->size(); ++i)
      if ((*shared_boxes)[i].contains(x)) return (*shared_labels)[i];
    return 0.0;
  };
  inst.sample_x = [shared_boxes, shared_cum, total, d](Rng& rng) {
    const double t = rng.uniform() * total;
    std::size_t i = 0;
    while (i + 1 < shared_cum->size() && t >= (*shared_cum)[i]) ++i;
    const Box& b = (*shared_boxes)[i];
    Point p;
    p.coords.resize(d);
    for (int k = 0; k < d; ++k) p.coords[k] = rng.uniform(b.lower[k], b.upper[k]);
    return p;
  };
  const auto f = inst.f_star;
  inst.sample_y = [f, sigma](const Point& x, Rng& rng) {
    return f(x) + (sigma > 0.0 ? sigma * rng.normal() : 0.0);
  };

  Point lo = boxes.front().lower, hi = boxes.front().upper;
  for (const auto& b : boxes)
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], b.lower[k]);
      hi[k] = std::max(hi[k], b.upper[k]);
    }
  inst.domain_lower = lo;
  inst.domain_upper = hi;

  nlohmann::json jb = nlohmann::json::array();
  for (const auto& b : boxes)
    jb.push_back({{"lower", b.lower.coords}, {"upper", b.upper.coords}});
  inst.support_descriptor = {{"kind", "uniform_components"},
                             {"boxes", jb},
                             {"labels", labels},
                             {"lambda", lambda},
                             {"min_gap", std::isfinite(min_gap) ? min_gap : -1.0},
                             {"sigma", sigma}};
  return inst;
}

// ---------------------------------------------------------------------------
// Hard instance: two slabs joined by a lattice of hemispherical bumps whose
// ownership is encoded by a bit vector. The condition number shrinks like
// 1/l, so the separation is invisible to labeled data alone.
// ---------------------------------------------------------------------------

/// Root of (1-2r)^d - (4d/sqrt(pi)) r = 1/2 in (0, 1/4).
inline double solve_bump_radius(int d) {
  auto F = [d](double r) {
    return std::pow(1.0 - 2.0 * r, d) - (4.0 * d / std::sqrt(3.14159265358979323846)) * r - 0.5;
  };
  double lo = 0.0, hi = 0.25;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Unit bump profile: a dome of radius 1/2 - r on a fillet of radius r.
/// Height 1/2 at the center, 0 beyond radius 1/2.
inline double bump_profile(double rho, double r) {
  rho = std::abs(rho);
  if (rho < 0.5 - r) return r + std::sqrt((0.5 - r) * (0.5 - r) - rho * rho);
  if (rho < 0.5) {
    const double t = 0.5 - rho;
    return r - std::sqrt(r * r - t * t);
  }
  return 0.0;
}

/// The closed-form minimal separation between a unit bump surface and its
/// vertical translate by r (realized between the dome arc and the shifted
/// fillet arc).
inline double bump_unit_gap(double r) { return std::sqrt(0.25 + r * r) - 0.5; }

inline std::int64_t lower_bound_bumps_per_axis(std::int64_t n_design, int d, double c0) {
  return static_cast<std::int64_t>(
      std::floor(c0 * std::pow(static_cast<double>(n_design), 1.0 / (d - 1))));
}

inline std::int64_t lower_bound_q(std::int64_t n_design, int d, double c0) {
  const std::int64_t l = lower_bound_bumps_per_axis(n_design, d, c0);
  std::int64_t q = 1;
  for (int k = 0; k < d - 1; ++k) q *= l;
  return q;
}

inline std::vector<std::uint8_t> omega_all_ones(std::int64_t q) {
  return std::vector<std::uint8_t>(static_cast<std::size_t>(q), 1);
}

inline std::vector<std::uint8_t> omega_from_seed(std::int64_t q, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xb17));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(q));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
  return bits;
}

/// Point-set geometry of the hard instance, exposed separately so tests can
/// probe membership, gaps and measures directly.
class LowerBoundGeometry {
 public:
  LowerBoundGeometry(std::int64_t n_design, int d, std::vector<std::uint8_t> omega, double M,
                     double c0, std::optional<double> r_opt)
      : d_(d), M_(M), c0_(c0), omega_(std::move(omega)) {
    if (d < 2) throw validation_error("lower-bound instance: unsupported for d < 2");
    if (n_design < 1) throw validation_error("lower-bound instance: n_design >= 1 required");
    if (!(c0 >= 3.0)) throw validation_error("lower-bound instance: c0 >= 3 required");
    n_design_ = n_design;
    l_ = lower_bound_bumps_per_axis(n_design, d, c0);
    q_ = lower_bound_q(n_design, d, c0);
    if (static_cast<std::int64_t>(omega_.size()) != q_)
      throw validation_error("lower-bound instance: omega length must be l^(d-1) = " +
                             std::to_string(q_));
    eps_ = 1.0 / static_cast<double>(l_ + 2);
    if (!(eps_ < 0.0625))
      throw validation_error(
          "lower-bound instance: eps = 1/(l+2) must be below 1/16 for the slabs to exist; "
          "increase n_design");
    r_ = r_opt ? *r_opt : solve_bump_radius(d);
    if (!(r_ > 0.0) || !(r_ < 0.25))
      throw std::domain_error("lower-bound instance: r must lie in (0, 1/4)");

    // core boxes; the support slabs are their eps-dilations
    box_low_lo_.assign(d, eps_);
    box_low_hi_.assign(d, 1.0 - eps_);
    box_low_lo_[d - 1] = eps_;
    box_low_hi_[d - 1] = 0.125 - eps_;
    box_up_lo_ = box_low_lo_;
    box_up_hi_ = box_low_hi_;
    box_up_lo_[d - 1] = 0.125 + eps_ * r_ + eps_;
    box_up_hi_[d - 1] = 1.0 - eps_;

    vol_lower_slab_ = dilated_box_volume(box_low_lo_, box_low_hi_);
    vol_upper_slab_ = dilated_box_volume(box_up_lo_, box_up_hi_);
    lambda_ = 1.0 / (vol_lower_slab_ + vol_upper_slab_);
  }

  int dim() const { return d_; }
  std::int64_t l() const { return l_; }
  std::int64_t q() const { return q_; }
  double eps() const { return eps_; }
  double r() const { return r_; }
  double M() const { return M_; }
  double lambda() const { return lambda_; }
  double vol_lower_slab() const { return vol_lower_slab_; }
  double vol_upper_slab() const { return vol_upper_slab_; }
  const std::vector<std::uint8_t>& omega() const { return omega_; }

  double min_gap() const { return eps_ * bump_unit_gap(r_); }
  double tau_lower_bound() const { return 0.5 * eps_ * bump_unit_gap(r_); }

  /// Nearest bump lattice cell of a horizontal position; valid for any point,
  /// the profile is zero outside the cell's inscribed ball anyway.
  std::vector<std::int64_t> bump_index(const Point& x) const {
    std::vector<std::int64_t> idx(d_ - 1);
    for (int k = 0; k < d_ - 1; ++k) {
      // centers a_i = (i + 0.5)/(l + 2), i in 1..l
      std::int64_t i = std::llround(x[k] * (l_ + 2) - 0.5);
      idx[k] = std::clamp<std::int64_t>(i, 1, l_);
    }
    return idx;
  }

  bool bump_attached(const std::vector<std::int64_t>& idx) const {
    std::int64_t flat = 0, stride = 1;
    for (int k = 0; k < d_ - 1; ++k) {
      flat += (idx[k] - 1) * stride;
      stride *= l_;
    }
    return omega_[static_cast<std::size_t>(flat)] != 0;
  }

  /// Height of the attached bump surface above the lower slab at x's
  /// horizontal position, in unit bump coordinates.
  double unit_profile_at(const Point& x, const std::vector<std::int64_t>& idx) const {
    double rho2 = 0.0;
    for (int k = 0; k < d_ - 1; ++k) {
      const double center = (idx[k] + 0.5) / static_cast<double>(l_ + 2);
      const double u = (x[k] - center) / eps_;
      rho2 += u * u;
    }
    return bump_profile(std::sqrt(rho2), r_);
  }

  bool in_lower(const Point& x) const {
    if (dist_to_box(x, box_low_lo_, box_low_hi_) <= eps_) return true;
    const auto idx = bump_index(x);
    if (!bump_attached(idx)) return false;
    const double t = (x[d_ - 1] - 0.125) / eps_;
    return t >= 0.0 && t <= unit_profile_at(x, idx);
  }

  bool in_upper(const Point& x) const {
    if (dist_to_box(x, box_up_lo_, box_up_hi_) > eps_) return false;
    const auto idx = bump_index(x);
    if (!bump_attached(idx)) return true;
    const double t = (x[d_ - 1] - 0.125) / eps_ - r_;
    return !(t >= 0.0 && t <= unit_profile_at(x, idx));
  }

  bool in_support(const Point& x) const { return in_lower(x) || in_upper(x); }

 private:
  static double dist_to_box(const Point& x, const std::vector<double>& lo,
                            const std::vector<double>& hi) {
    double s = 0.0;
    for (std::size_t k = 0; k < lo.size(); ++k) {
      const double g = std::max({0.0, lo[k] - x[k], x[k] - hi[k]});
      s += g * g;
    }
    return std::sqrt(s);
  }

  // Steiner formula: vol(box (+) eps ball) via elementary symmetric sums of
  // the side lengths.
  double dilated_box_volume(const std::vector<double>& lo, const std::vector<double>& hi) const {
    std::vector<double> sides(d_);
    for (int k = 0; k < d_; ++k) sides[k] = hi[k] - lo[k];
    std::vector<double> e(d_ + 1, 0.0);
    e[0] = 1.0;
    for (int k = 0; k < d_; ++k)
      for (int j = k + 1; j >= 1; --j) e[j] += e[j - 1] * sides[k];
    double vol = 0.0;
    for (int j = 0; j <= d_; ++j)
      vol += e[j] * unit_ball_volume(d_ - j) * std::pow(eps_, d_ - j);
    return vol;
  }

  int d_;
  double M_, c0_;
  std::int64_t n_design_ = 0, l_ = 0, q_ = 0;
  double eps_ = 0.0, r_ = 0.0, lambda_ = 0.0;
  double vol_lower_slab_ = 0.0, vol_upper_slab_ = 0.0;
  std::vector<std::uint8_t> omega_;
  std::vector<double> box_low_lo_, box_low_hi_, box_up_lo_, box_up_hi_;
};

struct LowerBoundOptions {
  double sigma = 0.0;        // label noise; 0 keeps the point-mass conditional
  std::optional<double> r;   // bump fillet radius; default solves the d-equation
};

inline ProblemInstance make_lower_bound_instance(std::int64_t n_design, int d,
                                                 std::vector<std::uint8_t> omega, double M,
                                                 double c0,
                                                 const LowerBoundOptions& opts = {}) {
  if (!(M > 0.0)) throw validation_error("lower-bound instance: M > 0 required");
  auto geo = std::make_shared<LowerBoundGeometry>(n_design, d, std::move(omega), M, c0, opts.r);

  ProblemInstance inst;
  inst.pclass.d = d;
  inst.pclass.lambda0 = geo->lambda();
  inst.pclass.Lambda0 = geo->lambda();
  inst.pclass.M = M;
  inst.pclass.sigma = opts.sigma;
  inst.pclass.K = 2;
  inst.pclass.tau0 = geo->tau_lower_bound();
  inst.pclass.validate();

  inst.p_true = [geo](const Point& x) { return geo->in_support(x) ? geo->lambda() : 0.0; };
  inst.f_star = [geo, M](const Point& x) {
    if (geo->in_lower(x)) return M;
    if (geo->in_upper(x)) return -M;
    return 0.0;
  };
  inst.sample_x = [geo, d](Rng& rng) {
    Point p;
    p.coords.resize(d);
    while (true) {
      for (int k = 0; k < d; ++k) p.coords[k] = rng.uniform();
      if (geo->in_support(p)) return p;
    }
  };
  const auto f = inst.f_star;
  const double sigma = opts.sigma;
  inst.sample_y = [f, sigma](const Point& x, Rng& rng) {
    return f(x) + (sigma > 0.0 ? sigma * rng.normal() : 0.0);
  };
  inst.domain_lower = Point(std::vector<double>(d, 0.0));
  inst.domain_upper = Point(std::vector<double>(d, 1.0));

  inst.support_descriptor = {{"kind", "lower_bound"},
                             {"d", d},
                             {"n_design", n_design},
                             {"c0", c0},
                             {"l", geo->l()},
                             {"q", geo->q()},
                             {"eps", geo->eps()},
                             {"r", geo->r()},
                             {"omega", std::vector<int>(geo->omega().begin(), geo->omega().end())},
                             {"M", M},
                             {"sigma", opts.sigma},
                             {"lambda", geo->lambda()},
                             {"vol_lower_slab", geo->vol_lower_slab()},
                             {"vol_upper_slab", geo->vol_upper_slab()},
                             {"unit_gap", bump_unit_gap(geo->r())},
                             {"min_gap", geo->min_gap()},
                             {"tau_lower_bound", geo->tau_lower_bound()}};
  return inst;
}

// ---------------------------------------------------------------------------
// Smooth instance: the regression function is a clipped power of the warped
// distance from an anchor, evaluated on a fine reference grid, so the stated
// smoothness holds by the triangle inequality of the reference metric.
// ---------------------------------------------------------------------------

struct SmoothOptions {
  int d = 2;
  double sigma = 0.1;
  int n_bumps = 3;
  int ref_resolution = 128;
  Connectivity conn = Connectivity::sixteen;
};

inline ProblemInstance make_smooth_instance(double alpha_true, double beta, std::uint64_t seed,
                                            const SmoothOptions& opts = {}) {
  if (!(alpha_true >= 0.0)) throw validation_error("make_smooth_instance: alpha_true >= 0");
  if (!(beta > 0.0) || beta > 1.0)
    throw validation_error(
        "make_smooth_instance: beta in (0, 1] required (the clipped-distance construction "
        "is not Holder-beta for beta > 1)");
  const int d = opts.d;

  Rng rng(derive_seed(seed, 0x5a00));
  struct Bump {
    Point center;
    double radius, weight;
  };
  std::vector<Bump> bumps(static_cast<std::size_t>(opts.n_bumps));
  double weight_sum = 0.0;
  for (auto& b : bumps) {
    b.center.coords.resize(d);
    for (int k = 0; k < d; ++k) b.center.coords[k] = rng.uniform(0.2, 0.8);
    b.radius = rng.uniform(0.15, 0.35);
    b.weight = (rng.next_u64() & 1u ? 1.0 : -1.0) * rng.uniform(0.2, 0.4);
    weight_sum += std::abs(b.weight);
  }
  if (weight_sum > 0.8)
    for (auto& b : bumps) b.weight *= 0.8 / weight_sum;  // keep p bounded away from 0

  auto shared_bumps = std::make_shared<std::vector<Bump>>(bumps);
  auto p_raw = [shared_bumps, d](const Point& x) {
    double v = 1.0;
    for (const auto& b : *shared_bumps) {
      const double rho = euclidean_distance(x, b.center) / b.radius;
      if (rho < 1.0) {
        const double c = std::cos(1.5707963267948966 * rho);
        v += b.weight * c * c;
      }
    }
    return v;
  };

  // reference grid: quadrature normalization, density bounds, warped metric
  GridSpec ref = default_grid(Point(std::vector<double>(d, 0.0)),
                              Point(std::vector<double>(d, 1.0)), opts.ref_resolution);
  const std::int64_t total = ref.node_count();
  double mean_raw = 0.0, min_raw = std::numeric_limits<double>::infinity(), max_raw = 0.0;
  std::vector<double> raw(static_cast<std::size_t>(total));
  for (std::int64_t i = 0; i < total; ++i) {
    raw[static_cast<std::size_t>(i)] = p_raw(ref.node_point(i));
    mean_raw += raw[static_cast<std::size_t>(i)];
    min_raw = std::min(min_raw, raw[static_cast<std::size_t>(i)]);
    max_raw = std::max(max_raw, raw[static_cast<std::size_t>(i)]);
  }
  mean_raw /= static_cast<double>(total);
  const double Z = mean_raw;  // unit-volume domain

  struct SmoothRef {
    DensityModel model;
    GeodesicGraph graph;
    DistanceField field;
  };
  auto refdata = std::make_shared<SmoothRef>();
  refdata->model.grid = ref;
  refdata->model.m = 0;
  refdata->model.h_m = ref.min_spacing();
  refdata->model.delta_m = ref.min_spacing();
  refdata->model.eps_m = 1.0;
  refdata->model.phat.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) refdata->model.phat[i] = raw[i] / Z;
  refdata->model.support_mask.assign(raw.size(), 1);
  refdata->model.interior_mask.assign(raw.size(), 1);
  refdata->graph = build_graph(refdata->model, alpha_true, opts.conn);

  Point anchor;
  anchor.coords.resize(d);
  for (int k = 0; k < d; ++k) anchor.coords[k] = rng.uniform(0.25, 0.75);
  anchor = ref.node_point(ref.snap(anchor));
  refdata->field = distances_from(refdata->graph, anchor);

  double max_dist = 0.0;
  for (double v : refdata->field.dist)
    if (std::isfinite(v)) max_dist = std::max(max_dist, v);
  const double scale = 0.5 * max_dist;
  if (!(scale > 0.0)) throw validation_error("make_smooth_instance: degenerate reference metric");
  const double C1 = 1.0 / std::pow(scale, beta);

  ProblemInstance inst;
  inst.pclass.d = d;
  inst.pclass.lambda0 = min_raw / Z;
  inst.pclass.Lambda0 = max_raw / Z;
  inst.pclass.M = 1.0;
  inst.pclass.sigma = opts.sigma;
  inst.pclass.K = 1;
  inst.pclass.tau0 = 0.25;  // nominal; the support is the full box
  inst.pclass.beta = beta;
  inst.pclass.C1 = C1;
  inst.pclass.validate();

  const double Zcap = Z;
  inst.p_true = [p_raw, Zcap](const Point& x) { return p_raw(x) / Zcap; };
  inst.f_star = [refdata, C1, beta, scale](const Point& x) {
    const auto res = refdata->field.at(
        refdata->graph.compact_of(refdata->graph.grid().snap(x)));
    const double t = res.reachable ? std::clamp(res.value, 0.0, scale) : scale;
    return C1 * std::pow(t, beta);
  };
  const double pmax = max_raw / Z;
  auto p_fn = inst.p_true;
  inst.sample_x = [p_fn, pmax, d](Rng& rng) {
    Point p;
    p.coords.resize(d);
    while (true) {
      for (int k = 0; k < d; ++k) p.coords[k] = rng.uniform();
      if (rng.uniform() * pmax * 1.0000001 <= p_fn(p)) return p;
    }
  };
  const auto f = inst.f_star;
  const double sigma = opts.sigma;
  inst.sample_y = [f, sigma](const Point& x, Rng& rng) {
    return f(x) + (sigma > 0.0 ? sigma * rng.normal() : 0.0);
  };
  inst.domain_lower = Point(std::vector<double>(d, 0.0));
  inst.domain_upper = Point(std::vector<double>(d, 1.0));

  inst.support_descriptor = {{"kind", "smooth"},
                             {"alpha_true", alpha_true},
                             {"beta", beta},
                             {"seed", seed},
                             {"anchor", anchor.coords},
                             {"scale", scale},
                             {"C1", C1},
                             {"lambda0", inst.pclass.lambda0},
                             {"Lambda0", inst.pclass.Lambda0},
                             {"sigma", opts.sigma},
                             {"ref_resolution", opts.ref_resolution},
                             {"n_bumps", opts.n_bumps}};
  return inst;
}

}  // namespace densreg
