#include "lcs/poincare.hpp"

#include <algorithm>
#include <limits>

#include "lcs/flow_map.hpp"
#include "lcs/parallel.hpp"

namespace lcs {

void SectionSpec::validate() const {
  if (axis < 0 || axis > 2) throw InvalidArgument("section: axis must be 0, 1 or 2");
  if (!(epsilon_band > 0.0)) throw InvalidArgument("section: epsilon_band must be > 0");
  if (period > 0.0 && !(epsilon_band < 0.25 * period)) {
    throw InvalidArgument("section: epsilon_band must be much smaller than the period");
  }
  if (!(window.hi >= window.lo)) throw InvalidArgument("section: empty window");
}

bool SectionSpec::in_band(double coordinate) const {
  if (period > 0.0) {
    const double d = wrap_coordinate(coordinate - value, 0.0, period);
    return d <= epsilon_band || d >= period - epsilon_band;
  }
  return std::abs(coordinate - value) <= epsilon_band;
}

std::array<int, 2> SectionSpec::plane_axes() const {
  switch (axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

namespace {

SectionPoint make_point(std::size_t seed_id, double stamp, const Vec3& x,
                        const SectionSpec& section, const Domain& domain) {
  const Vec3 w = wrap_periodic(x, domain);
  const auto ax = section.plane_axes();
  SectionPoint p;
  p.seed_id = seed_id;
  p.stamp = stamp;
  p.a = w[ax[0]];
  p.b = w[ax[1]];
  p.c = section.period > 0.0 ? wrap_coordinate(x[section.axis], 0.0, section.period)
                             : x[section.axis];
  return p;
}

/// Turns a sequence of (stamp, unwrapped position) samples into section rows.
class SectionCollector {
 public:
  SectionCollector(std::size_t seed_id, const SectionSpec& section, const Domain& domain,
                   std::vector<SectionPoint>& out)
      : seed_id_(seed_id), section_(section), domain_(domain), out_(out) {}

  void add(double stamp, const Vec3& x) {
    if (section_.rule == CrossingRule::Band) {
      if (section_.window.contains(stamp) && section_.in_band(x[section_.axis])) {
        out_.push_back(make_point(seed_id_, stamp, x, section_, domain_));
      }
    } else if (have_prev_) {
      add_crossings(prev_stamp_, prev_x_, stamp, x);
    }
    have_prev_ = true;
    prev_stamp_ = stamp;
    prev_x_ = x;
  }

 private:
  // Index of the plane copy below the coordinate (periodic) or side (non-periodic).
  double sheet(double c) const {
    return section_.period > 0.0 ? std::floor((c - section_.value) / section_.period)
                                 : (c >= section_.value ? 0.0 : -1.0);
  }

  void add_crossings(double s0, const Vec3& x0, double s1, const Vec3& x1) {
    const double c0 = x0[section_.axis];
    const double c1 = x1[section_.axis];
    const double k0 = sheet(c0), k1 = sheet(c1);
    if (k0 == k1) return;
    const double lo = std::min(k0, k1) + 1.0, hi = std::max(k0, k1);
    for (double k = lo; k <= hi; k += 1.0) {
      const double plane = section_.period > 0.0 ? section_.value + k * section_.period
                                                 : section_.value;
      const double f = (plane - c0) / (c1 - c0);
      const double stamp = s0 + f * (s1 - s0);
      if (!section_.window.contains(stamp)) continue;
      Vec3 x = x0 + f * (x1 - x0);
      x[section_.axis] = plane;
      out_.push_back(make_point(seed_id_, stamp, x, section_, domain_));
    }
  }

  std::size_t seed_id_;
  const SectionSpec& section_;
  const Domain& domain_;
  std::vector<SectionPoint>& out_;
  bool have_prev_ = false;
  double prev_stamp_ = 0.0;
  Vec3 prev_x_;
};

bool row_less(const SectionPoint& p, const SectionPoint& q) {
  if (p.seed_id != q.seed_id) return p.seed_id < q.seed_id;
  if (p.stamp != q.stamp) return p.stamp < q.stamp;
  if (p.a != q.a) return p.a < q.a;
  return p.b < q.b;
}

}  // namespace

SectionPoints classical_section(const VelocityField& field, const std::vector<Vec3>& seeds,
                                double t_total, const Interval& window,
                                const SectionSpec& section, double tol, unsigned workers,
                                double t_start) {
  section.validate();
  SectionSpec spec = section;
  spec.window = window;
  const double t_end = t_start + t_total;
  const double wlo = std::min(t_start, t_end), whi = std::max(t_start, t_end);
  if (window.lo < wlo || window.hi > whi) {
    throw InvalidArgument("classical_section: window must lie inside the integration interval");
  }

  struct PerSeed {
    std::vector<SectionPoint> rows;
    std::string failure;
  };
  auto per_seed = parallel_map(seeds.size(), workers, [&](std::size_t i) {
    PerSeed r;
    SectionCollector collect(i, spec, field.domain(), r.rows);
    const auto res = trace_trajectory(field, seeds[i], t_start, t_end, tol,
                                      [&](double t, const Vec3& x) {
                                        collect.add(t, x);
                                        return true;
                                      });
    if (res.status != StepStatus::Completed) {
      r.failure = describe(res.status) + " at t=" + std::to_string(res.t);
    }
    return r;
  });

  SectionPoints out;
  for (std::size_t i = 0; i < per_seed.size(); ++i) {
    out.rows.insert(out.rows.end(), per_seed[i].rows.begin(), per_seed[i].rows.end());
    if (!per_seed[i].failure.empty()) out.failures.push_back({i, per_seed[i].failure});
  }
  return out;
}

SectionPoints dual_section(const std::vector<DirectionLine>& lines, const Interval& window,
                           const SectionSpec& section, const Domain& domain) {
  section.validate();
  SectionSpec spec = section;
  spec.window = window;
  SectionPoints out;
  for (const auto& line : lines) {
    SectionCollector collect(line.seed_id, spec, domain, out.rows);
    for (const auto& v : line.vertices) collect.add(v.s, v.x);
    if (line.termination != Termination::ReachedSmax && line.length() < window.hi) {
      out.failures.push_back({line.seed_id, std::string(to_string(line.termination)) +
                                                " before the window ended: " + line.detail});
    }
  }
  std::sort(out.rows.begin(), out.rows.end(), row_less);
  std::sort(out.failures.begin(), out.failures.end(),
            [](const SeedFailure& p, const SeedFailure& q) { return p.seed_id < q.seed_id; });
  return out;
}

std::vector<std::array<double, 2>> planar_points(const SectionPoints& pts) {
  std::vector<std::array<double, 2>> out;
  out.reserve(pts.rows.size());
  for (const auto& r : pts.rows) out.push_back({r.a, r.b});
  return out;
}

std::vector<std::array<double, 2>> planar_points(const SectionPoints& pts, std::size_t seed_id) {
  std::vector<std::array<double, 2>> out;
  for (const auto& r : pts.rows) {
    if (r.seed_id == seed_id) out.push_back({r.a, r.b});
  }
  return out;
}

namespace {

/// Uniform bucket grid for nearest-neighbour queries in the plane.
class PlanarIndex {
 public:
  PlanarIndex(const std::vector<std::array<double, 2>>& pts, double period)
      : pts_(pts), period_(period) {
    const std::size_t n = pts.size();
    cells_ = static_cast<int>(std::clamp(std::sqrt(n / 2.0), 1.0, 1024.0));
    if (period_ > 0.0) {
      lo_ = {0.0, 0.0};
      extent_ = {period_, period_};
    } else {
      lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      std::array<double, 2> hi{-lo_[0], -lo_[1]};
      for (const auto& p : pts) {
        for (int k = 0; k < 2; ++k) {
          lo_[k] = std::min(lo_[k], p[k]);
          hi[k] = std::max(hi[k], p[k]);
        }
      }
      for (int k = 0; k < 2; ++k) extent_[k] = std::max(hi[k] - lo_[k], 1e-12);
    }
    cell_size_ = std::min(extent_[0], extent_[1]) / cells_;
    buckets_.assign(static_cast<std::size_t>(cells_) * cells_, {});
    for (std::size_t i = 0; i < n; ++i) {
      const auto [cx, cy] = cell_of(pts[i]);
      buckets_[static_cast<std::size_t>(cy) * cells_ + cx].push_back(i);
    }
  }

  double nearest(const std::array<double, 2>& q) const {
    double best = std::numeric_limits<double>::infinity();
    if (pts_.empty()) return best;
    const auto [qx, qy] = cell_of(q);
    for (int r = 0; r <= cells_; ++r) {
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
          int cx = qx + dx, cy = qy + dy;
          if (period_ > 0.0) {
            cx = ((cx % cells_) + cells_) % cells_;
            cy = ((cy % cells_) + cells_) % cells_;
          } else if (cx < 0 || cy < 0 || cx >= cells_ || cy >= cells_) {
            continue;
          }
          for (std::size_t i : buckets_[static_cast<std::size_t>(cy) * cells_ + cx]) {
            best = std::min(best, distance(q, pts_[i]));
          }
        }
      }
      // Cells beyond ring r are at least r cell sizes away.
      if (best <= r * cell_size_) break;
    }
    return best;
  }

  double distance(const std::array<double, 2>& p, const std::array<double, 2>& q) const {
    double dx = p[0] - q[0], dy = p[1] - q[1];
    if (period_ > 0.0) {
      dx -= period_ * std::round(dx / period_);
      dy -= period_ * std::round(dy / period_);
    }
    return std::hypot(dx, dy);
  }

 private:
  std::pair<int, int> cell_of(const std::array<double, 2>& p) const {
    std::array<int, 2> c{};
    for (int k = 0; k < 2; ++k) {
      double u = p[k] - lo_[k];
      if (period_ > 0.0) u = wrap_coordinate(u, 0.0, period_);
      c[k] = std::clamp(static_cast<int>(u / extent_[k] * cells_), 0, cells_ - 1);
    }
    return {c[0], c[1]};
  }

  const std::vector<std::array<double, 2>>& pts_;
  double period_;
  int cells_ = 1;
  std::array<double, 2> lo_{}, extent_{};
  double cell_size_ = 1.0;
  std::vector<std::vector<std::size_t>> buckets_;
};

double mean_nearest(const std::vector<std::array<double, 2>>& from, const PlanarIndex& to) {
  double sum = 0.0;
  for (const auto& p : from) sum += to.nearest(p);
  return sum / static_cast<double>(from.size());
}

}  // namespace

double cloud_distance(const std::vector<std::array<double, 2>>& a,
                      const std::vector<std::array<double, 2>>& b, double period) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  const PlanarIndex ia(a, period), ib(b, period);
  return 0.5 * (mean_nearest(a, ib) + mean_nearest(b, ia));
}

CloudSpread cloud_spread(const std::vector<std::array<double, 2>>& pts, double period) {
  CloudSpread out;
  if (pts.empty()) return out;
  for (int k = 0; k < 2; ++k) {
    if (period > 0.0) {
      double sx = 0.0, sy = 0.0;
      for (const auto& p : pts) {
        const double ang = p[k] * kTwoPi / period;
        sx += std::cos(ang);
        sy += std::sin(ang);
      }
      out.centroid[k] = wrap_coordinate(std::atan2(sy, sx) * period / kTwoPi, 0.0, period);
    } else {
      double s = 0.0;
      for (const auto& p : pts) s += p[k];
      out.centroid[k] = s / pts.size();
    }
  }
  std::vector<double> r;
  r.reserve(pts.size());
  for (const auto& p : pts) {
    double dx = p[0] - out.centroid[0], dy = p[1] - out.centroid[1];
    if (period > 0.0) {
      dx -= period * std::round(dx / period);
      dy -= period * std::round(dy / period);
    }
    r.push_back(std::hypot(dx, dy));
  }
  out.max_radius = *std::max_element(r.begin(), r.end());
  std::nth_element(r.begin(), r.begin() + r.size() / 2, r.end());
  out.median_radius = r[r.size() / 2];
  return out;
}

}  // namespace lcs
