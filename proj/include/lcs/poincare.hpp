#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "lcs/direction_field.hpp"
#include "lcs/types.hpp"
#include "lcs/velocity_fields.hpp"

namespace lcs {

inline constexpr double kDefaultSectionBand = 2e-3;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// How step points are turned into section points.
///   Band        - keep step points whose wrapped section coordinate lies
///                 within epsilon_band of the plane (default).
///   Interpolate - linear interpolation between consecutive step points that
///                 straddle the plane. Denser, but not the band rule.
enum class CrossingRule { Band, Interpolate };

struct SectionSpec {
  int axis = 2;
  double value = 0.0;
  double epsilon_band = kDefaultSectionBand;
  Interval window{0.0, 0.0};
  /// Period of the section axis; <= 0 means the axis is not periodic.
  double period = kTwoPi;
  CrossingRule rule = CrossingRule::Band;

  void validate() const;
  /// Band membership of a (possibly unwrapped) section-axis coordinate.
  bool in_band(double coordinate) const;
  /// The two in-plane axes, ascending.
  std::array<int, 2> plane_axes() const;
};

struct SectionPoint {
  std::size_t seed_id = 0;
  double stamp = 0.0;  // time (classical) or arclength (dual)
  double a = 0.0;      // first in-plane coordinate, wrapped
  double b = 0.0;      // second in-plane coordinate, wrapped
  double c = 0.0;      // section-axis coordinate, wrapped
};

struct SeedFailure {
  std::size_t seed_id = 0;
  std::string reason;
};

struct SectionPoints {
  std::vector<SectionPoint> rows;
  std::vector<SeedFailure> failures;
};

/// Poincare section of trajectories of the velocity field started at t_start.
SectionPoints classical_section(const VelocityField& field, const std::vector<Vec3>& seeds,
                                double t_total, const Interval& window,
                                const SectionSpec& section, double tol = 1e-8,
                                unsigned workers = 1, double t_start = 0.0);

/// Poincare section of already integrated direction lines, filtered by
/// arclength window. Rows are sorted by (seed_id, stamp).
SectionPoints dual_section(const std::vector<DirectionLine>& lines, const Interval& window,
                           const SectionSpec& section, const Domain& domain);

/// Symmetric mean nearest-neighbour distance between two planar clouds,
/// measured on a torus when `period` > 0 (minimal image on both axes).
/// Zero for identical clouds; infinite when exactly one cloud is empty.
double cloud_distance(const std::vector<std::array<double, 2>>& a,
                      const std::vector<std::array<double, 2>>& b, double period = kTwoPi);

/// In-plane coordinates of section rows, optionally restricted to one seed.
std::vector<std::array<double, 2>> planar_points(const SectionPoints& pts);
std::vector<std::array<double, 2>> planar_points(const SectionPoints& pts, std::size_t seed_id);

struct CloudSpread {
  std::array<double, 2> centroid{};
  double max_radius = 0.0;
  double median_radius = 0.0;
  double ratio() const { return median_radius > 0.0 ? max_radius / median_radius : 0.0; }
};

/// Spread of a planar cloud about its (circular, when periodic) centroid.
CloudSpread cloud_spread(const std::vector<std::array<double, 2>>& pts, double period = kTwoPi);

}  // namespace lcs
