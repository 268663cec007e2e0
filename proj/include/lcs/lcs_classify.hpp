#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcs/direction_field.hpp"
#include "lcs/poincare.hpp"
#include "lcs/strain.hpp"
#include "lcs/types.hpp"
#include "lcs/velocity_fields.hpp"

namespace lcs {

/// Raised when a classification step cannot produce evidence (short lines,
/// failed torus fit, ...).
class ClassificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Tracer spheres

struct EllipsoidFit {
  Vec3 center;
  std::array<double, 3> lengths{};  // semi-axis lengths, ascending
  std::array<Vec3, 3> axes;         // unit axes matching `lengths`
};

struct SphereAdvection {
  std::vector<Vec3> initial;
  std::vector<Vec3> final;
  EllipsoidFit ellipsoid;
};

/// Quasi-uniform (Fibonacci) points on the unit sphere.
std::vector<Vec3> fibonacci_sphere(int n_points);

/// Algebraic least-squares fit of an ellipsoid (centre included) to a point
/// cloud. Exact for points on an ellipsoid.
EllipsoidFit fit_ellipsoid(const std::vector<Vec3>& points);

/// Ellipsoid (p - c)^T Q (p - c) = 1 with a given centre c.
EllipsoidFit fit_centered_ellipsoid(const std::vector<Vec3>& points, const Vec3& center);

/// Advects a sphere of tracers from t0 to t1 and fits an ellipsoid, centred on
/// the tracers' centroid, to the result. Tracers come in antipodal pairs
/// (ceil(n_points / 2) Fibonacci directions and their negatives), so a linear
/// map is fitted exactly.
SphereAdvection advect_sphere(const VelocityField& field, const Vec3& center, double radius,
                              int n_points, double t0, double t1, double tol = kDefaultTol,
                              unsigned workers = 1);

// ---------------------------------------------------------------------------
// Toroidal coordinates

/// Toroidal frame about a vortex centre curve (x_c(z), y_c(z)), tabulated at
/// z_k = 2 pi k / n on [0, 2 pi) and interpolated linearly with periodic
/// continuation.
struct ToroidalFrame {
  double R1 = 2.0;
  double R2 = 1.0;
  std::vector<double> xc;
  std::vector<double> yc;

  void validate() const;
  /// Centre (x_c(z), y_c(z)) at any z.
  std::array<double, 2> center(double z) const;

  static ToroidalFrame constant(double x_c, double y_c, double R1 = 2.0, double R2 = 1.0);
};

Vec3 toroidal_transform(const Vec3& x, const ToroidalFrame& frame);
/// Inverse of toroidal_transform; returns z in [0, 2 pi).
Vec3 inverse_toroidal_transform(const Vec3& xbar, const ToroidalFrame& frame);

/// Centre curves as per-z-bin centroids (circular means in x and y) of a
/// point set; empty bins are filled by periodic linear interpolation.
ToroidalFrame estimate_center_curves(const std::vector<Vec3>& points, int n_bins,
                                     double R1 = 2.0, double R2 = 1.0);

// ---------------------------------------------------------------------------
// Structured quad meshes

/// Structured (n_i x n_j) vertex grid. Periodic directions connect the last
/// row/column back to the first, shifted by `seam_offset_*` (for example
/// (0, 0, 2 pi) for a tube that wraps in z).
struct QuadMesh {
  int n_i = 0;
  int n_j = 0;
  bool periodic_i = false;
  bool periodic_j = false;
  Vec3 seam_offset_i = Vec3::Zero();
  Vec3 seam_offset_j = Vec3::Zero();
  std::vector<Vec3> vertices;  // index i * n_j + j

  const Vec3& at(int i, int j) const { return vertices[static_cast<std::size_t>(i) * n_j + j]; }
  /// Unit normal from central differences of the grid.
  Vec3 normal(int i, int j) const;
  /// Sum of quad areas (two triangles per quad).
  double area() const;
};

struct TorusMesh {
  QuadMesh mesh;
  ToroidalFrame frame;
  std::vector<double> radii;  // poloidal radius per vertex, index i * n_theta + j
  double empty_fraction = 0.0;
  double winding = 0.0;       // accumulated poloidal angle of the input sequence
};

/// Tube fit around the frame's centre curve by (z, poloidal angle) binning.
/// Throws ClassificationError when the points do not wind around the centre
/// curve or more than half of the bins are empty.
TorusMesh fit_torus_surface(const std::vector<Vec3>& points, const ToroidalFrame& frame,
                            int n_z, int n_theta);

// ---------------------------------------------------------------------------
// Evidence

struct StretchAudit {
  std::vector<bool> pass;  // per vertex
  std::vector<std::size_t> failed_vertices;
  double pass_fraction = 0.0;
  std::size_t evaluated = 0;
};

/// Near-uniform stretching test with the mesh normals at every vertex.
StretchAudit stretch_audit(const QuadMesh& mesh, const VelocityField& field, double t0,
                           double t1, double delta, double tol = kDefaultTol,
                           unsigned workers = 1);

struct RobustnessSettings {
  double epsilon = 0.01;
  LineOptions line;
  Interval window{4e4, 5e4};
  SectionSpec section;
  Vec3 initial_orientation{0.0, 0.0, 1.0};
};

struct RobustnessResult {
  double distance_tangent = 0.0;
  double distance_normal = 0.0;
  std::array<DirectionLine, 3> lines;  // unperturbed, tangent blend, normal blend
  std::array<SectionPoints, 3> sections;
};

/// Tangent/normal blend partners for a base: xi2 -> (xi1, xi3); eta2 -> (eta3, eta1).
std::array<Partner, 2> robustness_partners(DualBase base);

/// Integrates the unperturbed line and the two blended lines from one seed and
/// measures how far the blended dual sections drift from the unperturbed one.
RobustnessResult perturbation_robustness(const DualFieldSpec& base_spec,
                                         const VelocityField& field, const Vec3& seed,
                                         const RobustnessSettings& settings,
                                         unsigned workers = 1);

/// Distance-only variant on precomputed sections.
double section_distance(const SectionPoints& a, const SectionPoints& b, const Domain& domain,
                        const SectionSpec& section);

struct LocalPlane {
  Vec3 center;
  Vec3 normal;
  double planarity = 0.0;  // middle / largest covariance eigenvalue
  double flatness = 1.0;   // smallest / middle covariance eigenvalue
  std::size_t neighbours = 0;
};

/// Plane through the line vertices within `radius` (minimal image on periodic
/// axes) of `center`, by principal components.
LocalPlane local_plane(const std::vector<LineVertex>& vertices, const Vec3& center,
                       double radius, const Domain& domain);

/// Picks the window vertex whose neighbourhood is most planar.
LocalPlane best_local_plane(const DirectionLine& line, const Interval& window, double radius,
                            const Domain& domain, int candidates = 25);

enum class LcsType { RepellingHyperbolic, AttractingHyperbolic, Elliptic, Undetermined };
std::string_view to_string(LcsType t);

struct EvidenceItem {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool supports = false;
  std::string note;
};

struct CandidateVerdict {
  LcsType type = LcsType::Undetermined;
  std::vector<EvidenceItem> evidence;
};

struct SphereAlignment {
  double angle_deg = 90.0;
  LocalPlane plane;
  SphereAdvection sphere;
  Vec3 reference_normal;  // surface normal the ellipsoid axis is compared against
};

/// Repelling check: sphere on the xi2 surface at t0 advected over
/// [t0, t0 + dt]; angle between the ellipsoid's major axis and the advected
/// surface normal.
SphereAlignment repelling_sphere_alignment(const VelocityField& field, const LocalPlane& plane,
                                           double t0, double dt, double radius, int n_points,
                                           double tol, unsigned workers = 1);

/// Attracting check: the eta2 surface point at t1 is pulled back to t1 - dt, a
/// sphere placed there is advected to t1; angle between the ellipsoid's minor
/// axis and the eta2 surface normal at t1.
SphereAlignment attracting_sphere_alignment(const VelocityField& field, const LocalPlane& plane,
                                            double t1, double dt, double radius, int n_points,
                                            double tol, unsigned workers = 1);

struct HyperbolicThresholds {
  double tangent_max = 0.0;       // T1
  double normal_factor = 5.0;     // normal distance must reach factor * T1
  double max_angle_deg = 10.0;
};

/// Combines perturbation and sphere evidence into a verdict for one base.
CandidateVerdict hyperbolic_verdict(DualBase base, const RobustnessResult& robustness,
                                    const SphereAlignment& alignment,
                                    const HyperbolicThresholds& thresholds);

/// Elliptic verdict from a torus fit and a stretch audit.
CandidateVerdict elliptic_verdict(const TorusMesh& torus, const StretchAudit& audit,
                                  double majority = 0.5);

/// Angle in degrees between two lines (orientation ignored), in [0, 90].
double line_angle_deg(const Vec3& a, const Vec3& b);

}  // namespace lcs
