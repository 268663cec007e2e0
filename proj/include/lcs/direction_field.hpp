#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcs/flow_map.hpp"
#include "lcs/strain.hpp"
#include "lcs/types.hpp"
#include "lcs/velocity_fields.hpp"

namespace lcs {

/// Which intermediate singular vector drives the dual system.
///   Xi2  - right singular vector of DF_{t0}^{t1} at x (initial positions).
///   Eta2 - left singular vector of the forward map, evaluated as the right
///          singular vector of the backward map DF_{t1}^{t0} at x (final positions).
enum class DualBase { Xi2, Eta2 };

/// Blend partners. Eta1/Eta3 are the forward-map left singular vectors, i.e.
/// the largest/smallest right singular vectors of the backward map.
enum class Partner { Xi1, Xi3, Eta1, Eta3 };

struct Blend {
  double epsilon = 0.0;
  Partner partner = Partner::Xi1;
};

class DeformationCache;

struct DualFieldSpec {
  DualBase base = DualBase::Xi2;
  std::optional<Blend> blend;
  double t0 = 0.0;
  double t1 = 10.0;
  double tol = kDefaultTol;
  /// Optional interpolated DF grid. Lower fidelity than the per-point solve;
  /// meant for exploratory sweeps only.
  std::shared_ptr<const DeformationCache> cache;

  /// Throws InvalidArgument for mismatched base/partner or a zero horizon.
  void validate() const;
  /// Start and end time of the flow map whose right singular vectors are used.
  double map_from() const { return base == DualBase::Xi2 ? t0 : t1; }
  double map_to() const { return base == DualBase::Xi2 ? t1 : t0; }
};

std::string_view to_string(DualBase b);
std::string_view to_string(Partner p);
DualBase parse_dual_base(const std::string& s);
Partner parse_partner(const std::string& s);

/// Raised when the singular values at a point are (numerically) not distinct.
class DegenerateGap : public std::runtime_error {
 public:
  explicit DegenerateGap(const Vec3& x)
      : std::runtime_error("degenerate singular-value gap"), where(x) {}
  Vec3 where;
};

/// Continuity references carried along a line: the previous direction and
/// the previous blend-partner vector.
struct OrientationRef {
  Vec3 direction;
  std::optional<Vec3> partner;
};

struct DirectionSample {
  Vec3 direction;  // unit, oriented
  Vec3 partner;    // oriented partner (zero when no blend)
  StrainData strain;
};

/// Full evaluation with explicit continuity references.
DirectionSample evaluate_direction(const DualFieldSpec& spec, const VelocityField& field,
                                   const Vec3& x, const OrientationRef& ref);

/// Unit direction of the dual field at x, oriented to have a non-negative
/// inner product with prev_dir. Blend partners take the canonical svd3 sign.
Vec3 oriented_direction(const DualFieldSpec& spec, const VelocityField& field, const Vec3& x,
                        const Vec3& prev_dir);

enum class Termination { ReachedSmax, DegenerateGap, StepUnderflow, LeftDomain };
std::string_view to_string(Termination t);

struct LineVertex {
  double s = 0.0;
  Vec3 x;
};

struct DirectionLine {
  std::size_t seed_id = 0;
  Vec3 seed;
  Vec3 orientation_seed;
  std::vector<LineVertex> vertices;  // unwrapped positions, s strictly increasing
  Termination termination = Termination::ReachedSmax;
  std::string detail;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t direction_evals = 0;

  double length() const { return vertices.empty() ? 0.0 : vertices.back().s; }
};

struct LineOptions {
  double s_max = 500.0;
  /// Minimum arclength between stored vertices; 0 stores every accepted step.
  double output_stride = 0.0;
  /// Arclength step cap.
  double max_step = 0.1;
};

/// Integrates x' = direction(x) in arclength from `seed`. Failures end the
/// line and are recorded in `termination`; nothing is thrown for them.
DirectionLine integrate_line(const DualFieldSpec& spec, const VelocityField& field,
                             const Vec3& seed, const Vec3& initial_orientation,
                             const LineOptions& options);

/// Deformation gradients tabulated on a regular grid and interpolated
/// trilinearly. Periodic axes of the field wrap; other axes must stay inside
/// [lo, hi].
class DeformationCache {
 public:
  DeformationCache(const VelocityField& field, double map_from, double map_to, double tol,
                   std::array<int, 3> n, Vec3 lo, Vec3 hi);

  /// Throws InvalidArgument outside the box on non-periodic axes.
  Mat3 interpolate(const Vec3& x) const;
  double map_from() const { return from_; }
  double map_to() const { return to_; }

 private:
  const Mat3& node(int i, int j, int k) const;

  std::array<bool, 3> periodic_;
  std::array<int, 3> n_;
  Vec3 lo_, hi_, h_;
  double from_, to_;
  std::vector<Mat3, Eigen::aligned_allocator<Mat3>> nodes_;
};

}  // namespace lcs
