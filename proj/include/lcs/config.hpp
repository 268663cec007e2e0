#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lcs/direction_field.hpp"
#include "lcs/poincare.hpp"
#include "lcs/types.hpp"

namespace lcs {

/// Config problem with the offending key and the line it came from
/// (0 for command-line overrides and missing keys).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, int line, const std::string& message);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct RawEntry {
  std::string value;
  int line = 0;  // 0: override or default
};

/// `[section]` headers and `key = value` lines flattened to "section.key".
/// Blank lines and lines starting with '#' or ';' are skipped.
std::map<std::string, RawEntry> parse_key_values(const std::string& text);

enum class Command { Ftle, LineSweep, ClassicalPoincare, DualPoincare, Classify, Sphere, FdCompare };
std::string_view to_string(Command c);
Command parse_command(const std::string& s);

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;
};

struct SeedConfig {
  std::vector<Vec3> points;
  std::optional<std::array<GridAxis, 3>> grid;
  /// Grid includes `hi` when true; otherwise n cells of width (hi - lo) / n.
  bool endpoint = false;

  /// Explicit points first, then the grid in x-fastest order.
  std::vector<Vec3> generate() const;
};

struct LineConfig {
  DualBase base = DualBase::Xi2;
  std::optional<Partner> partner;
  double epsilon = 0.0;
  LineOptions options{5e4, 0.0, 0.1};
  Vec3 orientation{0.0, 0.0, 1.0};
  std::array<int, 3> cache_grid{0, 0, 0};  // all zero: exact per-point solves
};

struct ClassicalConfig {
  double t_total = 2e4;
  Interval window{1e4, 2e4};
};

struct SphereConfig {
  std::optional<Vec3> center;  // defaults to the first seed
  double radius = 1e-3;
  int n_points = 200;
};

enum class ClassifyMode { Hyperbolic, Elliptic };

struct ClassifyConfig {
  ClassifyMode mode = ClassifyMode::Hyperbolic;
  double epsilon = 0.01;
  std::optional<double> tangent_max;  // T1
  double normal_factor = 5.0;
  double max_angle_deg = 10.0;
  double sphere_dt = 1.0;
  double sphere_radius = 1e-3;
  int sphere_points = 200;
  double plane_radius = 0.3;
  int plane_candidates = 25;
  // Elliptic
  double delta = 0.2;
  double majority = 0.5;
  int n_z = 32;
  int n_theta = 32;
  int center_bins = 32;
  double R1 = 2.0;
  double R2 = 1.0;
  std::vector<double> center_x;  // optional user-supplied centre tables
  std::vector<double> center_y;
};

struct RunConfig {
  std::optional<Command> command;
  std::string field_name;
  std::map<std::string, double> field_params;
  double t0 = 0.0;
  double t1 = 0.0;
  double tol = 1e-8;
  SeedConfig seeds;
  LineConfig line;
  SectionSpec section;  // window is the dual (arclength) window
  ClassicalConfig classical;
  double fd_delta = 1e-5;
  SphereConfig sphere;
  ClassifyConfig classify;
  unsigned workers = 1;
  std::string out_dir;

  /// Every resolved setting as "section.key" -> canonical text. Excludes
  /// run.workers and run.out, which do not affect results.
  std::map<std::string, std::string> resolved() const;
  /// FNV-1a 64 of the resolved settings.
  std::uint64_t content_hash() const;
  std::string hash_hex() const;
};

/// Parses, applies KEY=VALUE overrides, fills defaults and validates. A
/// command given here must agree with `run.command` when both are set; the
/// command-specific checks (required seeds, window inside s_max, ...) run
/// once a command is known.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       std::optional<Command> command = std::nullopt);

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

}  // namespace lcs
