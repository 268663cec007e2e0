#include "lcs/commands.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>

#include <json.hpp>

#include "lcs/direction_field.hpp"
#include "lcs/flow_map.hpp"
#include "lcs/lcs_classify.hpp"
#include "lcs/parallel.hpp"
#include "lcs/poincare.hpp"
#include "lcs/strain.hpp"
#include "lcs/velocity_fields.hpp"

namespace lcs {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "1.0.0";

/// Output file that tracks its size and FNV-1a hash while writing.
class OutFile {
 public:
  OutFile(const fs::path& dir, std::string name) : name_(std::move(name)), out_(dir / name_, std::ios::binary) {
    if (!out_) throw InvalidArgument("cannot open output file " + (dir / name_).string());
  }
  void write(const std::string& s) {
    out_ << s;
    bytes_ += s.size();
    hash_ = fnv1a64(s, hash_);
  }
  void row(const std::string& s) {
    write(s);
    write("\n");
    ++rows_;
  }
  Artifact close(bool header_row) {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + name_);
    return Artifact{name_, header_row && rows_ > 0 ? rows_ - 1 : rows_, bytes_, hex64(hash_)};
  }

 private:
  std::string name_;
  std::ofstream out_;
  std::size_t rows_ = 0;
  std::size_t bytes_ = 0;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

Artifact write_json(const fs::path& dir, const std::string& name, const json& j) {
  OutFile f(dir, name);
  f.write(j.dump(2));
  f.write("\n");
  return f.close(false);
}

std::string fd(double v) { return format_double(v); }

std::string csv(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  return out;
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

/// Finite doubles as numbers, everything else as strings (JSON has no inf/nan).
json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

class Progress {
 public:
  Progress(std::ostream& os, std::string label, std::size_t total)
      : os_(os), label_(std::move(label)), total_(total) {}
  void tick(const std::string& note = {}) {
    const std::size_t done = ++done_;
    const std::size_t pct = total_ ? 100 * done / total_ : 100;
    std::lock_guard lock(mutex_);
    if (!note.empty() || pct != last_pct_ || done == total_) {
      last_pct_ = pct;
      os_ << "[" << label_ << "] " << done << "/" << total_;
      if (!note.empty()) os_ << " " << note;
      os_ << "\n";
      os_.flush();
    }
  }

 private:
  std::ostream& os_;
  std::string label_;
  std::size_t total_;
  std::atomic<std::size_t> done_{0};
  std::mutex mutex_;
  std::size_t last_pct_ = static_cast<std::size_t>(-1);
};

struct Context {
  const RunConfig& cfg;
  VelocityField field;
  fs::path dir;
  std::ostream& progress;
  RunReport report;
  json summary = json::object();
};

DualFieldSpec line_spec(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  DualFieldSpec spec;
  spec.base = c.line.base;
  if (c.line.partner) spec.blend = Blend{c.line.epsilon, *c.line.partner};
  spec.t0 = c.t0;
  spec.t1 = c.t1;
  spec.tol = c.tol;
  const auto& g = c.line.cache_grid;
  if (g[0] > 0) {
    const Domain& d = ctx.field.domain();
    for (int a = 0; a < 3; ++a) {
      if (!d.periodic[a]) {
        throw InvalidArgument("line.cache_grid needs a field that is periodic on every axis");
      }
    }
    ctx.progress << "[cache] tabulating " << g[0] * g[1] * g[2] << " deformation gradients\n";
    spec.cache = std::make_shared<DeformationCache>(
        ctx.field, spec.map_from(), spec.map_to(), c.tol, g, Vec3(d.lo[0], d.lo[1], d.lo[2]),
        Vec3(d.hi[0], d.hi[1], d.hi[2]));
  }
  spec.validate();
  return spec;
}

std::string line_note(const DirectionLine& l) {
  return "seed " + std::to_string(l.seed_id) + " s=" + fd(l.length()) + " " +
         std::string(to_string(l.termination));
}

json line_summary(const DirectionLine& l) {
  json j;
  j["seed_id"] = l.seed_id;
  j["seed"] = vec_json(l.seed);
  j["termination"] = std::string(to_string(l.termination));
  j["detail"] = l.detail;
  j["length"] = l.length();
  j["vertices"] = l.vertices.size();
  j["accepted_steps"] = l.accepted_steps;
  j["rejected_steps"] = l.rejected_steps;
  j["direction_evals"] = l.direction_evals;
  return j;
}

void note_line_failure(Context& ctx, const DirectionLine& l, double needed) {
  if (l.termination != Termination::ReachedSmax || l.length() < needed) {
    ctx.report.soft_failures.push_back("seed " + std::to_string(l.seed_id) + ": line ended at s=" +
                                       fd(l.length()) + " (" + std::string(to_string(l.termination)) +
                                       (l.detail.empty() ? "" : ": " + l.detail) + ")");
  }
}

std::string section_header(const SectionSpec& s) {
  const auto ax = s.plane_axes();
  return csv({"seed_id", "stamp", std::string(1, "xyz"[ax[0]]), std::string(1, "xyz"[ax[1]])});
}

json section_json(const SectionSpec& s, const std::string& kind, const Interval& window) {
  const auto ax = s.plane_axes();
  json j;
  j["kind"] = kind;
  j["axis"] = std::string(1, "xyz"[s.axis]);
  j["value"] = s.value;
  j["epsilon_band"] = s.epsilon_band;
  j["period"] = s.period;
  j["rule"] = s.rule == CrossingRule::Band ? "band" : "interpolate";
  j["window"] = json::array({window.lo, window.hi});
  j["stamp"] = kind == "classical" ? "time" : "arclength";
  j["columns"] = json::array({"seed_id", "stamp", std::string(1, "xyz"[ax[0]]),
                              std::string(1, "xyz"[ax[1]])});
  return j;
}

Artifact write_section_csv(const fs::path& dir, const std::string& name, const SectionSpec& spec,
                           const std::vector<SectionPoint>& rows) {
  OutFile f(dir, name);
  f.row(section_header(spec));
  for (const auto& p : rows) f.row(csv({std::to_string(p.seed_id), fd(p.stamp), fd(p.a), fd(p.b)}));
  return f.close(true);
}

std::vector<Vec3> seeds_or_throw(const RunConfig& c) {
  auto seeds = c.seeds.generate();
  if (seeds.empty()) throw InvalidArgument("no seeds configured");
  return seeds;
}

// ---------------------------------------------------------------------------

void run_ftle(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const auto seeds = seeds_or_throw(c);
  Progress prog(ctx.progress, "ftle", seeds.size());
  struct Row {
    std::array<double, 3> sigma{};
    double ftle = 0.0;
    std::string error;
  };
  auto rows = parallel_map(seeds.size(), c.workers, [&](std::size_t i) {
    Row r;
    try {
      const StrainData sd = svd3(advect_with_variations(ctx.field, seeds[i], c.t0, c.t1, c.tol).DF);
      r.sigma = sd.sigma;
      r.ftle = ftle(sd.sigma[2], c.t0, c.t1);
    } catch (const std::exception& e) {
      r.sigma.fill(std::nan(""));
      r.ftle = std::nan("");
      r.error = e.what();
    }
    prog.tick();
    return r;
  });
  OutFile f(ctx.dir, "ftle.csv");
  f.row("seed_id,x,y,z,sigma1,sigma2,sigma3,ftle");
  double max_ftle = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& r = rows[i];
    f.row(csv({std::to_string(i), fd(seeds[i][0]), fd(seeds[i][1]), fd(seeds[i][2]),
               fd(r.sigma[0]), fd(r.sigma[1]), fd(r.sigma[2]), fd(r.ftle)}));
    if (!r.error.empty()) ctx.report.soft_failures.push_back("seed " + std::to_string(i) + ": " + r.error);
    if (std::isfinite(r.ftle)) max_ftle = std::max(max_ftle, r.ftle);
  }
  ctx.report.artifacts.push_back(f.close(true));
  ctx.summary["points"] = seeds.size();
  ctx.summary["max_ftle"] = num(max_ftle);
}

void run_fd_compare(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const auto seeds = seeds_or_throw(c);
  Progress prog(ctx.progress, "fd-compare", seeds.size());
  struct Row {
    double angle = std::nan("");
    double ftle = std::nan("");
    std::string error;
  };
  auto rows = parallel_map(seeds.size(), c.workers, [&](std::size_t i) {
    Row r;
    try {
      const StrainData var = svd3(advect_with_variations(ctx.field, seeds[i], c.t0, c.t1, c.tol).DF);
      const StrainData fdm =
          svd3(finite_difference_gradient(ctx.field, seeds[i], c.t0, c.t1, c.fd_delta, c.tol));
      r.angle = line_angle_deg(var.xi[1], fdm.xi[1]);
      r.ftle = ftle(var.sigma[2], c.t0, c.t1);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    prog.tick();
    return r;
  });
  OutFile f(ctx.dir, "fd_compare.csv");
  f.row("seed_id,x,y,z,angle_deg,ftle");
  double max_angle = 0.0, sum = 0.0;
  std::size_t n = 0, above1 = 0;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& r = rows[i];
    f.row(csv({std::to_string(i), fd(seeds[i][0]), fd(seeds[i][1]), fd(seeds[i][2]), fd(r.angle),
               fd(r.ftle)}));
    if (!r.error.empty()) {
      ctx.report.soft_failures.push_back("seed " + std::to_string(i) + ": " + r.error);
      continue;
    }
    ++n;
    sum += r.angle;
    if (r.angle > 1.0) ++above1;
    if (r.angle > max_angle) {
      max_angle = r.angle;
      argmax = i;
    }
  }
  ctx.report.artifacts.push_back(f.close(true));
  ctx.summary["points"] = seeds.size();
  ctx.summary["max_angle_deg"] = max_angle;
  ctx.summary["max_angle_seed"] = vec_json(seeds[argmax]);
  ctx.summary["mean_angle_deg"] = n ? sum / static_cast<double>(n) : 0.0;
  ctx.summary["fraction_above_1deg"] = n ? static_cast<double>(above1) / static_cast<double>(n) : 0.0;
  ctx.summary["fd_delta"] = c.fd_delta;
}

void run_line_sweep(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const auto seeds = seeds_or_throw(c);
  const DualFieldSpec spec = line_spec(ctx);
  Progress prog(ctx.progress, "line-sweep", seeds.size());
  auto lines = parallel_map(seeds.size(), c.workers, [&](std::size_t i) {
    DirectionLine l = integrate_line(spec, ctx.field, seeds[i], c.line.orientation, c.line.options);
    l.seed_id = i;
    prog.tick(line_note(l));
    return l;
  });
  OutFile f(ctx.dir, "lines.csv");
  f.row("seed_id,s,x,y,z,term_reason");
  json per_line = json::array();
  for (const auto& l : lines) {
    const std::string id = std::to_string(l.seed_id);
    for (std::size_t k = 0; k < l.vertices.size(); ++k) {
      const auto& v = l.vertices[k];
      const bool last = k + 1 == l.vertices.size();
      f.row(csv({id, fd(v.s), fd(v.x[0]), fd(v.x[1]), fd(v.x[2]),
                 last ? std::string(to_string(l.termination)) : std::string()}));
    }
    per_line.push_back(line_summary(l));
    note_line_failure(ctx, l, c.line.options.s_max);
  }
  ctx.report.artifacts.push_back(f.close(true));
  json side;
  side["positions"] = "unwrapped";
  side["term_reason"] = "set on the last vertex of each line";
  side["lines"] = per_line;
  ctx.report.artifacts.push_back(write_json(ctx.dir, "lines.json", side));
  ctx.summary["lines"] = lines.size();
}

void run_classical(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const auto seeds = seeds_or_throw(c);
  ctx.progress << "[classical-poincare] " << seeds.size() << " trajectories to t="
               << c.t0 + c.classical.t_total << "\n";
  SectionSpec spec = c.section;
  spec.window = c.classical.window;
  const SectionPoints pts = classical_section(ctx.field, seeds, c.classical.t_total,
                                              c.classical.window, spec, c.tol, c.workers, c.t0);
  ctx.report.artifacts.push_back(write_section_csv(ctx.dir, "section.csv", spec, pts.rows));
  json side = section_json(spec, "classical", c.classical.window);
  side["t_start"] = c.t0;
  side["rows"] = pts.rows.size();
  json fails = json::array();
  for (const auto& f : pts.failures) {
    fails.push_back({{"seed_id", f.seed_id}, {"reason", f.reason}});
    ctx.report.soft_failures.push_back("seed " + std::to_string(f.seed_id) + ": " + f.reason);
  }
  side["failures"] = fails;
  ctx.report.artifacts.push_back(write_json(ctx.dir, "section.json", side));
  ctx.summary["rows"] = pts.rows.size();
}

void run_dual(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const auto seeds = seeds_or_throw(c);
  const DualFieldSpec spec = line_spec(ctx);
  Progress prog(ctx.progress, "dual-poincare", seeds.size());
  struct Result {
    json summary;
    std::vector<SectionPoint> rows;
    DirectionLine meta;
  };
  auto results = parallel_map(seeds.size(), c.workers, [&](std::size_t i) {
    DirectionLine l = integrate_line(spec, ctx.field, seeds[i], c.line.orientation, c.line.options);
    l.seed_id = i;
    Result r;
    r.summary = line_summary(l);
    r.rows = dual_section({l}, c.section.window, c.section, ctx.field.domain()).rows;
    prog.tick(line_note(l) + " rows=" + std::to_string(r.rows.size()));
    l.vertices.clear();
    l.vertices.shrink_to_fit();
    r.meta = std::move(l);
    return r;
  });
  std::vector<SectionPoint> all;
  json per_line = json::array();
  for (auto& r : results) {
    all.insert(all.end(), r.rows.begin(), r.rows.end());
    per_line.push_back(r.summary);
    if (r.meta.termination != Termination::ReachedSmax) {
      ctx.report.soft_failures.push_back(
          "seed " + std::to_string(r.meta.seed_id) + ": line ended at s=" +
          fd(r.summary["length"].get<double>()) + " (" + std::string(to_string(r.meta.termination)) +
          (r.meta.detail.empty() ? "" : ": " + r.meta.detail) + ")");
    }
  }
  ctx.report.artifacts.push_back(write_section_csv(ctx.dir, "section.csv", c.section, all));
  json side = section_json(c.section, "dual", c.section.window);
  side["base"] = std::string(to_string(c.line.base));
  side["rows"] = all.size();
  side["lines"] = per_line;
  ctx.report.artifacts.push_back(write_json(ctx.dir, "section.json", side));
  ctx.summary["rows"] = all.size();
}

json ellipsoid_json(const EllipsoidFit& e) {
  json j;
  j["center"] = vec_json(e.center);
  j["lengths"] = json::array({e.lengths[0], e.lengths[1], e.lengths[2]});
  j["axes"] = json::array({vec_json(e.axes[0]), vec_json(e.axes[1]), vec_json(e.axes[2])});
  return j;
}

void run_sphere(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const Vec3 center = c.sphere.center ? *c.sphere.center : seeds_or_throw(c).front();
  ctx.progress << "[sphere] " << c.sphere.n_points << " tracers, radius " << c.sphere.radius << "\n";
  const SphereAdvection adv = advect_sphere(ctx.field, center, c.sphere.radius, c.sphere.n_points,
                                            c.t0, c.t1, c.tol, c.workers);
  const FlowSample fs = advect_with_variations(ctx.field, center, c.t0, c.t1, c.tol);
  const StrainData sd = svd3(fs.DF);

  OutFile f(ctx.dir, "sphere.csv");
  f.row("i,x0,y0,z0,x1,y1,z1");
  for (std::size_t i = 0; i < adv.initial.size(); ++i) {
    const Vec3& a = adv.initial[i];
    const Vec3& b = adv.final[i];
    f.row(csv({std::to_string(i), fd(a[0]), fd(a[1]), fd(a[2]), fd(b[0]), fd(b[1]), fd(b[2])}));
  }
  ctx.report.artifacts.push_back(f.close(true));

  json side;
  side["center"] = vec_json(center);
  side["radius"] = c.sphere.radius;
  side["t0"] = c.t0;
  side["t1"] = c.t1;
  side["ellipsoid"] = ellipsoid_json(adv.ellipsoid);
  side["linearised"] = {{"center", vec_json(fs.x1)},
                        {"sigma", json::array({sd.sigma[0], sd.sigma[1], sd.sigma[2]})},
                        {"eta", json::array({vec_json(sd.eta[0]), vec_json(sd.eta[1]),
                                             vec_json(sd.eta[2])})}};
  json ratios = json::array(), angles = json::array();
  for (int i = 0; i < 3; ++i) {
    ratios.push_back(adv.ellipsoid.lengths[i] / (c.sphere.radius * sd.sigma[i]));
    angles.push_back(line_angle_deg(adv.ellipsoid.axes[i], sd.eta[i]));
  }
  side["length_over_radius_sigma"] = ratios;
  side["axis_angle_deg"] = angles;
  ctx.report.artifacts.push_back(write_json(ctx.dir, "sphere.json", side));
  ctx.summary["length_over_radius_sigma"] = ratios;
  ctx.summary["axis_angle_deg"] = angles;
}

json evidence_json(const CandidateVerdict& v) {
  json ev = json::array();
  for (const auto& e : v.evidence) {
    ev.push_back({{"name", e.name}, {"value", num(e.value)}, {"threshold", num(e.threshold)},
                  {"supports", e.supports}, {"note", e.note}});
  }
  return ev;
}

void run_classify_hyperbolic(Context& ctx, const Vec3& seed) {
  const RunConfig& c = ctx.cfg;
  const auto& k = c.classify;
  DualFieldSpec base = line_spec(ctx);
  base.blend.reset();
  RobustnessSettings rs;
  rs.epsilon = k.epsilon;
  rs.line = c.line.options;
  rs.window = c.section.window;
  rs.section = c.section;
  rs.initial_orientation = c.line.orientation;
  ctx.progress << "[classify] integrating unperturbed, tangent and normal lines to s="
               << c.line.options.s_max << "\n";

  json verdict;
  verdict["mode"] = "hyperbolic";
  verdict["base"] = std::string(to_string(c.line.base));
  verdict["seed"] = vec_json(seed);
  try {
    const RobustnessResult rob = perturbation_robustness(base, ctx.field, seed, rs, c.workers);
    const char* names[3] = {"section_unperturbed.csv", "section_tangent.csv", "section_normal.csv"};
    for (int i = 0; i < 3; ++i) {
      ctx.report.artifacts.push_back(write_section_csv(ctx.dir, names[i], c.section, rob.sections[i].rows));
    }
    ctx.progress << "[classify] distances: tangent " << rob.distance_tangent << ", normal "
                 << rob.distance_normal << "\n";
    const LocalPlane plane = best_local_plane(rob.lines[0], c.section.window, k.plane_radius,
                                              ctx.field.domain(), k.plane_candidates);
    const SphereAlignment al =
        c.line.base == DualBase::Xi2
            ? repelling_sphere_alignment(ctx.field, plane, c.t0, k.sphere_dt, k.sphere_radius,
                                         k.sphere_points, c.tol, c.workers)
            : attracting_sphere_alignment(ctx.field, plane, c.t1, k.sphere_dt, k.sphere_radius,
                                          k.sphere_points, c.tol, c.workers);
    const CandidateVerdict v = hyperbolic_verdict(
        c.line.base, rob, al, HyperbolicThresholds{*k.tangent_max, k.normal_factor, k.max_angle_deg});
    verdict["type"] = std::string(to_string(v.type));
    verdict["evidence"] = evidence_json(v);
    verdict["distance_tangent"] = num(rob.distance_tangent);
    verdict["distance_normal"] = num(rob.distance_normal);
    json lines = json::array();
    for (const auto& l : rob.lines) lines.push_back(line_summary(l));
    verdict["lines"] = lines;
    verdict["plane"] = {{"center", vec_json(plane.center)},
                        {"normal", vec_json(plane.normal)},
                        {"planarity", plane.planarity},
                        {"flatness", plane.flatness},
                        {"neighbours", plane.neighbours}};
    verdict["sphere"] = {{"angle_deg", al.angle_deg},
                         {"reference_normal", vec_json(al.reference_normal)},
                         {"ellipsoid", ellipsoid_json(al.sphere.ellipsoid)}};
  } catch (const ClassificationError& e) {
    verdict["type"] = std::string(to_string(LcsType::Undetermined));
    verdict["evidence"] = json::array();
    verdict["error"] = e.what();
    ctx.report.soft_failures.push_back(e.what());
  }
  ctx.summary["type"] = verdict["type"];
  ctx.report.artifacts.push_back(write_json(ctx.dir, "verdict.json", verdict));
}

void run_classify_elliptic(Context& ctx, const Vec3& seed) {
  const RunConfig& c = ctx.cfg;
  const auto& k = c.classify;
  const DualFieldSpec spec = line_spec(ctx);
  ctx.progress << "[classify] integrating line to s=" << c.line.options.s_max << "\n";
  DirectionLine line = integrate_line(spec, ctx.field, seed, c.line.orientation, c.line.options);
  json verdict;
  verdict["mode"] = "elliptic";
  verdict["base"] = std::string(to_string(c.line.base));
  verdict["seed"] = vec_json(seed);
  verdict["line"] = line_summary(line);
  try {
    if (line.length() < c.section.window.hi) {
      throw ClassificationError("line ended at s=" + fd(line.length()) + " (" +
                                std::string(to_string(line.termination)) + ") before the window");
    }
    std::vector<Vec3> pts;
    for (const auto& v : line.vertices) {
      if (c.section.window.contains(v.s)) pts.push_back(v.x);
    }
    const ToroidalFrame frame = k.center_x.empty()
                                    ? estimate_center_curves(pts, k.center_bins, k.R1, k.R2)
                                    : ToroidalFrame{k.R1, k.R2, k.center_x, k.center_y};
    const TorusMesh torus = fit_torus_surface(pts, frame, k.n_z, k.n_theta);
    ctx.progress << "[classify] torus mesh " << k.n_z << "x" << k.n_theta << ", stretch audit\n";
    const StretchAudit audit = stretch_audit(torus.mesh, ctx.field, spec.map_from(), spec.map_to(),
                                             k.delta, c.tol, c.workers);
    const CandidateVerdict v = elliptic_verdict(torus, audit, k.majority);

    OutFile f(ctx.dir, "mesh.csv");
    f.row("i,j,x,y,z");
    for (int i = 0; i < torus.mesh.n_i; ++i) {
      for (int j = 0; j < torus.mesh.n_j; ++j) {
        const Vec3& p = torus.mesh.at(i, j);
        f.row(csv({std::to_string(i), std::to_string(j), fd(p[0]), fd(p[1]), fd(p[2])}));
      }
    }
    ctx.report.artifacts.push_back(f.close(true));
    json header;
    header["n_i"] = torus.mesh.n_i;
    header["n_j"] = torus.mesh.n_j;
    header["i_direction"] = "z";
    header["j_direction"] = "poloidal angle";
    header["periodic_i"] = torus.mesh.periodic_i;
    header["periodic_j"] = torus.mesh.periodic_j;
    header["seam_offset_i"] = vec_json(torus.mesh.seam_offset_i);
    header["seam_offset_j"] = vec_json(torus.mesh.seam_offset_j);
    header["frame"] = {{"R1", frame.R1}, {"R2", frame.R2}, {"xc", frame.xc}, {"yc", frame.yc}};
    header["empty_fraction"] = torus.empty_fraction;
    header["winding"] = torus.winding;
    header["area"] = torus.mesh.area();
    json failed = json::array();
    for (auto idx : audit.failed_vertices) failed.push_back(idx);
    header["audit_failed_vertices"] = failed;
    ctx.report.artifacts.push_back(write_json(ctx.dir, "mesh.json", header));

    verdict["type"] = std::string(to_string(v.type));
    verdict["evidence"] = evidence_json(v);
    verdict["audit_pass_fraction"] = audit.pass_fraction;
  } catch (const ClassificationError& e) {
    verdict["type"] = std::string(to_string(LcsType::Undetermined));
    verdict["evidence"] = json::array();
    verdict["error"] = e.what();
    ctx.report.soft_failures.push_back(e.what());
  }
  ctx.summary["type"] = verdict["type"];
  ctx.report.artifacts.push_back(write_json(ctx.dir, "verdict.json", verdict));
}

void run_classify(Context& ctx) {
  const Vec3 seed = seeds_or_throw(ctx.cfg).front();
  if (ctx.cfg.classify.mode == ClassifyMode::Hyperbolic) {
    run_classify_hyperbolic(ctx, seed);
  } else {
    run_classify_elliptic(ctx, seed);
  }
}

json nested_config(const RunConfig& c) {
  json j = json::object();
  for (const auto& [key, value] : c.resolved()) {
    const auto dot = key.find('.');
    j[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }
  return j;
}

}  // namespace

RunReport run_command(const RunConfig& config, const std::string& out_dir, std::ostream& progress) {
  if (!config.command) throw InvalidArgument("no command given");
  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(dir);
  Context ctx{config, make_field(config.field_name, config.field_params), dir, progress, {}, {}};
  ctx.report.command = *config.command;

  switch (*config.command) {
    case Command::Ftle: run_ftle(ctx); break;
    case Command::FdCompare: run_fd_compare(ctx); break;
    case Command::LineSweep: run_line_sweep(ctx); break;
    case Command::ClassicalPoincare: run_classical(ctx); break;
    case Command::DualPoincare: run_dual(ctx); break;
    case Command::Sphere: run_sphere(ctx); break;
    case Command::Classify: run_classify(ctx); break;
  }

  json m;
  m["tool"] = "lcs";
  m["version"] = kToolVersion;
  m["command"] = std::string(to_string(*config.command));
  m["config_hash"] = config.hash_hex();
  m["config"] = nested_config(config);
  m["integrator"] = {{"method", "dopri5"},
                     {"atol", config.tol},
                     {"rtol", config.tol},
                     {"initial_step", "automatic (local estimate at the start point)"}};
  m["summary"] = ctx.summary;
  json arts = json::array();
  for (const auto& a : ctx.report.artifacts) {
    arts.push_back({{"file", a.file}, {"rows", a.rows}, {"bytes", a.bytes}, {"fnv1a64", a.fnv1a64}});
  }
  m["artifacts"] = arts;
  m["soft_failures"] = ctx.report.soft_failures;
  write_json(dir, "manifest.json", m);
  for (const auto& s : ctx.report.soft_failures) progress << "[warning] " << s << "\n";
  return ctx.report;
}

}  // namespace lcs
