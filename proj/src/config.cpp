#include "lcs/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <set>
#include <sstream>

#include "lcs/velocity_fields.hpp"

namespace lcs {

namespace {

std::string describe(const std::string& key, int line, const std::string& message) {
  std::string where = line > 0 ? "line " + std::to_string(line) : std::string("override/default");
  return "config error (" + where + ", key '" + key + "'): " + message;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Plain numbers, "pi", "2pi", "2*pi", "-pi".
std::optional<double> parse_number(const std::string& tok) {
  std::string t = tok;
  double scale = 1.0;
  auto ends_with = [&](std::string_view suffix) {
    return t.size() >= suffix.size() && t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("pi")) {
    scale = std::numbers::pi;
    t.resize(t.size() - 2);
    if (!t.empty() && t.back() == '*') t.pop_back();
    if (t.empty() || t == "+") return scale;
    if (t == "-") return -scale;
  }
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return std::nullopt;
  return v * scale;
}

struct Reader {
  std::map<std::string, RawEntry> entries;
  std::set<std::string> seen;

  bool has(const std::string& key) const { return entries.count(key) > 0; }
  int line(const std::string& key) const {
    auto it = entries.find(key);
    return it == entries.end() ? 0 : it->second.line;
  }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(key, line(key), msg);
  }
  const std::string* raw(const std::string& key) {
    seen.insert(key);
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second.value;
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    const std::string* v = raw(key);
    if (!v) return out;
    for (const auto& tok : split_tokens(*v)) {
      auto d = parse_number(tok);
      if (!d) fail(key, "'" + tok + "' is not a number");
      if (!std::isfinite(*d)) fail(key, "value must be finite");
      out.push_back(*d);
    }
    return out;
  }

  void number(const std::string& key, double& dst) {
    if (!has(key)) {
      seen.insert(key);
      return;
    }
    auto v = numbers(key);
    if (v.size() != 1) fail(key, "expected one number");
    dst = v[0];
  }

  void integer(const std::string& key, int& dst) {
    double d = dst;
    number(key, d);
    if (d != std::floor(d) || std::abs(d) > 1e9) fail(key, "expected an integer");
    dst = static_cast<int>(d);
  }

  void boolean(const std::string& key, bool& dst) {
    const std::string* v = raw(key);
    if (!v) return;
    std::string s = trim(*v);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "yes" || s == "1" || s == "on") {
      dst = true;
    } else if (s == "false" || s == "no" || s == "0" || s == "off") {
      dst = false;
    } else {
      fail(key, "expected true or false");
    }
  }

  void text(const std::string& key, std::string& dst) {
    const std::string* v = raw(key);
    if (v) dst = trim(*v);
  }

  void vec3(const std::string& key, Vec3& dst) {
    if (!has(key)) {
      seen.insert(key);
      return;
    }
    auto v = numbers(key);
    if (v.size() != 3) fail(key, "expected three numbers");
    dst = Vec3(v[0], v[1], v[2]);
  }

  void interval(const std::string& key, Interval& dst) {
    if (!has(key)) {
      seen.insert(key);
      return;
    }
    auto v = numbers(key);
    if (v.size() != 2) fail(key, "expected two numbers 'lo hi'");
    dst = Interval{v[0], v[1]};
  }
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "run.command", "run.out", "run.workers",
      "field.name",
      "horizon.t0", "horizon.t1",
      "integration.tol",
      "seeds.points", "seeds.x", "seeds.y", "seeds.z", "seeds.endpoint",
      "line.base", "line.partner", "line.epsilon", "line.s_max", "line.output_stride",
      "line.max_step", "line.orientation", "line.cache_grid",
      "section.axis", "section.value", "section.epsilon_band", "section.window", "section.rule",
      "classical.t_total", "classical.window",
      "fd.delta",
      "sphere.center", "sphere.radius", "sphere.n_points",
      "classify.mode", "classify.epsilon", "classify.tangent_max", "classify.normal_factor",
      "classify.max_angle", "classify.sphere_dt", "classify.sphere_radius",
      "classify.sphere_points", "classify.plane_radius", "classify.plane_candidates",
      "classify.delta", "classify.majority", "classify.n_z", "classify.n_theta",
      "classify.center_bins", "classify.R1", "classify.R2", "classify.center_x",
      "classify.center_y"};
  return keys;
}

bool is_field_param(const std::string& key) {
  return key.rfind("field.", 0) == 0 && key != "field.name";
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

std::string fmt_vec(const Vec3& v) { return join_numbers({v[0], v[1], v[2]}); }

std::string axis_name(int axis) { return std::string(1, "xyz"[axis]); }

}  // namespace

ConfigError::ConfigError(const std::string& key, int line, const std::string& message)
    : std::runtime_error(describe(key, line, message)), key_(key), line_(line) {}

std::map<std::string, RawEntry> parse_key_values(const std::string& text) {
  std::map<std::string, RawEntry> out;
  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw_line)) {
    ++lineno;
    std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(line, lineno, "malformed section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty() || section.find_first_of(" \t.=") != std::string::npos) {
        throw ConfigError(line, lineno, "malformed section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, lineno, "expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(line, lineno, "empty key");
    if (section.empty()) throw ConfigError(key, lineno, "key outside of any [section]");
    const std::string full = section + "." + key;
    if (out.count(full)) throw ConfigError(full, lineno, "duplicate key");
    out[full] = RawEntry{value, lineno};
  }
  return out;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Ftle: return "ftle";
    case Command::LineSweep: return "line-sweep";
    case Command::ClassicalPoincare: return "classical-poincare";
    case Command::DualPoincare: return "dual-poincare";
    case Command::Classify: return "classify";
    case Command::Sphere: return "sphere";
    case Command::FdCompare: return "fd-compare";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  for (Command c : {Command::Ftle, Command::LineSweep, Command::ClassicalPoincare,
                    Command::DualPoincare, Command::Classify, Command::Sphere,
                    Command::FdCompare}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("run.command", 0, "unknown command '" + s + "'");
}

std::vector<Vec3> SeedConfig::generate() const {
  std::vector<Vec3> out = points;
  if (!grid) return out;
  auto coords = [&](const GridAxis& g) {
    std::vector<double> v(static_cast<std::size_t>(g.n));
    if (g.n == 1) {
      v[0] = g.lo;
      return v;
    }
    const double h = endpoint ? (g.hi - g.lo) / (g.n - 1) : (g.hi - g.lo) / g.n;
    for (int i = 0; i < g.n; ++i) v[static_cast<std::size_t>(i)] = g.lo + i * h;
    if (endpoint) v.back() = g.hi;
    return v;
  };
  const auto xs = coords((*grid)[0]);
  const auto ys = coords((*grid)[1]);
  const auto zs = coords((*grid)[2]);
  out.reserve(out.size() + xs.size() * ys.size() * zs.size());
  for (double z : zs) {
    for (double y : ys) {
      for (double x : xs) out.emplace_back(x, y, z);
    }
  }
  return out;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       std::optional<Command> command) {
  Reader r;
  r.entries = parse_key_values(text);
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError(ov, 0, "override must look like KEY=VALUE");
    const std::string key = trim(std::string_view(ov).substr(0, eq));
    if (key.find('.') == std::string::npos) {
      throw ConfigError(key, 0, "override key must be 'section.key'");
    }
    r.entries[key] = RawEntry{trim(std::string_view(ov).substr(eq + 1)), 0};
  }
  for (const auto& [key, entry] : r.entries) {
    if (!known_keys().count(key) && !is_field_param(key)) {
      throw ConfigError(key, entry.line, "unknown key");
    }
  }

  RunConfig c;

  // [run]
  if (const std::string* v = r.raw("run.command")) {
    Command from_file;
    try {
      from_file = parse_command(trim(*v));
    } catch (const ConfigError&) {
      r.fail("run.command", "unknown command '" + trim(*v) + "'");
    }
    if (command && *command != from_file) {
      r.fail("run.command", "config names command '" + std::string(to_string(from_file)) +
                                "' but '" + std::string(to_string(*command)) + "' was requested");
    }
    c.command = from_file;
  }
  if (command) c.command = command;
  r.text("run.out", c.out_dir);
  if (r.has("run.workers")) {
    int w = 1;
    r.integer("run.workers", w);
    if (w < 1) r.fail("run.workers", "must be >= 1");
    c.workers = static_cast<unsigned>(w);
  }

  // [field]
  if (!r.has("field.name")) throw ConfigError("field.name", 0, "missing required block [field] with 'name'");
  r.text("field.name", c.field_name);
  for (const auto& [key, entry] : r.entries) {
    if (!is_field_param(key)) continue;
    double v = 0.0;
    r.number(key, v);
    c.field_params[key.substr(6)] = v;
  }
  std::optional<VelocityField> field;
  try {
    field = make_field(c.field_name, c.field_params);
  } catch (const InvalidArgument& e) {
    r.fail("field.name", e.what());
  }
  // Store every parameter of the chosen field so defaults hash like explicit values.
  {
    const FieldParams& p = field->params();
    c.field_params.clear();
    if (c.field_name == "cats_eye") {
      c.field_params = {{"c", p.c}};
    } else if (c.field_name == "steady_abc") {
      c.field_params = {{"A", p.A}, {"B", p.B}, {"C", p.C}};
    } else {
      c.field_params = {{"A", p.A}, {"B", p.B}, {"C", p.C}, {"k0", p.k0},
                        {"k1", p.k1}, {"k2", p.k2}, {"k3", p.k3}};
    }
  }

  // [horizon]
  if (!r.has("horizon.t0") || !r.has("horizon.t1")) {
    throw ConfigError(r.has("horizon.t0") ? "horizon.t1" : "horizon.t0", 0,
                      "missing required block [horizon] with 't0' and 't1'");
  }
  r.number("horizon.t0", c.t0);
  r.number("horizon.t1", c.t1);
  if (c.t0 == c.t1) r.fail("horizon.t1", "t1 must differ from t0");

  // [integration]
  r.number("integration.tol", c.tol);
  if (!(c.tol > 0.0) || c.tol >= 1.0) r.fail("integration.tol", "must lie in (0, 1)");

  // [seeds]
  if (r.has("seeds.points")) {
    const std::string* v = r.raw("seeds.points");
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ';')) {
      if (trim(item).empty()) continue;
      std::vector<double> xyz;
      for (const auto& tok : split_tokens(item)) {
        auto d = parse_number(tok);
        if (!d || !std::isfinite(*d)) r.fail("seeds.points", "'" + tok + "' is not a number");
        xyz.push_back(*d);
      }
      if (xyz.size() != 3) r.fail("seeds.points", "each point needs three coordinates ('x y z; ...')");
      c.seeds.points.emplace_back(xyz[0], xyz[1], xyz[2]);
    }
  }
  const bool any_grid = r.has("seeds.x") || r.has("seeds.y") || r.has("seeds.z");
  if (any_grid) {
    std::array<GridAxis, 3> grid;
    const char* names[3] = {"seeds.x", "seeds.y", "seeds.z"};
    for (int a = 0; a < 3; ++a) {
      if (!r.has(names[a])) r.fail(names[a], "grid seeds need seeds.x, seeds.y and seeds.z");
      auto v = r.numbers(names[a]);
      if (v.size() == 1) {
        grid[a] = GridAxis{v[0], v[0], 1};
      } else if (v.size() == 3) {
        if (v[2] != std::floor(v[2]) || v[2] < 1 || v[2] > 1e7) {
          r.fail(names[a], "count must be a positive integer");
        }
        if (v[1] < v[0]) r.fail(names[a], "expected lo <= hi");
        grid[a] = GridAxis{v[0], v[1], static_cast<int>(v[2])};
      } else {
        r.fail(names[a], "expected 'value' or 'lo hi n'");
      }
    }
    c.seeds.grid = grid;
  }
  r.boolean("seeds.endpoint", c.seeds.endpoint);

  // [line]
  if (const std::string* v = r.raw("line.base")) {
    try {
      c.line.base = parse_dual_base(trim(*v));
    } catch (const InvalidArgument& e) {
      r.fail("line.base", e.what());
    }
  }
  if (const std::string* v = r.raw("line.partner")) {
    const std::string s = trim(*v);
    if (s != "none") {
      try {
        c.line.partner = parse_partner(s);
      } catch (const InvalidArgument& e) {
        r.fail("line.partner", e.what());
      }
    }
  }
  r.number("line.epsilon", c.line.epsilon);
  if (c.line.epsilon != 0.0 && !c.line.partner) {
    r.fail("line.epsilon", "a nonzero blend needs line.partner");
  }
  if (c.line.partner) {
    const bool xi_partner = *c.line.partner == Partner::Xi1 || *c.line.partner == Partner::Xi3;
    if (xi_partner != (c.line.base == DualBase::Xi2)) {
      r.fail("line.partner", "partner does not match line.base (xi2: xi1|xi3, eta2: eta1|eta3)");
    }
  }
  r.number("line.s_max", c.line.options.s_max);
  if (!(c.line.options.s_max > 0.0)) r.fail("line.s_max", "must be > 0");
  r.number("line.output_stride", c.line.options.output_stride);
  if (c.line.options.output_stride < 0.0) r.fail("line.output_stride", "must be >= 0");
  r.number("line.max_step", c.line.options.max_step);
  if (!(c.line.options.max_step > 0.0)) r.fail("line.max_step", "must be > 0");
  r.vec3("line.orientation", c.line.orientation);
  if (c.line.orientation.norm() == 0.0) r.fail("line.orientation", "must be nonzero");
  c.line.orientation.normalize();
  if (r.has("line.cache_grid")) {
    auto v = r.numbers("line.cache_grid");
    if (v.size() != 3) r.fail("line.cache_grid", "expected three counts");
    const bool off = v[0] == 0 && v[1] == 0 && v[2] == 0;
    for (int a = 0; a < 3; ++a) {
      if (v[a] != std::floor(v[a]) || (!off && v[a] < 2) || v[a] > 4096) {
        r.fail("line.cache_grid", "counts must be integers >= 2 (or all 0)");
      }
      c.line.cache_grid[a] = static_cast<int>(v[a]);
    }
  }

  // [section]
  if (const std::string* v = r.raw("section.axis")) {
    const std::string s = trim(*v);
    if (s == "x" || s == "0") {
      c.section.axis = 0;
    } else if (s == "y" || s == "1") {
      c.section.axis = 1;
    } else if (s == "z" || s == "2") {
      c.section.axis = 2;
    } else {
      r.fail("section.axis", "expected x, y or z");
    }
  }
  r.number("section.value", c.section.value);
  r.number("section.epsilon_band", c.section.epsilon_band);
  c.section.window = Interval{4e4, 5e4};
  r.interval("section.window", c.section.window);
  if (const std::string* v = r.raw("section.rule")) {
    const std::string s = trim(*v);
    if (s == "band") {
      c.section.rule = CrossingRule::Band;
    } else if (s == "interpolate") {
      c.section.rule = CrossingRule::Interpolate;
    } else {
      r.fail("section.rule", "expected band or interpolate");
    }
  }
  const Domain& dom = field->domain();
  c.section.period = dom.periodic[c.section.axis] ? dom.period(c.section.axis) : 0.0;
  if (!(c.section.epsilon_band > 0.0)) r.fail("section.epsilon_band", "must be > 0");
  if (c.section.period > 0.0 && c.section.epsilon_band >= 0.5 * c.section.period) {
    r.fail("section.epsilon_band", "must be smaller than half the axis period");
  }
  if (c.section.window.lo < 0.0 || c.section.window.hi < c.section.window.lo) {
    r.fail("section.window", "expected 0 <= lo <= hi");
  }

  // [classical]
  r.number("classical.t_total", c.classical.t_total);
  if (!(c.classical.t_total > 0.0)) r.fail("classical.t_total", "must be > 0");
  r.interval("classical.window", c.classical.window);
  if (c.classical.window.lo < 0.0 || c.classical.window.hi < c.classical.window.lo) {
    r.fail("classical.window", "expected 0 <= lo <= hi");
  }
  if (c.classical.window.hi > c.classical.t_total) {
    r.fail("classical.window", "window must end before classical.t_total");
  }

  // [fd]
  r.number("fd.delta", c.fd_delta);
  if (!(c.fd_delta > 0.0) || c.fd_delta > 0.1) r.fail("fd.delta", "must lie in (0, 0.1]");

  // [sphere]
  if (r.has("sphere.center")) {
    Vec3 v;
    r.vec3("sphere.center", v);
    c.sphere.center = v;
  }
  r.number("sphere.radius", c.sphere.radius);
  if (!(c.sphere.radius > 0.0)) r.fail("sphere.radius", "must be > 0");
  r.integer("sphere.n_points", c.sphere.n_points);
  if (c.sphere.n_points < 50) r.fail("sphere.n_points", "must be >= 50");

  // [classify]
  if (const std::string* v = r.raw("classify.mode")) {
    const std::string s = trim(*v);
    if (s == "hyperbolic") {
      c.classify.mode = ClassifyMode::Hyperbolic;
    } else if (s == "elliptic") {
      c.classify.mode = ClassifyMode::Elliptic;
    } else {
      r.fail("classify.mode", "expected hyperbolic or elliptic");
    }
  }
  auto& k = c.classify;
  r.number("classify.epsilon", k.epsilon);
  if (!(k.epsilon > 0.0)) r.fail("classify.epsilon", "must be > 0");
  if (r.has("classify.tangent_max")) {
    double t = 0.0;
    r.number("classify.tangent_max", t);
    if (!(t > 0.0)) r.fail("classify.tangent_max", "must be > 0");
    k.tangent_max = t;
  }
  r.number("classify.normal_factor", k.normal_factor);
  if (!(k.normal_factor >= 1.0)) r.fail("classify.normal_factor", "must be >= 1");
  r.number("classify.max_angle", k.max_angle_deg);
  if (!(k.max_angle_deg > 0.0 && k.max_angle_deg <= 90.0)) r.fail("classify.max_angle", "must lie in (0, 90]");
  r.number("classify.sphere_dt", k.sphere_dt);
  if (!(k.sphere_dt > 0.0)) r.fail("classify.sphere_dt", "must be > 0");
  r.number("classify.sphere_radius", k.sphere_radius);
  if (!(k.sphere_radius > 0.0)) r.fail("classify.sphere_radius", "must be > 0");
  r.integer("classify.sphere_points", k.sphere_points);
  if (k.sphere_points < 50) r.fail("classify.sphere_points", "must be >= 50");
  r.number("classify.plane_radius", k.plane_radius);
  if (!(k.plane_radius > 0.0)) r.fail("classify.plane_radius", "must be > 0");
  r.integer("classify.plane_candidates", k.plane_candidates);
  if (k.plane_candidates < 1) r.fail("classify.plane_candidates", "must be >= 1");
  r.number("classify.delta", k.delta);
  if (!(k.delta > 0.0 && k.delta < 1.0)) r.fail("classify.delta", "must lie in (0, 1)");
  r.number("classify.majority", k.majority);
  if (!(k.majority > 0.0 && k.majority < 1.0)) r.fail("classify.majority", "must lie in (0, 1)");
  r.integer("classify.n_z", k.n_z);
  if (k.n_z < 4) r.fail("classify.n_z", "must be >= 4");
  r.integer("classify.n_theta", k.n_theta);
  if (k.n_theta < 4) r.fail("classify.n_theta", "must be >= 4");
  r.integer("classify.center_bins", k.center_bins);
  if (k.center_bins < 1) r.fail("classify.center_bins", "must be >= 1");
  r.number("classify.R1", k.R1);
  r.number("classify.R2", k.R2);
  if (!(k.R1 > 0.0 && k.R2 > 0.0)) r.fail("classify.R1", "R1 and R2 must be > 0");
  k.center_x = r.numbers("classify.center_x");
  k.center_y = r.numbers("classify.center_y");
  if (k.center_x.size() != k.center_y.size()) {
    r.fail("classify.center_y", "center_x and center_y need the same length");
  }

  // Command-specific requirements.
  if (c.command) {
    const Command cmd = *c.command;
    const bool needs_seeds = cmd != Command::Sphere || !c.sphere.center;
    if (needs_seeds && c.seeds.points.empty() && !c.seeds.grid) {
      throw ConfigError("seeds.points", 0, "missing required block [seeds] for command '" +
                                               std::string(to_string(cmd)) + "'");
    }
    if ((cmd == Command::DualPoincare || cmd == Command::Classify) &&
        c.section.window.hi > c.line.options.s_max) {
      r.fail("section.window", "window ends beyond line.s_max");
    }
    if (cmd == Command::Classify && c.classify.mode == ClassifyMode::Hyperbolic &&
        !c.classify.tangent_max) {
      throw ConfigError("classify.tangent_max", 0, "hyperbolic classification needs a threshold");
    }
  }
  return c;
}

std::map<std::string, std::string> RunConfig::resolved() const {
  std::map<std::string, std::string> m;
  m["run.command"] = command ? std::string(to_string(*command)) : "";
  m["field.name"] = field_name;
  for (const auto& [k, v] : field_params) m["field." + k] = format_double(v);
  m["horizon.t0"] = format_double(t0);
  m["horizon.t1"] = format_double(t1);
  m["integration.tol"] = format_double(tol);

  std::string pts;
  for (std::size_t i = 0; i < seeds.points.size(); ++i) {
    if (i) pts += "; ";
    pts += fmt_vec(seeds.points[i]);
  }
  m["seeds.points"] = pts;
  for (int a = 0; a < 3; ++a) {
    const std::string key = "seeds." + axis_name(a);
    m[key] = seeds.grid ? join_numbers({(*seeds.grid)[a].lo, (*seeds.grid)[a].hi,
                                        static_cast<double>((*seeds.grid)[a].n)})
                        : "";
  }
  m["seeds.endpoint"] = seeds.endpoint ? "true" : "false";

  m["line.base"] = std::string(to_string(line.base));
  m["line.partner"] = line.partner ? std::string(to_string(*line.partner)) : "none";
  m["line.epsilon"] = format_double(line.epsilon);
  m["line.s_max"] = format_double(line.options.s_max);
  m["line.output_stride"] = format_double(line.options.output_stride);
  m["line.max_step"] = format_double(line.options.max_step);
  m["line.orientation"] = fmt_vec(line.orientation);
  m["line.cache_grid"] = join_numbers({static_cast<double>(line.cache_grid[0]),
                                       static_cast<double>(line.cache_grid[1]),
                                       static_cast<double>(line.cache_grid[2])});

  m["section.axis"] = axis_name(section.axis);
  m["section.value"] = format_double(section.value);
  m["section.epsilon_band"] = format_double(section.epsilon_band);
  m["section.window"] = join_numbers({section.window.lo, section.window.hi});
  m["section.rule"] = section.rule == CrossingRule::Band ? "band" : "interpolate";
  m["section.period"] = format_double(section.period);

  m["classical.t_total"] = format_double(classical.t_total);
  m["classical.window"] = join_numbers({classical.window.lo, classical.window.hi});

  m["fd.delta"] = format_double(fd_delta);

  m["sphere.center"] = sphere.center ? fmt_vec(*sphere.center) : "";
  m["sphere.radius"] = format_double(sphere.radius);
  m["sphere.n_points"] = std::to_string(sphere.n_points);

  const auto& k = classify;
  m["classify.mode"] = k.mode == ClassifyMode::Hyperbolic ? "hyperbolic" : "elliptic";
  m["classify.epsilon"] = format_double(k.epsilon);
  m["classify.tangent_max"] = k.tangent_max ? format_double(*k.tangent_max) : "";
  m["classify.normal_factor"] = format_double(k.normal_factor);
  m["classify.max_angle"] = format_double(k.max_angle_deg);
  m["classify.sphere_dt"] = format_double(k.sphere_dt);
  m["classify.sphere_radius"] = format_double(k.sphere_radius);
  m["classify.sphere_points"] = std::to_string(k.sphere_points);
  m["classify.plane_radius"] = format_double(k.plane_radius);
  m["classify.plane_candidates"] = std::to_string(k.plane_candidates);
  m["classify.delta"] = format_double(k.delta);
  m["classify.majority"] = format_double(k.majority);
  m["classify.n_z"] = std::to_string(k.n_z);
  m["classify.n_theta"] = std::to_string(k.n_theta);
  m["classify.center_bins"] = std::to_string(k.center_bins);
  m["classify.R1"] = format_double(k.R1);
  m["classify.R2"] = format_double(k.R2);
  m["classify.center_x"] = join_numbers(k.center_x);
  m["classify.center_y"] = join_numbers(k.center_y);
  return m;
}

std::uint64_t RunConfig::content_hash() const {
  std::string canon;
  for (const auto& [k, v] : resolved()) canon += k + "=" + v + "\n";
  return fnv1a64(canon);
}

std::string RunConfig::hash_hex() const { return hex64(content_hash()); }

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace lcs
