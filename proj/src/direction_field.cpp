#include "lcs/direction_field.hpp"

#include <sstream>

namespace lcs {

std::string_view to_string(DualBase b) { return b == DualBase::Xi2 ? "xi2" : "eta2"; }

std::string_view to_string(Partner p) {
  switch (p) {
    case Partner::Xi1: return "xi1";
    case Partner::Xi3: return "xi3";
    case Partner::Eta1: return "eta1";
    case Partner::Eta3: return "eta3";
  }
  return "unknown";
}

DualBase parse_dual_base(const std::string& s) {
  if (s == "xi2") return DualBase::Xi2;
  if (s == "eta2") return DualBase::Eta2;
  throw InvalidArgument("unknown dual base '" + s + "' (expected xi2 or eta2)");
}

Partner parse_partner(const std::string& s) {
  if (s == "xi1") return Partner::Xi1;
  if (s == "xi3") return Partner::Xi3;
  if (s == "eta1") return Partner::Eta1;
  if (s == "eta3") return Partner::Eta3;
  throw InvalidArgument("unknown blend partner '" + s + "'");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::ReachedSmax: return "reached_smax";
    case Termination::DegenerateGap: return "degenerate_gap";
    case Termination::StepUnderflow: return "step_underflow";
    case Termination::LeftDomain: return "left_domain";
  }
  return "unknown";
}

void DualFieldSpec::validate() const {
  if (t0 == t1) throw InvalidArgument("dual field: zero horizon");
  if (!(tol > 0.0)) throw InvalidArgument("dual field: tolerance must be positive");
  if (blend) {
    const bool xi_partner = blend->partner == Partner::Xi1 || blend->partner == Partner::Xi3;
    if (xi_partner != (base == DualBase::Xi2)) {
      throw InvalidArgument("dual field: blend partner " + std::string(to_string(blend->partner)) +
                            " does not match base " + std::string(to_string(base)));
    }
    if (!std::isfinite(blend->epsilon)) throw InvalidArgument("dual field: non-finite epsilon");
  }
  if (cache && (cache->map_from() != map_from() || cache->map_to() != map_to())) {
    throw InvalidArgument("dual field: cache horizon does not match the field horizon");
  }
}

namespace {

// Index into the ascending singular triple of the map actually decomposed.
int partner_index(Partner p) {
  switch (p) {
    case Partner::Xi1: return 0;
    case Partner::Xi3: return 2;
    // Backward-map singular values are the reciprocals, so the order flips.
    case Partner::Eta1: return 2;
    case Partner::Eta3: return 0;
  }
  return 0;
}

}  // namespace

DirectionSample evaluate_direction(const DualFieldSpec& spec, const VelocityField& field,
                                   const Vec3& x, const OrientationRef& ref) {
  const Mat3 DF = spec.cache ? spec.cache->interpolate(x)
                             : advect_with_variations(field, x, spec.map_from(), spec.map_to(),
                                                      spec.tol)
                                   .DF;
  DirectionSample out;
  out.strain = svd3(DF);
  if (out.strain.degenerate()) throw DegenerateGap(x);

  Vec3 base = out.strain.xi[1];
  if (base.dot(ref.direction) < 0.0) base = -base;
  Vec3 d = base;
  out.partner = Vec3::Zero();
  if (spec.blend) {
    Vec3 partner = out.strain.xi[partner_index(spec.blend->partner)];
    if (ref.partner && partner.dot(*ref.partner) < 0.0) partner = -partner;
    out.partner = partner;
    d = base + spec.blend->epsilon * partner;
  }
  d.normalize();
  if (d.dot(ref.direction) < 0.0) d = -d;
  out.direction = d;
  return out;
}

Vec3 oriented_direction(const DualFieldSpec& spec, const VelocityField& field, const Vec3& x,
                        const Vec3& prev_dir) {
  return evaluate_direction(spec, field, x, OrientationRef{prev_dir, std::nullopt}).direction;
}

DirectionLine integrate_line(const DualFieldSpec& spec, const VelocityField& field,
                             const Vec3& seed, const Vec3& initial_orientation,
                             const LineOptions& options) {
  spec.validate();
  if (!(options.s_max > 0.0)) throw InvalidArgument("integrate_line: s_max must be > 0");
  if (!(options.max_step > 0.0)) throw InvalidArgument("integrate_line: max_step must be > 0");
  if (!(options.output_stride >= 0.0)) throw InvalidArgument("integrate_line: negative output stride");
  if (!initial_orientation.allFinite() || std::abs(initial_orientation.norm() - 1.0) > 1e-8) {
    throw InvalidArgument("integrate_line: initial orientation must be a unit vector");
  }

  DirectionLine line;
  line.seed = seed;
  line.orientation_seed = initial_orientation;
  line.vertices.push_back({0.0, seed});

  if (!field.domain().contains(seed)) {
    line.termination = Termination::LeftDomain;
    line.detail = "seed outside the field domain";
    return line;
  }

  OrientationRef ref{initial_orientation, std::nullopt};
  // Direction evaluated most recently; after an accepted step this is the
  // FSAL stage at the new vertex, which becomes the next continuity reference.
  DirectionSample last{};
  bool failed = false;

  auto rhs = [&](double, const Vec3& x, Vec3& dx) {
    try {
      last = evaluate_direction(spec, field, x, ref);
    } catch (const DegenerateGap&) {
      line.termination = Termination::DegenerateGap;
      std::ostringstream msg;
      msg << "degenerate singular values near (" << x.transpose() << ")";
      line.detail = msg.str();
      failed = true;
      return false;
    } catch (const FlowError& e) {
      line.termination = Termination::StepUnderflow;
      line.detail = e.what();
      failed = true;
      return false;
    } catch (const InvalidArgument& e) {
      line.termination = Termination::LeftDomain;
      line.detail = e.what();
      failed = true;
      return false;
    }
    ++line.direction_evals;
    dx = last.direction;
    return true;
  };

  double last_stored = 0.0;
  auto observer = [&](double s, const Vec3& x) {
    ref.direction = last.direction;
    if (spec.blend) ref.partner = last.partner;
    const bool done = s >= options.s_max;
    if (done || s - last_stored >= options.output_stride) {
      line.vertices.push_back({s, x});
      last_stored = s;
    }
    if (!field.domain().contains(x)) {
      if (line.vertices.back().s != s) line.vertices.push_back({s, x});
      line.termination = Termination::LeftDomain;
      line.detail = "line left the field domain";
      failed = true;
      return false;
    }
    return true;
  };

  StepperOptions opt;
  opt.atol = opt.rtol = spec.tol;
  opt.h_max = options.max_step;
  const auto r = integrate_dopri5<3>(rhs, 0.0, seed, options.s_max, opt, observer);
  line.accepted_steps = r.accepted;
  line.rejected_steps = r.rejected;

  if (!failed) {
    switch (r.status) {
      case StepStatus::Completed: line.termination = Termination::ReachedSmax; break;
      default:
        line.termination = Termination::StepUnderflow;
        line.detail = describe(r.status);
        break;
    }
  }
  return line;
}

DeformationCache::DeformationCache(const VelocityField& field, double map_from, double map_to,
                                   double tol, std::array<int, 3> n, Vec3 lo, Vec3 hi)
    : periodic_(field.domain().periodic), n_(n), lo_(lo), hi_(hi), from_(map_from), to_(map_to) {
  for (int a = 0; a < 3; ++a) {
    if (periodic_[a]) {
      lo_[a] = field.domain().lo[a];
      hi_[a] = field.domain().hi[a];
    }
    if (n_[a] < 2 || !(hi_[a] > lo_[a]) || !std::isfinite(hi_[a] - lo_[a])) {
      throw InvalidArgument("DeformationCache: invalid grid on axis " + std::to_string(a));
    }
    h_[a] = periodic_[a] ? (hi_[a] - lo_[a]) / n_[a] : (hi_[a] - lo_[a]) / (n_[a] - 1);
  }
  nodes_.resize(static_cast<std::size_t>(n_[0]) * n_[1] * n_[2]);
  for (int k = 0; k < n_[2]; ++k) {
    for (int j = 0; j < n_[1]; ++j) {
      for (int i = 0; i < n_[0]; ++i) {
        const Vec3 x(lo_[0] + i * h_[0], lo_[1] + j * h_[1], lo_[2] + k * h_[2]);
        nodes_[(static_cast<std::size_t>(k) * n_[1] + j) * n_[0] + i] =
            advect_with_variations(field, x, from_, to_, tol).DF;
      }
    }
  }
}

const Mat3& DeformationCache::node(int i, int j, int k) const {
  return nodes_[(static_cast<std::size_t>(k) * n_[1] + j) * n_[0] + i];
}

Mat3 DeformationCache::interpolate(const Vec3& x) const {
  std::array<int, 3> i0{}, i1{};
  std::array<double, 3> w{};
  for (int a = 0; a < 3; ++a) {
    double u = (x[a] - lo_[a]) / h_[a];
    if (periodic_[a]) {
      u = wrap_coordinate(u, 0.0, n_[a]);
      i0[a] = static_cast<int>(u);
      if (i0[a] >= n_[a]) i0[a] = n_[a] - 1;
      i1[a] = (i0[a] + 1) % n_[a];
    } else {
      if (u < 0.0 || u > n_[a] - 1) throw InvalidArgument("DeformationCache: point outside grid");
      i0[a] = std::min(static_cast<int>(u), n_[a] - 2);
      i1[a] = i0[a] + 1;
    }
    w[a] = u - i0[a];
  }
  Mat3 out = Mat3::Zero();
  for (int c = 0; c < 8; ++c) {
    const int ci = c & 1, cj = (c >> 1) & 1, ck = (c >> 2) & 1;
    const double weight = (ci ? w[0] : 1.0 - w[0]) * (cj ? w[1] : 1.0 - w[1]) *
                          (ck ? w[2] : 1.0 - w[2]);
    out += weight * node(ci ? i1[0] : i0[0], cj ? i1[1] : i0[1], ck ? i1[2] : i0[2]);
  }
  return out;
}

}  // namespace lcs
