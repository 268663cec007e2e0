#include "lcs/velocity_fields.hpp"

#include <sstream>

namespace lcs {

std::string_view to_string(FieldId id) {
  switch (id) {
    case FieldId::CatsEye: return "cats_eye";
    case FieldId::SteadyABC: return "steady_abc";
    case FieldId::AperiodicABC: return "aperiodic_abc";
    case FieldId::Custom: return "custom";
  }
  return "unknown";
}

double cats_eye_stream_function(double x, double y, double c) {
  if (!(c > 1.0)) throw InvalidArgument("cats_eye: c must be > 1");
  const double arg = c * std::cosh(y) + std::sqrt(c * c - 1.0) * std::cos(x);
  if (!(arg > 0.0)) throw InvalidArgument("cats_eye: non-positive log argument");
  return -std::log(arg);
}

AbcCoefficients aperiodic_coefficients(double t, double B, double C, double k0, double k1,
                                       double k2, double k3) {
  const double ramp = k0 * std::tanh(k1 * t);
  const double a2 = k2 * t;
  const double a3 = k3 * t;
  return {B + B * ramp * std::cos(a2 * a2), C + C * ramp * std::sin(a3 * a3)};
}

VelocityField VelocityField::cats_eye(double c) {
  if (!(c > 1.0)) throw InvalidArgument("cats_eye: c must be > 1");
  VelocityField f;
  f.id_ = FieldId::CatsEye;
  f.name_ = "cats_eye";
  f.params_.c = c;
  f.domain_.periodic = {true, false, false};
  f.domain_.lo[0] = 0.0;
  f.domain_.hi[0] = kTwoPi;
  return f;
}

VelocityField VelocityField::steady_abc(double A, double B, double C) {
  VelocityField f;
  f.id_ = FieldId::SteadyABC;
  f.name_ = "steady_abc";
  f.params_.A = A;
  f.params_.B = B;
  f.params_.C = C;
  f.domain_ = Domain::torus2pi();
  return f;
}

VelocityField VelocityField::aperiodic_abc(const FieldParams& p) {
  VelocityField f;
  f.id_ = FieldId::AperiodicABC;
  f.name_ = "aperiodic_abc";
  f.params_ = p;
  f.domain_ = Domain::torus2pi();
  return f;
}

VelocityField VelocityField::custom(std::string name, VelocityFn u, GradientFn Du, Domain domain) {
  if (!u || !Du) throw InvalidArgument("custom field needs both u and Du");
  VelocityField f;
  f.id_ = FieldId::Custom;
  f.name_ = std::move(name);
  f.domain_ = domain;
  f.custom_u_ = std::make_shared<const VelocityFn>(std::move(u));
  f.custom_Du_ = std::make_shared<const GradientFn>(std::move(Du));
  return f;
}

VelocityField VelocityField::linear(const Mat3& M) {
  return custom(
      "linear", [M](const Vec3& x, double) -> Vec3 { return M * x; },
      [M](const Vec3&, double) -> Mat3 { return M; });
}

void VelocityField::check_input(const Vec3& x, double t) const {
  if (!x.allFinite() || !std::isfinite(t)) {
    throw InvalidArgument("velocity field " + name_ + ": non-finite input");
  }
}

namespace {

struct Abc {
  double A, B, C;
};

inline Abc abc_at(FieldId id, const FieldParams& p, double t) {
  if (id == FieldId::AperiodicABC) {
    const auto bc = aperiodic_coefficients(t, p.B, p.C, p.k0, p.k1, p.k2, p.k3);
    return {p.A, bc.B, bc.C};
  }
  return {p.A, p.B, p.C};
}

void abc_sample(const Abc& k, const Vec3& x, Vec3* u, Mat3* Du) {
  const double sx = std::sin(x[0]), cx = std::cos(x[0]);
  const double sy = std::sin(x[1]), cy = std::cos(x[1]);
  const double sz = std::sin(x[2]), cz = std::cos(x[2]);
  if (u) {
    (*u)[0] = k.A * sz + k.C * cy;
    (*u)[1] = k.B * sx + k.A * cz;
    (*u)[2] = k.C * sy + k.B * cx;
  }
  if (Du) {
    *Du << 0.0, -k.C * sy, k.A * cz,
           k.B * cx, 0.0, -k.A * sz,
           -k.B * sx, k.C * cy, 0.0;
  }
}

void cats_eye_sample(double c, const Vec3& x, Vec3* u, Mat3* Du) {
  const double s = std::sqrt(c * c - 1.0);
  const double sx = std::sin(x[0]), cx = std::cos(x[0]);
  const double shy = std::sinh(x[1]), chy = std::cosh(x[1]);
  const double D = c * chy + s * cx;
  const double inv = 1.0 / D;
  if (u) {
    (*u)[0] = c * shy * inv;
    (*u)[1] = s * sx * inv;
    (*u)[2] = inv;
  }
  if (Du) {
    const double inv2 = inv * inv;
    const double dDx = -s * sx;
    const double dDy = c * shy;
    *Du << -c * shy * dDx * inv2, (c * chy * D - c * shy * dDy) * inv2, 0.0,
           (s * cx * D - s * sx * dDx) * inv2, -s * sx * dDy * inv2, 0.0,
           -dDx * inv2, -dDy * inv2, 0.0;
  }
}

}  // namespace

FieldSample VelocityField::sample(const Vec3& x, double t) const {
  check_input(x, t);
  const Vec3 xw = wrap_periodic(x, domain_);
  FieldSample out;
  switch (id_) {
    case FieldId::CatsEye: cats_eye_sample(params_.c, xw, &out.u, &out.Du); break;
    case FieldId::SteadyABC:
    case FieldId::AperiodicABC: abc_sample(abc_at(id_, params_, t), xw, &out.u, &out.Du); break;
    case FieldId::Custom:
      out.u = (*custom_u_)(xw, t);
      out.Du = (*custom_Du_)(xw, t);
      break;
  }
  return out;
}

Vec3 VelocityField::velocity(const Vec3& x, double t) const {
  check_input(x, t);
  const Vec3 xw = wrap_periodic(x, domain_);
  Vec3 u;
  switch (id_) {
    case FieldId::CatsEye: cats_eye_sample(params_.c, xw, &u, nullptr); break;
    case FieldId::SteadyABC:
    case FieldId::AperiodicABC: abc_sample(abc_at(id_, params_, t), xw, &u, nullptr); break;
    case FieldId::Custom: u = (*custom_u_)(xw, t); break;
  }
  return u;
}

Mat3 VelocityField::gradient(const Vec3& x, double t) const {
  check_input(x, t);
  const Vec3 xw = wrap_periodic(x, domain_);
  Mat3 Du;
  switch (id_) {
    case FieldId::CatsEye: cats_eye_sample(params_.c, xw, nullptr, &Du); break;
    case FieldId::SteadyABC:
    case FieldId::AperiodicABC: abc_sample(abc_at(id_, params_, t), xw, nullptr, &Du); break;
    case FieldId::Custom: Du = (*custom_Du_)(xw, t); break;
  }
  return Du;
}

VelocityField make_field(const std::string& name, const std::map<std::string, double>& params) {
  FieldParams p;
  auto take = [&](std::initializer_list<std::pair<const char*, double*>> allowed) {
    for (const auto& [key, value] : params) {
      bool known = false;
      for (const auto& [k, dst] : allowed) {
        if (key == k) {
          *dst = value;
          known = true;
        }
      }
      if (!known) {
        throw InvalidArgument("field '" + name + "': unknown parameter '" + key + "'");
      }
    }
  };
  if (name == "cats_eye") {
    take({{"c", &p.c}});
    return VelocityField::cats_eye(p.c);
  }
  if (name == "steady_abc") {
    take({{"A", &p.A}, {"B", &p.B}, {"C", &p.C}});
    return VelocityField::steady_abc(p.A, p.B, p.C);
  }
  if (name == "aperiodic_abc") {
    take({{"A", &p.A}, {"B", &p.B}, {"C", &p.C}, {"k0", &p.k0}, {"k1", &p.k1}, {"k2", &p.k2},
          {"k3", &p.k3}});
    return VelocityField::aperiodic_abc(p);
  }
  throw InvalidArgument("unknown velocity field '" + name + "'");
}

}  // namespace lcs
