#include "lorenzlab/metric.hpp"

#include <algorithm>
#include <charconv>
#include <array>
#include <cmath>
#include <sstream>

namespace lorenzlab {

std::string to_string(Topology t) { return t == Topology::torus ? "torus" : "klein"; }

std::string to_string(Family f) {
  switch (f) {
    case Family::flat:
      return "flat";
    case Family::strip:
      return "strip";
    case Family::galloway:
      return "galloway";
    case Family::klein_galloway:
      return "klein_galloway";
    case Family::custom:
      return "custom";
  }
  return "?";
}

std::string to_string(CausalType c) {
  switch (c) {
    case CausalType::timelike:
      return "timelike";
    case CausalType::lightlike:
      return "lightlike";
    case CausalType::spacelike:
      return "spacelike";
  }
  return "?";
}

ModelSpec ModelSpec::flat(double E, double F, double G) {
  ModelSpec s;
  s.family = Family::flat;
  s.E = E;
  s.F = F;
  s.G = G;
  return s;
}

ModelSpec ModelSpec::strip(int k) {
  ModelSpec s;
  s.family = Family::strip;
  s.k = k;
  return s;
}

ModelSpec ModelSpec::galloway(double eps) {
  ModelSpec s;
  s.family = Family::galloway;
  s.eps = eps;
  return s;
}

ModelSpec ModelSpec::klein_galloway() {
  ModelSpec s;
  s.family = Family::klein_galloway;
  s.topology = Topology::klein;
  return s;
}

ModelSpec ModelSpec::custom(std::string E, std::string F, std::string G, Topology topology) {
  ModelSpec s;
  s.family = Family::custom;
  s.topology = topology;
  s.expr_E = std::move(E);
  s.expr_F = std::move(F);
  s.expr_G = std::move(G);
  return s;
}

DegenerateMetric::DegenerateMetric(Vec2 p)
    : ModelError([&] {
        std::ostringstream os;
        os.precision(17);
        os << "degenerate metric at (" << p.x << ", " << p.y << ")";
        return os.str();
      }()),
      p_(p) {}

// ---------------------------------------------------------------------------
// MetricField

MetricField::MetricField(const ModelSpec& spec) : spec_(spec) {
  if (spec_.family == Family::strip && spec_.k == 0) {
    throw ModelRejected("strip family requires a nonzero integer k");
  }
  if (spec_.family == Family::galloway && !(spec_.eps > 0.0 && spec_.eps < 0.25)) {
    throw ModelRejected("galloway family requires eps in (0, 1/4)");
  }
  if (spec_.family == Family::klein_galloway) spec_.topology = Topology::klein;
  if (spec_.family == Family::custom) {
    e_ = Expression::parse(spec_.expr_E);
    f_ = Expression::parse(spec_.expr_F);
    g_ = Expression::parse(spec_.expr_G);
  }
}

MetricValue MetricField::raw(Vec2 p) const {
  switch (spec_.family) {
    case Family::flat:
      return {spec_.E, spec_.F, spec_.G};
    case Family::strip: {
      const double th = 2.0 * kTwoPi * spec_.k * p.x;
      const double s = std::sin(th);
      return {s, std::cos(th), -s};
    }
    case Family::galloway: {
      const double c = std::cos(kTwoPi * p.x);
      const double w = c * c - spec_.eps;
      return {-w, -2.0 * std::sin(kTwoPi * p.x), w};
    }
    case Family::klein_galloway: {
      const double c = std::cos(kTwoPi * p.x);
      return {c * c, 2.0 * std::sin(kTwoPi * p.x), -c * c};
    }
    case Family::custom:
      return {e_->eval(p.x, p.y), f_->eval(p.x, p.y), g_->eval(p.x, p.y)};
  }
  return {};
}

MetricJet MetricField::raw_jet(Vec2 p) const {
  MetricJet j;
  j.value = raw(p);
  switch (spec_.family) {
    case Family::flat:
      break;
    case Family::strip: {
      const double a = 2.0 * kTwoPi * spec_.k;
      const double th = a * p.x;
      const double s = std::sin(th), c = std::cos(th);
      j.d_dx = {a * c, -a * s, -a * c};
      break;
    }
    case Family::galloway: {
      const double dw = -kPi * 2.0 * std::sin(2.0 * kTwoPi * p.x);
      j.d_dx = {-dw, -2.0 * kTwoPi * std::cos(kTwoPi * p.x), dw};
      break;
    }
    case Family::klein_galloway: {
      const double dc2 = -kPi * 2.0 * std::sin(2.0 * kTwoPi * p.x);
      j.d_dx = {dc2, 2.0 * kTwoPi * std::cos(kTwoPi * p.x), -dc2};
      break;
    }
    case Family::custom: {
      constexpr double h = 1e-5;
      const MetricValue xp = raw({p.x + h, p.y}), xm = raw({p.x - h, p.y});
      const MetricValue yp = raw({p.x, p.y + h}), ym = raw({p.x, p.y - h});
      j.d_dx = {(xp.E - xm.E) / (2 * h), (xp.F - xm.F) / (2 * h), (xp.G - xm.G) / (2 * h)};
      j.d_dy = {(yp.E - ym.E) / (2 * h), (yp.F - ym.F) / (2 * h), (yp.G - ym.G) / (2 * h)};
      break;
    }
  }
  return j;
}

MetricValue MetricField::value(Vec2 p) const {
  MetricValue v = raw(p);
  return spec_.negate ? v * -1.0 : v;
}

MetricJet MetricField::jet(Vec2 p) const {
  MetricJet j = raw_jet(p);
  if (spec_.negate) {
    j.value = j.value * -1.0;
    j.d_dx = j.d_dx * -1.0;
    j.d_dy = j.d_dy * -1.0;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Cone geometry

ConeAngles cone_angles(const MetricValue& g) {
  // Q(phi) = (E+G)/2 + R cos(2 phi - alpha) on unit vectors.
  const double half_diff = 0.5 * (g.E - g.G);
  const double r = std::hypot(half_diff, g.F);
  const double alpha = std::atan2(g.F, half_diff);
  double c = -0.5 * (g.E + g.G) / r;
  c = std::clamp(c, -1.0, 1.0);
  return {0.5 * alpha, std::acos(c)};
}

// Future time orientation sampled on a grid of the fundamental domain,
// obtained by lifting the timelike bisector line field from a reference
// vector at the origin.
class TimeOrientation {
 public:
  static constexpr int kN = 256;

  explicit TimeOrientation(const MetricField& field) : axes_(kN * kN) {
    auto axis_line = [&](double x, double y) {
      const ConeAngles ca = cone_angles(field.value({x, y}));
      return unit_at(ca.spacelike_axis + kPi / 2);
    };
    auto orient = [](Vec2 v, Vec2 ref) { return dot(v, ref) < 0.0 ? -v : v; };

    // Reference: bisector at the origin with positive x component (or positive
    // y when vertical), flipped by the time sign.
    Vec2 ref = axis_line(0.0, 0.0);
    if (ref.x < -1e-14 || (std::abs(ref.x) <= 1e-14 && ref.y < 0.0)) ref = -ref;
    if (field.spec().time_sign < 0) ref = -ref;

    orientable_ = true;
    Vec2 prev = ref;
    for (int i = 0; i < kN; ++i) {
      Vec2 v = orient(axis_line(static_cast<double>(i) / kN, 0.0), prev);
      at(i, 0) = v;
      prev = v;
    }
    if (dot(orient(axis_line(1.0, 0.0), prev), ref) < 0.0) orientable_ = false;
    for (int i = 0; i < kN; ++i) {
      prev = at(i, 0);
      const double x = static_cast<double>(i) / kN;
      for (int j = 1; j < kN; ++j) {
        Vec2 v = orient(axis_line(x, static_cast<double>(j) / kN), prev);
        at(i, j) = v;
        prev = v;
      }
      if (dot(orient(axis_line(x, 1.0), prev), at(i, 0)) < 0.0) orientable_ = false;
    }
  }

  Vec2 reference_at(Vec2 p) const {
    const int i = static_cast<int>(std::lround(mod1(p.x) * kN)) % kN;
    const int j = static_cast<int>(std::lround(mod1(p.y) * kN)) % kN;
    return axes_[static_cast<std::size_t>(i * kN + j)];
  }

  bool orientable() const { return orientable_; }

 private:
  Vec2& at(int i, int j) { return axes_[static_cast<std::size_t>(i * kN + j)]; }

  std::vector<Vec2> axes_;
  bool orientable_ = true;
};

// ---------------------------------------------------------------------------
// SurfaceModel

namespace {

void check_periodicity(const MetricField& field) {
  constexpr int n = 24;
  constexpr double tol = 1e-9;
  const bool klein = field.spec().topology == Topology::klein;
  auto close = [&](const MetricValue& a, const MetricValue& b, double f_sign) {
    return std::abs(a.E - b.E) <= tol && std::abs(a.F - f_sign * b.F) <= tol &&
           std::abs(a.G - b.G) <= tol;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 p{(i + 0.37) / n, (j + 0.61) / n};
      const MetricValue v = field.value(p);
      if (!close(v, field.value({p.x + 1.0, p.y}), 1.0) ||
          !close(v, field.value({p.x, p.y + 1.0}), 1.0)) {
        throw ModelRejected("metric coefficients are not 1-periodic", {p});
      }
      if (klein && !close(v, field.value(SurfaceModel::glide(p)), -1.0)) {
        throw ModelRejected("metric is not invariant under the glide (x,y)->(x+1/2,-y)", {p});
      }
    }
  }
}

}  // namespace

SurfaceModel::SurfaceModel(ModelSpec spec) : field_(spec) {
  auto bad = verify_lorentzian(field_, 256);
  if (!bad.empty()) throw ModelRejected("not Lorentzian", std::move(bad));
  check_periodicity(field_);
  orientation_ = std::make_shared<const TimeOrientation>(field_);
}

SurfaceModel SurfaceModel::flat(double E, double F, double G) {
  return SurfaceModel(ModelSpec::flat(E, F, G));
}
SurfaceModel SurfaceModel::strip(int k) { return SurfaceModel(ModelSpec::strip(k)); }
SurfaceModel SurfaceModel::galloway(double eps) {
  return SurfaceModel(ModelSpec::galloway(eps));
}
SurfaceModel SurfaceModel::klein_galloway() {
  return SurfaceModel(ModelSpec::klein_galloway());
}

SurfaceModel SurfaceModel::negated() const {
  ModelSpec s = spec();
  s.negate = !s.negate;
  return SurfaceModel(s);
}

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string SurfaceModel::name() const {
  const ModelSpec& s = spec();
  std::ostringstream os;
  if (s.negate) os << "-";
  switch (s.family) {
    case Family::flat:
      os << "flat(" << shortest(s.E) << "," << shortest(s.F) << "," << shortest(s.G) << ")";
      break;
    case Family::strip:
      os << "strip_k(" << s.k << ")";
      break;
    case Family::galloway:
      os << "galloway_eps(" << shortest(s.eps) << ")";
      break;
    case Family::klein_galloway:
      os << "klein_galloway";
      break;
    case Family::custom:
      os << "custom(" << s.expr_E << "; " << s.expr_F << "; " << s.expr_G << ")";
      break;
  }
  if (s.family != Family::klein_galloway && s.topology == Topology::klein) os << "/klein";
  return os.str();
}

Vec2 SurfaceModel::future_axis(Vec2 p) const {
  const ConeAngles ca = cone_angles(metric(p));
  Vec2 axis = unit_at(ca.spacelike_axis + kPi / 2);
  return dot(axis, orientation_->reference_at(p)) < 0.0 ? -axis : axis;
}

bool SurfaceModel::time_orientable() const { return orientation_->orientable(); }

// ---------------------------------------------------------------------------
// Operations

MetricValue eval_metric(const SurfaceModel& model, Vec2 p) { return model.metric(p); }

ChristoffelValue christoffels_from_jet(const MetricJet& j) {
  const MetricValue& g = j.value;
  const double d = g.det();
  const double ixx = g.G / d, ixy = -g.F / d, iyy = g.E / d;
  const MetricValue& gx = j.d_dx;
  const MetricValue& gy = j.d_dy;
  // Lowered symbols Gamma_{l,ij}.
  const double l_x_xx = 0.5 * gx.E;
  const double l_x_xy = 0.5 * gy.E;
  const double l_x_yy = gy.F - 0.5 * gx.G;
  const double l_y_xx = gx.F - 0.5 * gy.E;
  const double l_y_xy = 0.5 * gx.G;
  const double l_y_yy = 0.5 * gy.G;
  ChristoffelValue c;
  c.x_xx = ixx * l_x_xx + ixy * l_y_xx;
  c.x_xy = ixx * l_x_xy + ixy * l_y_xy;
  c.x_yy = ixx * l_x_yy + ixy * l_y_yy;
  c.y_xx = ixy * l_x_xx + iyy * l_y_xx;
  c.y_xy = ixy * l_x_xy + iyy * l_y_xy;
  c.y_yy = ixy * l_x_yy + iyy * l_y_yy;
  return c;
}

ChristoffelValue christoffels(const SurfaceModel& model, Vec2 p) {
  const MetricJet j = model.jet(p);
  if (!j.value.lorentzian()) throw DegenerateMetric(p);
  return christoffels_from_jet(j);
}

CausalType causal_type(const MetricValue& g, Vec2 v, double tol) {
  const double q = g.quad(v);
  const double scale = tol * dot(v, v);
  if (q < -scale) return CausalType::timelike;
  if (q > scale) return CausalType::spacelike;
  return CausalType::lightlike;
}

CausalType causal_type(const SurfaceModel& model, Vec2 p, Vec2 v, double tol) {
  return causal_type(model.metric(p), v, tol);
}

NullPair null_directions(const SurfaceModel& model, Vec2 p) {
  const MetricValue g = model.metric(p);
  if (!g.lorentzian()) throw DegenerateMetric(p);
  const ConeAngles ca = cone_angles(g);
  const double a = angle_of(model.future_axis(p));
  const double half = 0.5 * (kPi - ca.beta);
  NullPair out{unit_at(a + half), unit_at(a - half)};
  if (model.spec().swap_null) std::swap(out.plus, out.minus);
  return out;
}

Vec2 null_line(const SurfaceModel& model, int sign, Vec2 p, Vec2 reference) {
  const ConeAngles ca = cone_angles(model.metric(p));
  if (model.spec().swap_null) sign = -sign;
  const Vec2 d = unit_at(ca.spacelike_axis + (sign > 0 ? -0.5 : 0.5) * ca.beta);
  return dot(d, reference) < 0.0 ? -d : d;
}

std::vector<Vec2> verify_lorentzian(const MetricField& field, int grid_n) {
  std::vector<Vec2> bad;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const Vec2 p{static_cast<double>(i) / grid_n, static_cast<double>(j) / grid_n};
      if (field.value(p).det() >= -1e-12) bad.push_back(p);
    }
  }
  return bad;
}

std::vector<Vec2> verify_lorentzian(const SurfaceModel& model, int grid_n) {
  return verify_lorentzian(model.field(), grid_n);
}

}  // namespace lorenzlab
