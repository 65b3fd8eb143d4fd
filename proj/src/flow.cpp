#include "lorenzlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lorenzlab {

std::string to_string(FlowExit e) {
  switch (e) {
    case FlowExit::completed:
      return "completed";
    case FlowExit::velocity_blowup:
      return "velocity_blowup";
    case FlowExit::step_underflow:
      return "step_underflow";
    case FlowExit::max_steps:
      return "max_steps";
    case FlowExit::degenerate:
      return "degenerate";
    case FlowExit::event:
      return "event";
    case FlowExit::tube_exit:
      return "tube_exit";
  }
  return "?";
}

namespace {

FlowExit exit_from(ode::Status s) {
  switch (s) {
    case ode::Status::finished:
      return FlowExit::completed;
    case ode::Status::event:
      return FlowExit::event;
    case ode::Status::stopped:
      return FlowExit::velocity_blowup;
    case ode::Status::step_underflow:
      return FlowExit::step_underflow;
    case ode::Status::max_steps:
      return FlowExit::max_steps;
    case ode::Status::rhs_failure:
      return FlowExit::degenerate;
  }
  return FlowExit::completed;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm(p - (a + ab * s));
}

}  // namespace

bool GeodesicRhs::operator()(double, const ode::State<4>& s, ode::State<4>& d) const {
  const MetricJet j = model->jet({s[0], s[1]});
  if (!j.value.lorentzian()) return false;
  const Vec2 acc = christoffels_from_jet(j).contract({s[2], s[3]});
  d = {s[2], s[3], -acc.x, -acc.y};
  return std::isfinite(acc.x) && std::isfinite(acc.y);
}

GeodesicPath integrate_geodesic(const SurfaceModel& model, const TangentState& s0, double t_end,
                                double tol) {
  FlowOptions opt;
  opt.tol = tol;
  return integrate_geodesic(model, s0, t_end, opt);
}

GeodesicPath integrate_geodesic(const SurfaceModel& model, const TangentState& s0, double t_end,
                                const FlowOptions& opt) {
  GeodesicPath path;
  ode::Options o;
  o.rtol = opt.tol;
  o.atol = opt.tol;
  o.h_max = opt.h_max;
  double last_t = s0.t;
  path.min_step = std::numeric_limits<double>::infinity();
  auto observer = [&](double t, const ode::State<4>& s) {
    const TangentState ts = TangentState::from(t, s);
    if (!path.samples.empty()) {
      const double h = std::abs(t - last_t);
      path.min_step = std::min(path.min_step, h);
      path.max_step = std::max(path.max_step, h);
    }
    last_t = t;
    path.samples.push_back(ts);
    path.energy.push_back(model.metric(ts.pos()).quad(ts.vel()));
    return norm(ts.vel()) <= opt.velocity_cap;
  };
  const auto res = ode::integrate<4>(GeodesicRhs{&model}, s0.t, s0.state(), t_end, o, observer);
  path.exit = exit_from(res.status);
  path.reached_t = res.t;
  path.rejected_steps = res.rejected;
  if (path.samples.size() < 2) path.min_step = 0.0;
  return path;
}

double energy_drift(const GeodesicPath& path) {
  double m = 0.0;
  for (double e : path.energy) m = std::max(m, std::abs(e - path.energy.front()));
  return m;
}

// ---------------------------------------------------------------------------
// Leaves

namespace {

struct LeafRhs {
  const SurfaceModel* model;
  int sign;
  const Vec2* reference;
  bool operator()(double, const ode::State<2>& s, ode::State<2>& d) const {
    const Vec2 p{s[0], s[1]};
    if (!model->metric(p).lorentzian()) return false;
    const Vec2 dir = null_line(*model, sign, p, *reference);
    // Continuity of the direction choice across the step.
    if (dot(dir, *reference) < 0.5) return false;
    d = {dir.x, dir.y};
    return true;
  }
};

template <class Event>
LeafPath run_leaf(const SurfaceModel& model, int sign, Vec2 p0, double arclen,
                  const LeafOptions& opt, Event&& event) {
  LeafPath path;
  path.sign = sign;
  Vec2 ref = opt.initial_direction
                 ? null_line(model, sign, p0, *opt.initial_direction)
                 : (sign > 0 ? null_directions(model, p0).plus : null_directions(model, p0).minus);
  ode::Options o;
  o.rtol = opt.tol;
  o.atol = opt.tol;
  o.h_max = opt.h_max;
  o.h_init = std::min(opt.h_max, 1e-3);
  auto observer = [&](double t, const ode::State<2>& s) {
    const Vec2 p{s[0], s[1]};
    path.points.push_back(p);
    path.arclength.push_back(t);
    if (model.metric(p).lorentzian()) ref = null_line(model, sign, p, ref);
    return true;
  };
  const auto res = ode::integrate<2>(LeafRhs{&model, sign, &ref}, 0.0, ode::State<2>{p0.x, p0.y},
                                     arclen, o, observer, std::forward<Event>(event));
  path.exit = exit_from(res.status);
  return path;
}

}  // namespace

LeafPath integrate_leaf(const SurfaceModel& model, int sign, Vec2 p0, double arclen,
                        const LeafOptions& opt) {
  if (!(arclen > 0.0)) throw FlowError("integrate_leaf: arclength must be positive");
  return run_leaf(model, sign, p0, arclen, opt, ode::NoEvent{});
}

LeafPath leaf_until_return(const SurfaceModel& model, int sign, Vec2 p0, double arclen_cap,
                           bool along_x, const LeafOptions& opt, int turns) {
  const double n = static_cast<double>(turns);
  auto event = [&](double, const ode::State<2>& s) {
    const double d = along_x ? s[0] - p0.x : s[1] - p0.y;
    return d * d - n * n;
  };
  LeafPath path = run_leaf(model, sign, p0, arclen_cap, opt, event);
  if (path.exit == FlowExit::event) {
    const Vec2 disp = path.end() - path.start();
    const long t = turns;
    path.period = along_x ? Class2{disp.x > 0 ? t : -t, std::lround(disp.y)}
                          : Class2{std::lround(disp.x), disp.y > 0 ? t : -t};
  }
  return path;
}

LeafPath reversed(const LeafPath& leaf) {
  LeafPath r = leaf;
  std::reverse(r.points.begin(), r.points.end());
  const double total = leaf.length();
  for (std::size_t i = 0; i < r.arclength.size(); ++i) {
    r.arclength[i] = total - leaf.arclength[leaf.arclength.size() - 1 - i];
  }
  if (leaf.period) r.period = -*leaf.period;
  return r;
}

double distance_to_polyline(Vec2 p, const std::vector<Vec2>& poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Vec2 mid = (poly[i] + poly[i + 1]) * 0.5;
    const Vec2 q = mid + torus_offset(p - mid);
    best = std::min(best, point_segment_distance(q, poly[i], poly[i + 1]));
  }
  if (poly.size() == 1) best = norm(torus_offset(p - poly[0]));
  return best;
}

namespace {

// log lambda along the leaf from its start in its own orientation; nullopt if
// the integration does not reproduce the closed trace.
std::optional<double> log_scaling(const SurfaceModel& model, const LeafPath& leaf) {
  const Vec2 p0 = leaf.start();
  const Vec2 shift = leaf.period->vec();
  Vec2 ref = null_line(model, leaf.sign, p0, leaf.points[1] - leaf.points[0]);
  auto rhs = [&](double, const ode::State<3>& s, ode::State<3>& d) {
    const Vec2 p{s[0], s[1]};
    const MetricJet j = model.jet(p);
    if (!j.value.lorentzian()) return false;
    const Vec2 dir = null_line(model, leaf.sign, p, ref);
    if (dot(dir, ref) < 0.5) return false;
    const double kappa = dot(christoffels_from_jet(j).contract(dir), dir);
    d = {dir.x, dir.y, -kappa};
    return std::isfinite(kappa);
  };
  auto observer = [&](double, const ode::State<3>& s) {
    const Vec2 p{s[0], s[1]};
    if (model.metric(p).lorentzian()) ref = null_line(model, leaf.sign, p, ref);
    return true;
  };
  ode::Options o;
  o.rtol = 1e-12;
  o.atol = 1e-12;
  o.h_max = 0.01;
  o.h_init = 1e-3;
  const auto res = ode::integrate<3>(rhs, 0.0, ode::State<3>{p0.x, p0.y, 0.0}, leaf.length(), o,
                                     observer);
  if (res.status != ode::Status::finished) return std::nullopt;
  if (norm(Vec2{res.y[0], res.y[1]} - p0 - shift) > 1e-6) return std::nullopt;
  return res.y[2];
}

}  // namespace

double cycle_scaling(const SurfaceModel& model, const LeafPath& leaf) {
  if (!leaf.period || leaf.points.size() < 2) {
    throw FlowError("cycle_scaling: leaf is not a closed cycle");
  }
  if (norm(leaf.end() - leaf.start() - leaf.period->vec()) > 1e-8) {
    throw FlowError("cycle_scaling: leaf does not close within 1e-8");
  }
  // A lightlike geodesic runs along its leaf. With c the unit-speed leaf,
  // nabla_c' c' = kappa c' and kappa = <Gamma(c', c'), c'> because c'' is
  // orthogonal to c'. The affine speed then scales by exp(-int kappa ds).
  // Integrating along the leaf avoids the transverse instability of the
  // geodesic and the speed blowup of incomplete cycles. A leaf that repels in
  // its own orientation is retraced backwards, which inverts the factor.
  if (const auto f = log_scaling(model, leaf)) return std::exp(*f);
  if (const auto b = log_scaling(model, reversed(leaf))) return std::exp(-*b);
  throw FlowError("cycle_scaling: input is not a closed leaf of the field");
}

}  // namespace lorenzlab
