#include "lorenzlab/search.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "lorenzlab/parallel.hpp"

namespace lorenzlab {

std::string to_string(RecordMethod m) {
  switch (m) {
    case RecordMethod::shooting:
      return "shooting";
    case RecordMethod::maximizer:
      return "maximizer";
    case RecordMethod::leaf:
      return "leaf";
  }
  return "?";
}

std::vector<Vec2> ClosedGeodesicRecord::points() const {
  std::vector<Vec2> out;
  out.reserve(trace.size());
  for (const auto& s : trace) out.push_back(s.pos());
  return out;
}

namespace {

using State4 = ode::State<4>;

struct SegmentRun {
  State4 end{};
  std::vector<double> steps;
  bool ok = false;
};

SegmentRun run_segment(const SurfaceModel& model, const State4& s, double dt, double tol,
                       double h_max = std::numeric_limits<double>::infinity(),
                       std::vector<TangentState>* samples = nullptr, double t_offset = 0.0) {
  SegmentRun run;
  ode::Options o;
  o.rtol = tol;
  o.atol = tol;
  o.h_max = h_max;
  auto observer = [&](double t, const State4& y) {
    if (samples) samples->push_back(TangentState::from(t + t_offset, y));
    return std::hypot(y[2], y[3]) <= 1e8;
  };
  const auto res =
      ode::integrate<4>(GeodesicRhs{&model}, 0.0, s, dt, o, observer, ode::NoEvent{}, &run.steps);
  run.ok = res.status == ode::Status::finished;
  run.end = res.y;
  return run;
}

State4 shifted(const State4& s, Class2 h) {
  return {s[0] + double(h.a), s[1] + double(h.b), s[2], s[3]};
}

double state_distance(const State4& a, const State4& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(m);
}

// Causal type of a closed orbit from its (conserved) energy, relative to the
// Riemannian speed.
CausalType orbit_type(const SurfaceModel& model, Vec2 p, Vec2 v) {
  const double e = model.metric(p).quad(v) / dot(v, v);
  if (e < -1e-8) return CausalType::timelike;
  if (e > 1e-8) return CausalType::spacelike;
  return CausalType::lightlike;
}

bool along_y_for(Class2 h) { return std::abs(h.b) >= std::abs(h.a); }

double trace_intercept(const std::vector<TangentState>& trace, Class2 h) {
  const bool along_y = along_y_for(h);
  auto along = [&](const TangentState& s) { return along_y ? s.y : s.x; };
  auto across = [&](const TangentState& s) { return along_y ? s.x : s.y; };
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    const double a0 = along(trace[i]), a1 = along(trace[i + 1]);
    const double level = std::floor(a0) == std::floor(a1) ? std::nan("") : std::max(std::floor(a0), std::floor(a1));
    if (a0 == std::floor(a0)) return mod1(across(trace[i]));
    if (std::isnan(level)) continue;
    const double w = (level - a0) / (a1 - a0);
    return mod1(across(trace[i]) + w * (across(trace[i + 1]) - across(trace[i])));
  }
  return mod1(across(trace.front()));
}

class MultipleShooting {
 public:
  MultipleShooting(const SurfaceModel& model, Class2 h, Vec2 section_point, Vec2 section_normal,
                   const ShootOptions& opt)
      : model_(model), h_(h), p_(section_point), n_(section_normal), opt_(opt),
        m_(opt.segments) {}

  int unknowns() const { return 4 * m_ + 1; }
  int equations() const { return 4 * m_ + 2; }

  State4 node(const Eigen::VectorXd& x, int i) const {
    return {x[4 * i], x[4 * i + 1], x[4 * i + 2], x[4 * i + 3]};
  }

  // Residual and per-segment runs; nullopt when a segment cannot be integrated.
  std::optional<Eigen::VectorXd> residual(const Eigen::VectorXd& x,
                                          std::vector<SegmentRun>* runs = nullptr) const {
    const double T = x[4 * m_];
    if (!(T > 0.0)) return std::nullopt;
    const double dt = T / m_;
    Eigen::VectorXd F(equations());
    if (runs) runs->assign(std::size_t(m_), {});
    for (int i = 0; i < m_; ++i) {
      SegmentRun r = run_segment(model_, node(x, i), dt, opt_.ode_tol);
      if (!r.ok) return std::nullopt;
      const State4 target = i + 1 < m_ ? node(x, i + 1) : shifted(node(x, 0), h_);
      for (int c = 0; c < 4; ++c) F[4 * i + c] = r.end[c] - target[c];
      if (runs) (*runs)[std::size_t(i)] = std::move(r);
    }
    F[4 * m_] = x[2] * x[2] + x[3] * x[3] - 1.0;
    F[4 * m_ + 1] = (x[0] - p_.x) * n_.x + (x[1] - p_.y) * n_.y;
    return F;
  }

  std::optional<Eigen::MatrixXd> jacobian(const Eigen::VectorXd& x,
                                          const std::vector<SegmentRun>& runs) const {
    const double T = x[4 * m_];
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(equations(), unknowns());
    for (int i = 0; i < m_; ++i) {
      const State4 s = node(x, i);
      const SegmentRun& r = runs[std::size_t(i)];
      for (int j = 0; j < 4; ++j) {
        State4 y = s;
        const double eps = 1e-7 * std::max(1.0, std::abs(s[j]));
        y[j] += eps;
        if (!ode::replay<4>(GeodesicRhs{&model_}, 0.0, y, r.steps)) return std::nullopt;
        for (int c = 0; c < 4; ++c) J(4 * i + c, 4 * i + j) = (y[c] - r.end[c]) / eps;
      }
      const int next = i + 1 < m_ ? i + 1 : 0;
      for (int c = 0; c < 4; ++c) J(4 * i + c, 4 * next + c) -= 1.0;
      State4 f;
      GeodesicRhs{&model_}(0.0, r.end, f);
      for (int c = 0; c < 4; ++c) J(4 * i + c, 4 * m_) = f[c] / m_;
    }
    (void)T;
    J(4 * m_, 2) = 2.0 * x[2];
    J(4 * m_, 3) = 2.0 * x[3];
    J(4 * m_ + 1, 0) = n_.x;
    J(4 * m_ + 1, 1) = n_.y;
    return J;
  }

  int segments() const { return m_; }

 private:
  const SurfaceModel& model_;
  Class2 h_;
  Vec2 p_, n_;
  const ShootOptions& opt_;
  int m_;
};

}  // namespace

double closure_residual(const SurfaceModel& model, const ClosedGeodesicRecord& rec,
                        double ode_tol) {
  const std::size_t m = rec.nodes.size();
  const double dt = rec.period / double(m);
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const SegmentRun r = run_segment(model, rec.nodes[i].state(), dt, ode_tol);
    if (!r.ok) return std::numeric_limits<double>::infinity();
    const State4 target =
        i + 1 < m ? rec.nodes[i + 1].state() : shifted(rec.nodes[0].state(), rec.homology);
    worst = std::max(worst, state_distance(r.end, target));
  }
  return worst;
}

ShootResult shoot(const SurfaceModel& model, Class2 h, const TangentState& seed,
                  const ShootOptions& opt) {
  ShootResult out;
  if (h == Class2{0, 0}) {
    out.failure = "class (0,0) is not a torus loop class";
    return out;
  }
  const Vec2 hv = h.vec();
  Vec2 v = seed.vel();
  if (norm(v) == 0.0) {
    out.failure = "zero seed velocity";
    return out;
  }
  v = normalized(v);
  const double along = dot(v, normalized(hv));
  if (along < 0.2) {
    out.failure = "seed velocity not aligned with the class";
    return out;
  }
  const CausalType sector = orbit_type(model, seed.pos(), v);
  const int m = opt.segments;
  // Initial guess: nodes on the straight representative, moving with the seed
  // velocity at unit Riemannian speed.
  const double T0 = norm(hv) / along;
  if (T0 > opt.time_cap) {
    out.failure = "period guess exceeds the time cap";
    return out;
  }
  Eigen::VectorXd x(4 * m + 1);
  for (int i = 0; i < m; ++i) {
    const Vec2 p = seed.pos() + hv * (double(i) / m);
    x.segment<4>(4 * i) << p.x, p.y, v.x, v.y;
  }
  x[4 * m] = T0;

  const MultipleShooting ms(model, h, seed.pos(), v, opt);
  std::vector<SegmentRun> runs;
  auto F = ms.residual(x, &runs);
  if (!F) {
    out.failure = "initial segments incomplete";
    return out;
  }
  const double target = 0.01 * opt.closure_tol;
  int it = 0;
  for (; it < opt.max_newton; ++it) {
    if (F->lpNorm<Eigen::Infinity>() <= target) break;
    const auto J = ms.jacobian(x, runs);
    if (!J) {
      out.failure = "jacobian evaluation failed";
      return out;
    }
    const Eigen::VectorXd delta = J->completeOrthogonalDecomposition().solve(-*F);
    if (!delta.allFinite()) {
      out.failure = "singular jacobian";
      return out;
    }
    double pos_step = 0.0;
    for (int i = 0; i < m; ++i)
      pos_step = std::max({pos_step, std::abs(delta[4 * i]), std::abs(delta[4 * i + 1])});
    double scale = 1.0;
    if (pos_step > 0.25) scale = 0.25 / pos_step;
    if (std::abs(delta[4 * m]) > 0.5 * x[4 * m]) scale = std::min(scale, 0.5 * x[4 * m] / std::abs(delta[4 * m]));
    const double f0 = F->squaredNorm();
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, scale *= 0.5) {
      const Eigen::VectorXd xt = x + scale * delta;
      std::vector<SegmentRun> rt;
      auto Ft = ms.residual(xt, &rt);
      if (Ft && Ft->squaredNorm() < f0 * (1.0 - 1e-4 * scale)) {
        x = xt;
        F = std::move(Ft);
        runs = std::move(rt);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Stagnation at round-off level still counts as converged.
      if (F->lpNorm<Eigen::Infinity>() <= opt.closure_tol) break;
      out.failure = "line search failed";
      out.iterations = it;
      return out;
    }
  }
  out.iterations = it;
  if (F->lpNorm<Eigen::Infinity>() > opt.closure_tol) {
    out.failure = "no convergence after " + std::to_string(it) + " Newton steps";
    return out;
  }

  ClosedGeodesicRecord rec;
  rec.homology = h;
  rec.period = x[4 * m];
  rec.method = RecordMethod::shooting;
  const double dt = rec.period / m;
  for (int i = 0; i < m; ++i) rec.nodes.push_back(TangentState::from(dt * i, ms.node(x, i)));
  const Vec2 p0 = rec.nodes[0].pos(), v0 = rec.nodes[0].vel();
  rec.causal = orbit_type(model, p0, v0);
  if (rec.causal != sector) {
    out.failure = "converged to a " + to_string(rec.causal) + " orbit from a " +
                  to_string(sector) + " seed";
    return out;
  }
  for (int i = 0; i < m; ++i) {
    std::vector<TangentState> samples;
    const SegmentRun r =
        run_segment(model, rec.nodes[std::size_t(i)].state(), dt, opt.ode_tol, dt / 8, &samples, dt * i);
    if (!r.ok) {
      out.failure = "trace re-integration failed";
      return out;
    }
    if (i > 0) samples.erase(samples.begin());
    rec.trace.insert(rec.trace.end(), samples.begin(), samples.end());
  }
  const double e0 = model.metric(p0).quad(v0);
  for (const auto& s : rec.trace) {
    if (orbit_type(model, s.pos(), s.vel()) != rec.causal) {
      out.failure = "causal type changes along the orbit";
      return out;
    }
  }
  rec.length = std::sqrt(std::abs(e0)) * rec.period;
  rec.residual = closure_residual(model, rec, opt.ode_tol);
  if (!(rec.residual <= opt.closure_tol)) {
    out.failure = "re-integration residual above tolerance";
    return out;
  }
  rec.intercept = trace_intercept(rec.trace, h);
  out.record = std::move(rec);
  return out;
}

// ---------------------------------------------------------------------------
// Self-intersections

namespace {

struct Piece {
  Vec2 a, b;
  std::size_t index;
};

// Splits the closed trace at the integer grid lines and reduces every piece
// into the fundamental domain.
std::vector<Piece> domain_pieces(const std::vector<Vec2>& trace) {
  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    Vec2 a = trace[i];
    const Vec2 b = trace[i + 1];
    double s = 0.0;
    while (s < 1.0) {
      // Next grid crossing along the segment from parameter s.
      const Vec2 p = a + (b - a) * s;
      double next = 1.0;
      for (int c = 0; c < 2; ++c) {
        const double p0 = c == 0 ? p.x : p.y;
        const double d = c == 0 ? b.x - a.x : b.y - a.y;
        if (d == 0.0) continue;
        const double line = d > 0 ? std::floor(p0) + 1.0 : std::ceil(p0) - 1.0;
        const double t = s + (line - p0) / d;
        if (t > s + 1e-15 && t < next) next = t;
      }
      const Vec2 q = a + (b - a) * next;
      const Vec2 mid = (p + q) * 0.5;
      const Vec2 shift{std::floor(mid.x), std::floor(mid.y)};
      out.push_back({p - shift, q - shift, out.size()});
      s = next;
    }
  }
  return out;
}

bool proper_cross(const Piece& p, const Piece& q, Vec2& at) {
  const Vec2 r = p.b - p.a, s = q.b - q.a;
  const double den = cross(r, s);
  // Parallel or overlapping pieces are not transversal crossings.
  if (std::abs(den) <= 1e-9 * norm(r) * norm(s)) return false;
  const double t = cross(q.a - p.a, s) / den;
  const double u = cross(q.a - p.a, r) / den;
  const double eps = 1e-12;
  if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps) return false;
  at = p.a + r * t;
  return true;
}

}  // namespace

std::vector<Vec2> self_intersections(const std::vector<Vec2>& trace) {
  std::vector<Vec2> out;
  if (trace.size() < 3) return out;
  const std::vector<Piece> pieces = domain_pieces(trace);
  std::vector<std::size_t> order(pieces.size());
  std::iota(order.begin(), order.end(), 0);
  // Sweep in x over piece bounding boxes.
  auto lo = [&](std::size_t i) { return std::min(pieces[i].a.x, pieces[i].b.x); };
  auto hi = [&](std::size_t i) { return std::max(pieces[i].a.x, pieces[i].b.x); };
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return lo(i) < lo(j); });
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    for (std::size_t l = k + 1; l < order.size() && lo(order[l]) <= hi(i); ++l) {
      const std::size_t j = order[l];
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap == 1 || gap == pieces.size() - 1) continue;  // neighbours share an endpoint
      Vec2 at;
      if (proper_cross(pieces[i], pieces[j], at)) {
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](Vec2 q) { return norm(q - at) < 1e-9; });
        if (!dup) out.push_back(at);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](Vec2 a, Vec2 b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); });
  return out;
}

double trace_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b, bool glide) {
  auto one_way = [](const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    double worst = 0.0;
    for (const Vec2 x : p) worst = std::max(worst, distance_to_polyline(x, q));
    return worst;
  };
  double d = std::max(one_way(a, b), one_way(b, a));
  if (glide) {
    std::vector<Vec2> g;
    g.reserve(b.size());
    for (const Vec2 p : b) g.push_back(SurfaceModel::glide(p));
    d = std::min(d, std::max(one_way(a, g), one_way(g, a)));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Survey

std::vector<Class2> primitive_classes(int max_coord) {
  std::vector<Class2> out;
  for (long a = 0; a <= max_coord; ++a)
    for (long b = -max_coord; b <= max_coord; ++b) {
      const Class2 c{a, b};
      if (std::gcd(a, std::abs(b)) == 1 && canonical_class(c) == c) out.push_back(c);
    }
  std::sort(out.begin(), out.end(), [](Class2 p, Class2 q) {
    const long sp = std::max(std::abs(p.a), std::abs(p.b)), sq = std::max(std::abs(q.a), std::abs(q.b));
    return std::tie(sp, p) < std::tie(sq, q);
  });
  return out;
}

namespace {

struct Seed {
  TangentState state;
  Class2 h;
};

Vec2 rotate(Vec2 v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Cell offsets of the intercept grid: centered, or jittered by a seeded RNG.
std::vector<double> grid_offsets(int n, unsigned long long seed) {
  std::vector<double> out(std::size_t(n), 0.5);
  if (seed == 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.25, 0.75);
  for (double& o : out) o = jitter(rng);
  return out;
}

std::vector<Seed> annulus_seeds(const SurfaceModel& model, const Annulus& z, bool along_y,
                                const std::vector<double>& offsets) {
  std::vector<Seed> out;
  const Vec2 loop = z.loop_class.vec();
  const int n = int(offsets.size());
  for (int j = 0; j < n; ++j) {
    const double u = z.lo + (z.hi - z.lo) * (j + offsets[std::size_t(j)]) / n;
    const Vec2 p = along_y ? Vec2{mod1(u), 0.0} : Vec2{0.0, mod1(u)};
    const MetricValue g = model.metric(p);
    const ConeAngles ca = cone_angles(g);
    for (CausalType sector : {CausalType::timelike, CausalType::spacelike}) {
      const bool timelike = sector == CausalType::timelike;
      const Vec2 axis = timelike ? model.future_axis(p) : unit_at(ca.spacelike_axis);
      const double half = timelike ? 0.5 * (kPi - ca.beta) : 0.5 * ca.beta;
      for (double off : {-0.5, 0.0, 0.5}) {
        Vec2 d = rotate(axis, off * half);
        Class2 h = z.loop_class;
        if (dot(d, loop) < 0.0) h = -h;
        out.push_back({TangentState{0.0, p.x, p.y, d.x, d.y}, h});
      }
    }
  }
  return out;
}

std::vector<Seed> class_seeds(Class2 h, const std::vector<double>& offsets) {
  std::vector<Seed> out;
  const Vec2 d = normalized(h.vec());
  const int n = int(offsets.size());
  for (int j = 0; j < n; ++j) {
    const double u = (j + offsets[std::size_t(j)]) / n;
    const Vec2 p = along_y_for(h) ? Vec2{u, 0.0} : Vec2{0.0, u};
    out.push_back({TangentState{0.0, p.x, p.y, d.x, d.y}, h});
  }
  return out;
}

std::tuple<Class2, double> sort_key(const ClosedGeodesicRecord& r) {
  return {canonical_class(r.homology), r.intercept};
}

}  // namespace

SurveyResult survey(const SurfaceModel& model, const FoliationAtlas& atlas,
                    const SurveyOptions& opt) {
  SurveyResult out;
  std::vector<std::optional<ClosedGeodesicRecord>> found;
  const bool glide = model.is_klein();

  auto merge = [&](ClosedGeodesicRecord rec, std::vector<ClosedGeodesicRecord>& into) {
    const auto pts = rec.points();
    for (auto& other : into) {
      if (trace_distance(pts, other.points(), glide) < opt.dedup_tol) {
        if (rec.residual < other.residual && rec.method == other.method) other = std::move(rec);
        return;
      }
    }
    into.push_back(std::move(rec));
  };

  const std::vector<double> offsets = grid_offsets(opt.intercepts, opt.jitter_seed);
  std::vector<ClosedGeodesicRecord> records;
  if (atlas.verdict.verdict == SurfaceClass::B) {
    std::vector<Seed> seeds;
    for (const Annulus& z : atlas.annuli) {
      const auto s = annulus_seeds(model, z, atlas.along_y, offsets);
      seeds.insert(seeds.end(), s.begin(), s.end());
    }
    found.resize(seeds.size());
    parallel_for(seeds.size(), opt.workers, [&](std::size_t i) {
      ShootResult r = shoot(model, seeds[i].h, seeds[i].state, opt.shoot);
      if (r) found[i] = std::move(r.record);
    });
    out.shots = int(seeds.size());
    for (auto& f : found) {
      if (!f) continue;
      ++out.converged;
      merge(std::move(*f), records);
    }
    // Complete closed leaves are closed lightlike geodesics.
    for (const Leaf& leaf : atlas.leaves) {
      if (!leaf.lambda || std::abs(*leaf.lambda - 1.0) > opt.lightlike_tol) continue;
      const Vec2 p = leaf.trace.front();
      const Vec2 d = normalized(leaf.trace[1] - leaf.trace[0]);
      ShootResult r = shoot(model, *leaf.homology, TangentState{0.0, p.x, p.y, d.x, d.y}, opt.shoot);
      if (!r) {
        out.warnings.push_back("complete leaf at intercept " + std::to_string(leaf.intercept) +
                               " not certified: " + r.failure);
        continue;
      }
      r.record->method = RecordMethod::leaf;
      r.record->lambda = leaf.lambda;
      merge(std::move(*r.record), records);
    }
  } else {
    const std::vector<Class2> classes =
        opt.classes.empty() ? primitive_classes(opt.max_class_coord) : opt.classes;
    std::vector<std::optional<ClosedGeodesicRecord>> per_class(classes.size());
    std::vector<int> shots(classes.size(), 0);
    parallel_for(classes.size(), opt.workers, [&](std::size_t c) {
      for (const Seed& s : class_seeds(classes[c], offsets)) {
        ++shots[c];
        ShootResult r = shoot(model, s.h, s.state, opt.shoot);
        if (r) {
          per_class[c] = std::move(r.record);
          return;
        }
      }
    });
    for (std::size_t c = 0; c < classes.size(); ++c) {
      out.shots += shots[c];
      if (!per_class[c]) {
        out.warnings.push_back("no closed geodesic found in class (" +
                               std::to_string(classes[c].a) + "," + std::to_string(classes[c].b) + ")");
        continue;
      }
      ++out.converged;
      records.push_back(std::move(*per_class[c]));
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return sort_key(a) < sort_key(b); });
  out.records = std::move(records);
  return out;
}

// ---------------------------------------------------------------------------
// Causal polygon maximizer

Vec2 CausalPolygon::vertex(std::size_t i) const {
  const std::size_t n = vertices.size();
  return vertices[i % n] + homology.vec() * double(i / n);
}

double CausalPolygon::riemannian_length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) total += norm(vertex(i + 1) - vertex(i));
  return total;
}

namespace {

double orientation_sign(CausalSign s) { return s == CausalSign::nonspacelike ? -1.0 : 1.0; }

// Per-edge slack sigma g_mid(d, d) and optionally the gradient of the length.
struct PolygonEval {
  std::vector<double> slack;
  double length = 0.0;
  std::vector<Vec2> gradient;
  bool feasible = true;
};

PolygonEval evaluate(const SurfaceModel& model, const CausalPolygon& poly, bool with_gradient) {
  const std::size_t n = poly.vertices.size();
  const double sigma = orientation_sign(poly.sign);
  PolygonEval ev;
  ev.slack.resize(n);
  if (with_gradient) ev.gradient.assign(n, Vec2{});
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly.vertex(i), b = poly.vertex(i + 1);
    const Vec2 d = b - a;
    const Vec2 mid = (a + b) * 0.5;
    const MetricJet jet = model.jet(mid);
    const double q = sigma * jet.value.quad(d);
    ev.slack[i] = q;
    if (!(q > 1e-14 * dot(d, d))) {
      ev.feasible = false;
      continue;
    }
    const double l = std::sqrt(q);
    ev.length += l;
    if (!with_gradient) continue;
    const Vec2 gd = jet.value.lower(d) * 2.0;
    const Vec2 dg{0.5 * jet.d_dx.quad(d), 0.5 * jet.d_dy.quad(d)};
    const double c = sigma / (2.0 * l);
    ev.gradient[(i + 1) % n] = ev.gradient[(i + 1) % n] + (gd + dg) * c;
    ev.gradient[i] = ev.gradient[i] + (dg - gd) * c;
  }
  return ev;
}

double squared_norm(const std::vector<Vec2>& g) {
  double s = 0.0;
  for (const Vec2 v : g) s += dot(v, v);
  return s;
}

}  // namespace

double polygon_length(const SurfaceModel& model, const CausalPolygon& poly) {
  return evaluate(model, poly, false).length;
}

MaximizeResult maximize_length(const SurfaceModel& model, Class2 h, CausalSign sign,
                               const MaximizeOptions& opt) {
  if (h == Class2{0, 0}) throw SearchError("class (0,0) has no causal loops to maximize over");
  const std::size_t n = std::size_t(std::max(opt.vertices, 3));
  CausalPolygon poly{{}, h, sign, {}};
  poly.vertices.resize(n);
  bool started = false;
  for (int j = 0; j < 64 && !started; ++j) {
    const double u = (j + 0.5) / 64.0;
    const Vec2 p0 = along_y_for(h) ? Vec2{u, 0.0} : Vec2{0.0, u};
    for (std::size_t i = 0; i < n; ++i) poly.vertices[i] = p0 + h.vec() * (double(i) / double(n));
    started = evaluate(model, poly, false).feasible;
  }
  if (!started)
    throw SearchError("no straight causal representative of class (" + std::to_string(h.a) + "," +
                      std::to_string(h.b) + ")");

  MaximizeResult out;
  const double cap = opt.cap_factor * norm(h.vec());
  PolygonEval ev = evaluate(model, poly, true);
  out.history.push_back(ev.length);
  double g2 = squared_norm(ev.gradient);
  double step = 0.01 / std::sqrt(std::max(g2, 1e-300));
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (std::sqrt(g2) <= opt.gradient_tol) break;
    bool accepted = false;
    CausalPolygon trial = poly;
    PolygonEval tev;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial.vertices[i] = poly.vertices[i] + ev.gradient[i] * step;
      tev = evaluate(model, trial, true);
      if (tev.feasible && tev.length >= ev.length + 1e-4 * step * g2) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 sv = trial.vertices[i] - poly.vertices[i];
      const Vec2 yv = tev.gradient[i] - ev.gradient[i];
      sy += dot(sv, yv);
      ss += dot(sv, sv);
    }
    poly = std::move(trial);
    ev = std::move(tev);
    g2 = squared_norm(ev.gradient);
    out.history.push_back(ev.length);
    step = sy < 0.0 ? ss / -sy : 2.0 * step;
    step = std::clamp(step, 1e-12, 1e2);
    if (poly.riemannian_length() > cap) {
      out.cap_exceeded = true;
      break;
    }
  }
  out.iterations = it;
  out.gradient_norm = std::sqrt(g2);
  out.length = ev.length;
  poly.slack = ev.slack;
  out.polygon = poly;

  if (opt.certify && !out.cap_exceeded) {
    const Vec2 p = poly.vertex(0);
    const Vec2 d = normalized(poly.vertex(1) - poly.vertex(0));
    ShootResult r = shoot(model, h, TangentState{0.0, p.x, p.y, d.x, d.y});
    if (r) {
      r.record->method = RecordMethod::maximizer;
      out.certified = std::move(r.record);
      out.certification = "certified";
    } else {
      out.certification = r.failure;
    }
  } else if (out.cap_exceeded) {
    out.certification = "riemannian length cap exceeded";
  }
  return out;
}

}  // namespace lorenzlab
