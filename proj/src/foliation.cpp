#include "lorenzlab/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lorenzlab/parallel.hpp"

namespace lorenzlab {

namespace {

double line_angle(Vec2 v) {
  double a = std::atan2(v.y, v.x);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

Vec2 future_null(const SurfaceModel& model, int sign, Vec2 p) {
  const NullPair d = null_directions(model, p);
  return sign > 0 ? d.plus : d.minus;
}

Vec2 on_transversal(bool along_y, double u) { return along_y ? Vec2{u, 0.0} : Vec2{0.0, u}; }
double across_of(bool along_y, Vec2 p) { return along_y ? p.x : p.y; }
double along_of(bool along_y, Vec2 p) { return along_y ? p.y : p.x; }
long along_of(bool along_y, Class2 h) { return along_y ? h.b : h.a; }

int orientation(const Leaf& leaf) { return along_of(leaf.along_y, *leaf.homology) > 0 ? 1 : -1; }

}  // namespace

std::string to_string(SurfaceClass c) { return c == SurfaceClass::A ? "A" : "B"; }

std::string ProjectiveClass::str() const {
  std::ostringstream os;
  if (rational) {
    os << "[" << rational->a << ":" << rational->b << "]";
  } else {
    os.precision(6);
    os << "[" << std::cos(angle) << ":" << std::sin(angle) << "]";
  }
  return os.str();
}

Class2 canonical_class(Class2 h) {
  long g = std::gcd(std::abs(h.a), std::abs(h.b));
  if (g == 0) return {0, 0};
  Class2 c{h.a / g, h.b / g};
  if (c.a < 0 || (c.a == 0 && c.b < 0)) c = -c;
  return c;
}

double angular_distance(const ProjectiveClass& a, const ProjectiveClass& b) {
  return std::abs(wrap_half_pi(a.angle - b.angle));
}

ProjectiveClass projective_class(Vec2 direction, double rational_tol, long max_den) {
  ProjectiveClass out;
  out.angle = line_angle(direction);
  long best_size = max_den + 1;
  double best_err = rational_tol;
  for (long a = 0; a <= max_den; ++a) {
    for (long b = -max_den; b <= max_den; ++b) {
      if (std::gcd(a, std::abs(b)) != 1 || (a == 0 && b != 1)) continue;
      const double err = std::abs(wrap_half_pi(line_angle(Vec2{double(a), double(b)}) - out.angle));
      const long size = std::max(a, std::abs(b));
      if (err <= rational_tol && (size < best_size || (size == best_size && err < best_err))) {
        best_size = size;
        best_err = err;
        out.rational = Class2{a, b};
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rotation classes

RotationClass rotation_class(const SurfaceModel& model, int sign, const RotationOptions& opt) {
  const auto n = static_cast<std::size_t>(opt.seeds);
  std::vector<double> angles(n), spans(n);
  parallel_for(n, opt.workers, [&](std::size_t i) {
    const Vec2 p0{mod1(0.1 + 0.6180339887498949 * double(i)),
                  mod1(0.3 + 0.3819660112501051 * double(i))};
    LeafOptions lo;
    lo.tol = opt.tol;
    lo.h_max = 0.05;
    const LeafPath path = integrate_leaf(model, sign, p0, opt.arclength, lo);
    if (path.exit != FlowExit::completed) {
      throw FoliationError("rotation_class: leaf integration stopped (" + to_string(path.exit) +
                           ")");
    }
    double reach = 0.0;
    for (const Vec2 q : path.points) reach = std::max(reach, norm(q - p0));
    if (reach < 10.0) throw FoliationError("rotation_class: no unbounded direction");
    // Discard the transient.
    const auto it = std::lower_bound(path.arclength.begin(), path.arclength.end(),
                                     0.1 * opt.arclength);
    const Vec2 from = path.points[static_cast<std::size_t>(it - path.arclength.begin())];
    const Vec2 disp = path.end() - from;
    angles[i] = line_angle(disp);
    spans[i] = norm(disp);
  });
  double sx = 0.0, sy = 0.0;
  for (double a : angles) {
    sx += std::cos(2 * a);
    sy += std::sin(2 * a);
  }
  const double mean = 0.5 * std::atan2(sy, sx);
  double spread = 0.0;
  for (double a : angles) spread = std::max(spread, std::abs(wrap_half_pi(a - mean)));
  // A leaf stays within bounded distance of its line, so a single displacement
  // of length s is only known to about 1/s.
  const double shortest = *std::min_element(spans.begin(), spans.end());
  RotationClass rc;
  rc.sign = sign;
  rc.cls = projective_class(unit_at(mean));
  rc.radius = spread + 1.0 / shortest;
  return rc;
}

// ---------------------------------------------------------------------------
// Closed-leaf census

namespace {

class ReturnMap {
 public:
  ReturnMap(const SurfaceModel& model, int sign, bool along_y, int turns, double cap)
      : model_(model), sign_(sign), along_y_(along_y), turns_(turns), cap_(cap) {}

  LeafPath trace(double u, bool forward) const {
    const Vec2 p0 = on_transversal(along_y_, u);
    LeafOptions lo;
    const Vec2 fut = future_null(model_, sign_, p0);
    lo.initial_direction = forward ? fut : -fut;
    return leaf_until_return(model_, sign_, p0, cap_, !along_y_, lo, turns_);
  }

  // Wrapped displacement along the transversal after one return.
  std::optional<double> displacement(double u, bool forward) const {
    const LeafPath path = trace(u, forward);
    if (path.exit != FlowExit::event) return std::nullopt;
    return circle_offset(across_of(along_y_, path.end()) - u);
  }

  double checked(double u, bool forward) const {
    const auto d = displacement(u, forward);
    if (!d) throw FoliationError("closed_leaves: return map not defined within the arclength cap");
    return *d;
  }

 private:
  const SurfaceModel& model_;
  int sign_;
  bool along_y_;
  int turns_;
  double cap_;
};

struct Root {
  double u;
  bool forward;
};

// Root of D on [a, b] with D(a) > 0 >= D(b).
double bisect(const ReturnMap& map, double a, double b, bool forward, double tol) {
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    if (map.checked(m, forward) > 0.0) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Minimizer of |D| on [a, b] by golden section.
double golden_min(const ReturnMap& map, double a, double b, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = std::abs(map.checked(c, true)), fd = std::abs(map.checked(d, true));
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = std::abs(map.checked(c, true));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = std::abs(map.checked(d, true));
    }
  }
  return 0.5 * (a + b);
}

// Near a tangential fixed point D is a parabola in u; its vertex from a
// least-squares fit is far better conditioned than the minimizer of |D|.
double vertex_refine(const ReturnMap& map, double u) {
  for (double h : {1e-4, 1e-5, 1e-6}) {
    double s[5] = {0, 0, 0, 0, 0}, r[3] = {0, 0, 0};
    for (int i = -3; i <= 3; ++i) {
      const double x = i * h;
      const double d = map.checked(u + x, true);
      double p = 1.0;
      for (int m = 0; m < 5; ++m, p *= x) s[m] += p;
      r[0] += d;
      r[1] += d * x;
      r[2] += d * x * x;
    }
    // Normal equations for d = c0 + c1 x + c2 x^2.
    const double m[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
    auto det3 = [](const double a[3][3]) {
      return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
             a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
             a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    const double det = det3(m);
    double coef[3];
    for (int c = 0; c < 3; ++c) {
      double t[3][3];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t[i][j] = j == c ? r[i] : m[i][j];
      coef[c] = det3(t) / det;
    }
    if (!(std::abs(coef[2]) > 0.0)) break;
    const double shift = -coef[1] / (2.0 * coef[2]);
    if (std::abs(shift) > 3 * h) break;
    u += shift;
  }
  return u;
}

Census census_on(const SurfaceModel& model, int sign, const RotationClass& rc, bool along_y,
                 const CensusOptions& opt) {
  int turns = 1;
  if (rc.cls.rational) {
    turns = static_cast<int>(std::abs(along_of(along_y, *rc.cls.rational)));
    if (turns == 0) turns = 1;
  }
  const ReturnMap map(model, sign, along_y, turns, opt.arclength_cap);
  const auto n = static_cast<std::size_t>(opt.samples);
  const double du = 1.0 / double(n);
  std::vector<double> fwd(n), bwd(n);
  parallel_for(2 * n, opt.workers, [&](std::size_t k) {
    const std::size_t i = k % n;
    const bool forward = k < n;
    (forward ? fwd : bwd)[i] = map.checked(double(i) * du, forward);
  });

  Census census;
  census.along_y = along_y;
  double largest = 0.0;
  for (double d : fwd) largest = std::max(largest, std::abs(d));
  if (largest < 1e-9) {
    census.all_closed = true;
    return census;
  }

  // Attracting fixed points of either direction: D changes from + to -.
  auto at = [&](const std::vector<double>& d, std::ptrdiff_t i) {
    return d[std::size_t((i % std::ptrdiff_t(n) + std::ptrdiff_t(n)) % std::ptrdiff_t(n))];
  };
  auto small = [](double v) { return std::abs(v) < 0.25; };
  auto falls = [&](const std::vector<double>& d, std::ptrdiff_t i, std::ptrdiff_t j) {
    return small(at(d, i)) && small(at(d, j)) && at(d, i) > 0.0 && at(d, j) < 0.0;
  };
  auto crosses = [&](const std::vector<double>& d, std::ptrdiff_t i) {
    return falls(d, i, i + 1) || (small(at(d, i)) && small(at(d, i + 1)) && at(d, i) < 0.0 &&
                                  at(d, i + 1) > 0.0);
  };
  struct Bracket {
    std::ptrdiff_t lo, hi;
    bool forward;
  };
  std::vector<Bracket> work;
  std::vector<std::ptrdiff_t> touches;
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
    if (falls(fwd, i, i + 1)) work.push_back({i, i + 1, true});
    if (falls(bwd, i, i + 1)) work.push_back({i, i + 1, false});
    if (at(fwd, i) == 0.0 || at(bwd, i) == 0.0) {
      if (falls(fwd, i - 1, i + 1)) {
        work.push_back({i - 1, i + 1, true});
      } else if (falls(bwd, i - 1, i + 1)) {
        work.push_back({i - 1, i + 1, false});
      } else {
        touches.push_back(i);
      }
      continue;
    }
    // Semi-stable leaves: |D| touches zero without a sign change.
    const double a = std::abs(at(fwd, i));
    if (a >= 1e-3 || a > std::abs(at(fwd, i - 1)) || a > std::abs(at(fwd, i + 1))) continue;
    if (crosses(fwd, i - 1) || crosses(fwd, i) || crosses(bwd, i - 1) || crosses(bwd, i)) continue;
    touches.push_back(i);
  }
  std::vector<std::optional<Root>> found(work.size() + touches.size());
  parallel_for(found.size(), opt.workers, [&](std::size_t k) {
    if (k < work.size()) {
      const Bracket& b = work[k];
      found[k] = Root{bisect(map, double(b.lo) * du, double(b.hi) * du, b.forward, opt.bisect_tol),
                      b.forward};
      return;
    }
    const double c = double(touches[k - work.size()]) * du;
    const double u = vertex_refine(map, golden_min(map, c - du, c + du, 1e-7));
    if (std::abs(map.checked(u, true)) < 1e-9) found[k] = Root{u, true};
  });
  std::vector<Root> roots;
  for (const auto& r : found) {
    if (!r) continue;
    const bool dup = std::any_of(roots.begin(), roots.end(), [&](const Root& q) {
      return std::abs(circle_offset(q.u - r->u)) < 1e-7;
    });
    if (!dup) roots.push_back(*r);
  }

  census.leaves.resize(roots.size());
  parallel_for(roots.size(), opt.workers, [&](std::size_t k) {
    LeafPath path = map.trace(roots[k].u, roots[k].forward);
    if (path.exit != FlowExit::event || !path.period) {
      throw FoliationError("closed_leaves: refined leaf does not return");
    }
    if (norm(path.end() - path.start() - path.period->vec()) > 1e-8) {
      std::ostringstream os;
      os.precision(12);
      os << "closed_leaves: leaf at intercept " << roots[k].u << " does not close within 1e-8";
      throw FoliationError(os.str());
    }
    if (!roots[k].forward) path = reversed(path);
    Leaf& leaf = census.leaves[k];
    leaf.sign = sign;
    leaf.closed = true;
    leaf.homology = path.period;
    leaf.lambda = cycle_scaling(model, path);
    leaf.intercept = mod1(roots[k].u);
    if (leaf.intercept > 1.0 - 1e-9) leaf.intercept -= 1.0;  // report roots at 0 as 0, not 1
    leaf.along_y = along_y;
    leaf.trace = std::move(path.points);
  });
  std::sort(census.leaves.begin(), census.leaves.end(),
            [](const Leaf& a, const Leaf& b) { return a.intercept < b.intercept; });
  return census;
}

bool near_vertical(const RotationClass& rc) {
  return angular_distance(rc.cls, ProjectiveClass{kPi / 2, Class2{0, 1}}) <= kPi / 4 + 1e-12;
}

Census census_with_fallback(const SurfaceModel& model, int sign, const RotationClass& rc,
                            bool along_y, const CensusOptions& opt) {
  try {
    return census_on(model, sign, rc, along_y, opt);
  } catch (const FoliationError&) {
    return census_on(model, sign, rc, !along_y, opt);
  }
}

}  // namespace

Census closed_leaves(const SurfaceModel& model, int sign, const RotationClass& rc,
                     const CensusOptions& opt) {
  return census_with_fallback(model, sign, rc, near_vertical(rc), opt);
}

// ---------------------------------------------------------------------------
// Leaves as graphs

LeafCurve::LeafCurve(const SurfaceModel& model, const Leaf& leaf) : along_y_(leaf.along_y) {
  if (!leaf.homology || leaf.trace.size() < 2) throw FoliationError("LeafCurve: leaf not closed");
  const long turns = along_of(along_y_, *leaf.homology);
  if (turns == 0) throw FoliationError("LeafCurve: leaf is parallel to its transversal");
  std::vector<Vec2> pts = leaf.trace;
  Class2 h = *leaf.homology;
  if (turns < 0) {
    std::reverse(pts.begin(), pts.end());
    h = -h;
  }
  span_ = double(along_of(along_y_, h));
  shift_ = double(along_y_ ? h.a : h.b);
  for (const Vec2 p : pts) {
    const double t = along_of(along_y_, p);
    if (!t_.empty() && t <= t_.back()) throw FoliationError("LeafCurve: leaf is not a graph");
    const Vec2 d = null_line(model, leaf.sign, p, Vec2{1.0, 1.0});
    t_.push_back(t);
    c_.push_back(across_of(along_y_, p));
    m_.push_back(across_of(along_y_, d) / along_of(along_y_, d));
  }
}

double LeafCurve::across(double along) const {
  const double k = std::floor((along - t_.front()) / span_);
  const double t = along - k * span_;
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = it == t_.begin() ? 0 : std::size_t(it - t_.begin()) - 1;
  if (i + 1 >= t_.size()) i = t_.size() - 2;
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double value = (2 * s3 - 3 * s2 + 1) * c_[i] + (s3 - 2 * s2 + s) * h * m_[i] +
                       (-2 * s3 + 3 * s2) * c_[i + 1] + (s3 - s2) * h * m_[i + 1];
  return value + k * shift_;
}

double LeafCurve::slope(double along) const {
  const double k = std::floor((along - t_.front()) / span_);
  const double t = along - k * span_;
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = it == t_.begin() ? 0 : std::size_t(it - t_.begin()) - 1;
  if (i + 1 >= t_.size()) i = t_.size() - 2;
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * c_[i] + (3 * s2 - 4 * s + 1) * h * m_[i] +
          (-6 * s2 + 6 * s) * c_[i + 1] + (3 * s2 - 2 * s) * h * m_[i + 1]) /
         h;
}

// ---------------------------------------------------------------------------
// Annuli

namespace {

struct LoopFlags {
  bool timelike = false;
  bool spacelike = false;
};

LoopFlags straight_probes(const SurfaceModel& model) {
  LoopFlags flags;
  for (const Class2 h : {Class2{1, 0}, Class2{0, 1}, Class2{1, 1}, Class2{1, -1}}) {
    for (int j = 0; j < 32; ++j) {
      const Vec2 start{(j + 0.5) / 32.0, 0.37 * (j + 0.5) / 32.0};
      bool all_t = true, all_s = true;
      for (int i = 0; i < 64; ++i) {
        const Vec2 p = start + h.vec() * (i / 64.0);
        const CausalType c = causal_type(model, p, h.vec());
        all_t = all_t && c == CausalType::timelike;
        all_s = all_s && c == CausalType::spacelike;
      }
      flags.timelike = flags.timelike || all_t;
      flags.spacelike = flags.spacelike || all_s;
    }
  }
  return flags;
}

// Index of the sign-`sign` leaf at or before intercept u, cyclically.
int previous_of_sign(const std::vector<Leaf>& leaves, int sign, double u) {
  int best = -1;
  int last = -1;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (leaves[i].sign != sign) continue;
    last = int(i);
    if (leaves[i].intercept <= u + 1e-12) best = int(i);
  }
  return best >= 0 ? best : last;
}

int next_of_sign(const std::vector<Leaf>& leaves, int sign, int from) {
  const int n = int(leaves.size());
  for (int s = 1; s <= n; ++s) {
    const int i = (from + s) % n;
    if (leaves[std::size_t(i)].sign == sign) return i;
  }
  return -1;
}

bool inside_reeb(const std::vector<Leaf>& leaves, int sign, double lo) {
  const int a = previous_of_sign(leaves, sign, lo);
  if (a < 0) return false;
  const int b = next_of_sign(leaves, sign, a);
  return orientation(leaves[std::size_t(a)]) != orientation(leaves[std::size_t(b)]);
}

}  // namespace

std::vector<Annulus> annuli(const SurfaceModel& model, const std::vector<Leaf>& leaves) {
  std::vector<Annulus> out;
  if (leaves.empty()) {
    const LoopFlags f = straight_probes(model);
    Annulus whole;
    whole.timelike_loops = f.timelike;
    whole.spacelike_loops = f.spacelike;
    out.push_back(whole);
    return out;
  }
  const bool along_y = leaves.front().along_y;
  std::vector<LeafCurve> curves;
  for (const Leaf& l : leaves) curves.emplace_back(model, l);
  const std::size_t n = leaves.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    Annulus z;
    z.lo_leaf = int(i);
    z.hi_leaf = int(j);
    z.lo = leaves[i].intercept;
    z.hi = leaves[j].intercept + (j <= i ? 1.0 : 0.0);
    z.loop_class = canonical_class(*leaves[i].homology);
    // Lifts placing both boundary curves at their intercepts at along = 0.
    const double lift_lo = z.lo - curves[i].across(0.0);
    const double lift = z.hi - curves[j].across(0.0);
    const double span = curves[i].period_length();
    for (int k = 0; k < 32; ++k) {
      const double s = (k + 0.5) / 32.0;
      bool all_t = true, all_s = true;
      for (int m = 0; m < 64; ++m) {
        const double t = span * m / 64.0;
        const double c = (1 - s) * (curves[i].across(t) + lift_lo) + s * (curves[j].across(t) + lift);
        const double dc = (1 - s) * curves[i].slope(t) + s * curves[j].slope(t);
        const Vec2 p = along_y ? Vec2{c, t} : Vec2{t, c};
        const Vec2 v = along_y ? Vec2{dc, 1.0} : Vec2{1.0, dc};
        const CausalType ct = causal_type(model, p, v);
        all_t = all_t && ct == CausalType::timelike;
        all_s = all_s && ct == CausalType::spacelike;
      }
      z.timelike_loops = z.timelike_loops || all_t;
      z.spacelike_loops = z.spacelike_loops || all_s;
    }
    z.in_reeb_plus = inside_reeb(leaves, 1, z.lo);
    z.in_reeb_minus = inside_reeb(leaves, -1, z.lo);
    out.push_back(z);
  }
  return out;
}

std::vector<ReebAnnulus> reeb_annuli(const std::vector<Leaf>& leaves, int sign) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < leaves.size(); ++i)
    if (leaves[i].sign == sign) idx.push_back(i);
  std::vector<ReebAnnulus> out;
  if (idx.empty()) return out;
  const int cut = orientation(leaves[idx.front()]);
  std::vector<std::size_t> cuts;
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (orientation(leaves[idx[k]]) == cut) cuts.push_back(k);
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const std::size_t from = cuts[c];
    const std::size_t to = c + 1 < cuts.size() ? cuts[c + 1] : cuts.front() + idx.size();
    ReebAnnulus r;
    r.sign = sign;
    r.lo = leaves[idx[from]].intercept;
    r.hi = leaves[idx[to % idx.size()]].intercept + (to >= idx.size() ? 1.0 : 0.0);
    // Between two equally oriented cuts the orientation flips away from and back
    // to the cut orientation; each flip bounds one Reeb component.
    int flips = 0;
    for (std::size_t k = from; k < to; ++k) {
      if (orientation(leaves[idx[k % idx.size()]]) != orientation(leaves[idx[(k + 1) % idx.size()]]))
        ++flips;
    }
    r.reeb_components = flips;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Class A / B and the atlas

ClassVerdict classify_rotation(const RotationClass& plus, const RotationClass& minus,
                               bool closed_plus, bool closed_minus) {
  const double d = angular_distance(plus.cls, minus.cls);
  ClassVerdict v;
  v.margin = d - plus.radius - minus.radius;
  if (v.margin > 1e-3) {
    v.verdict = SurfaceClass::A;
    return v;
  }
  if (v.margin <= 0.0 && closed_plus && closed_minus) {
    v.verdict = SurfaceClass::B;
    return v;
  }
  std::ostringstream os;
  os << "class_AB: undetermined (m+ = " << plus.cls.str() << ", m- = " << minus.cls.str()
     << ", margin " << v.margin << "); increase the integration length";
  throw FoliationError(os.str());
}

namespace {

bool maybe_class_b(const RotationClass& plus, const RotationClass& minus) {
  return angular_distance(plus.cls, minus.cls) - plus.radius - minus.radius <= 1e-3;
}

}  // namespace

ClassVerdict class_AB(const SurfaceModel& model, const AtlasOptions& opt) {
  const RotationClass plus = rotation_class(model, 1, opt.rotation);
  const RotationClass minus = rotation_class(model, -1, opt.rotation);
  if (!maybe_class_b(plus, minus)) return classify_rotation(plus, minus, false, false);
  const Census cp = closed_leaves(model, 1, plus, opt.census);
  const Census cm = census_with_fallback(model, -1, minus, cp.along_y, opt.census);
  return classify_rotation(plus, minus, !cp.leaves.empty(), !cm.leaves.empty());
}

FoliationAtlas build_atlas(const SurfaceModel& model, const AtlasOptions& opt) {
  FoliationAtlas atlas;
  atlas.m_plus = rotation_class(model, 1, opt.rotation);
  atlas.m_minus = rotation_class(model, -1, opt.rotation);
  if (!maybe_class_b(atlas.m_plus, atlas.m_minus)) {
    atlas.verdict = classify_rotation(atlas.m_plus, atlas.m_minus, false, false);
    atlas.annuli = annuli(model, {});
    return atlas;
  }
  Census cp = closed_leaves(model, 1, atlas.m_plus, opt.census);
  Census cm = census_with_fallback(model, -1, atlas.m_minus, cp.along_y, opt.census);
  if (cm.along_y != cp.along_y) {
    cp = census_on(model, 1, atlas.m_plus, cm.along_y, opt.census);
  }
  atlas.verdict =
      classify_rotation(atlas.m_plus, atlas.m_minus, !cp.leaves.empty(), !cm.leaves.empty());
  atlas.along_y = cp.along_y;
  atlas.all_closed_plus = cp.all_closed;
  atlas.all_closed_minus = cm.all_closed;
  atlas.leaves = std::move(cp.leaves);
  atlas.leaves.insert(atlas.leaves.end(), cm.leaves.begin(), cm.leaves.end());
  std::stable_sort(atlas.leaves.begin(), atlas.leaves.end(),
                   [](const Leaf& a, const Leaf& b) { return a.intercept < b.intercept; });
  if (model.is_klein()) {
    for (Leaf& leaf : atlas.leaves) {
      const Vec2 image = SurfaceModel::glide(leaf.trace.front());
      for (std::size_t j = 0; j < atlas.leaves.size(); ++j) {
        if (distance_to_polyline(image, atlas.leaves[j].trace) < 1e-4) {
          leaf.glide_partner = int(j);
          break;
        }
      }
    }
  }
  atlas.annuli = annuli(model, atlas.leaves);
  for (int sign : {1, -1}) {
    const auto r = reeb_annuli(atlas.leaves, sign);
    atlas.reeb.insert(atlas.reeb.end(), r.begin(), r.end());
  }
  return atlas;
}

// ---------------------------------------------------------------------------
// Affiliation

namespace {

struct BoundaryTrack {
  const LeafCurve* curve;
  double lift;
  bool lower;
  // Positive inside the annulus.
  double offset(Vec2 q) const {
    const double t = along_of(curve->along_y(), q);
    const double c = across_of(curve->along_y(), q);
    const double b = curve->across(t) + lift;
    return lower ? c - b : b - c;
  }
};

}  // namespace

Affiliation affiliation(const SurfaceModel& model, const FoliationAtlas& atlas, Vec2 p,
                        double arclength_cap) {
  if (atlas.leaves.empty()) throw FoliationError("affiliation: atlas has no closed leaves");
  std::vector<LeafCurve> curves;
  for (const Leaf& l : atlas.leaves) curves.emplace_back(model, l);
  const bool along_y = atlas.along_y;
  const double t0 = along_of(along_y, p), c0 = across_of(along_y, p);
  int lo = -1, hi = -1;
  double best_lo = 2.0, best_hi = 2.0, lift_lo = 0.0, lift_hi = 0.0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const double rel = c0 - curves[i].across(t0);
    const double below = rel - std::floor(rel);
    if (below < 1e-9 || below > 1.0 - 1e-9) throw FoliationError("affiliation: p lies on a closed leaf");
    if (below < best_lo) {
      best_lo = below;
      lo = int(i);
      lift_lo = std::floor(rel);
    }
    if (1.0 - below < best_hi) {
      best_hi = 1.0 - below;
      hi = int(i);
      lift_hi = std::floor(rel) + 1.0;
    }
  }
  const BoundaryTrack lower{&curves[std::size_t(lo)], lift_lo, true};
  const BoundaryTrack upper{&curves[std::size_t(hi)], lift_hi, false};

  Affiliation out;
  for (int sign : {1, -1}) {
    Vec2 q = p;
    Vec2 dir = future_null(model, sign, p);
    double travelled = 0.0;
    double near_since = -1.0;
    int decided = -1;
    AffiliationKind kind = AffiliationKind::crossed;
    while (decided < 0 && travelled < arclength_cap) {
      LeafOptions lo_opt;
      lo_opt.initial_direction = dir;
      const LeafPath path = integrate_leaf(model, sign, q, 10.0, lo_opt);
      if (path.exit != FlowExit::completed) {
        throw FoliationError("affiliation: leaf integration stopped (" + to_string(path.exit) + ")");
      }
      for (std::size_t k = 0; k < path.points.size() && decided < 0; ++k) {
        const double s_lo = lower.offset(path.points[k]);
        const double s_hi = upper.offset(path.points[k]);
        const double at = travelled + path.arclength[k];
        if (s_lo < -1e-9) {
          decided = lo;
        } else if (s_hi < -1e-9) {
          decided = hi;
        } else if (std::min(s_lo, s_hi) < 1e-6) {
          if (near_since < 0.0) near_since = at;
          if (at - near_since >= 50.0) {
            decided = s_lo < s_hi ? lo : hi;
            kind = AffiliationKind::asymptotic;
          }
        } else {
          near_since = -1.0;
        }
      }
      travelled += path.length();
      q = path.end();
      dir = null_line(model, sign, q, path.points.back() - path.points[path.points.size() - 2]);
    }
    if (decided < 0) throw FoliationError("affiliation: no decision within the arclength cap");
    (sign > 0 ? out.plus_leaf : out.minus_leaf) = decided;
    (sign > 0 ? out.plus_kind : out.minus_kind) = kind;
  }
  return out;
}

}  // namespace lorenzlab
