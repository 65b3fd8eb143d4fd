#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "lorenzlab/search.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lorenzlab;

namespace {

double circle_gap(double a, double b) { return std::abs(circle_offset(a - b)); }

bool near_any(double x, std::initializer_list<double> targets, double tol) {
  return std::any_of(targets.begin(), targets.end(), [&](double t) { return circle_gap(x, t) <= tol; });
}

std::vector<const ClosedGeodesicRecord*> of_type(const SurveyResult& s, CausalType c) {
  std::vector<const ClosedGeodesicRecord*> out;
  for (const auto& r : s.records)
    if (r.causal == c) out.push_back(&r);
  return out;
}

// x range of a trace reduced mod 1 around its first point.
double x_spread(const ClosedGeodesicRecord& r) {
  double lo = 0.0, hi = 0.0;
  const double x0 = r.trace.front().x;
  for (const auto& s : r.trace) {
    const double d = circle_offset(s.x - x0);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi - lo;
}

// Certification invariant: closes from the stored nodes, keeps its causal type,
// and one-shot re-integration from the initial state reproduces the trace.
void check_certified(const SurfaceModel& m, const ClosedGeodesicRecord& r) {
  CHECK(r.residual <= 1e-9);
  CHECK(closure_residual(m, r) <= 1e-9);
  const double e0 = m.metric(r.initial().pos()).quad(r.initial().vel());
  for (const auto& s : r.trace) {
    const double e = m.metric(s.pos()).quad(s.vel());
    if (r.causal == CausalType::timelike) CHECK(e < 0.0);
    if (r.causal == CausalType::spacelike) CHECK(e > 0.0);
    CHECK(std::abs(e - e0) < 1e-8);
  }
  FlowOptions fo;
  fo.tol = 1e-12;
  fo.h_max = 0.01;
  const GeodesicPath p = integrate_geodesic(m, r.initial(), r.period, fo);
  REQUIRE(p.exit == FlowExit::completed);
  std::vector<Vec2> pts;
  for (const auto& s : p.samples) pts.push_back(s.pos());
  CHECK(trace_distance(pts, r.points()) < 1e-6);
}

}  // namespace

TEST_CASE("shoot: flat Minkowski torus, vertical class") {
  const auto m = SurfaceModel::flat(1, 0, -1);
  const ShootResult r = shoot(m, {0, 1}, TangentState{0.0, 0.0, 0.0, 0.05, 1.0});
  REQUIRE(r);
  const auto& rec = *r.record;
  CHECK(rec.causal == CausalType::timelike);
  CHECK(rec.length == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(x_spread(rec) < 1e-12);
  check_certified(m, rec);
}

TEST_CASE("shoot: strip_k(1) timelike seeds land on x = 1/8, 5/8") {
  const auto m = SurfaceModel::strip(1);
  std::set<int> hit;
  for (int j = 0; j < 16; ++j) {
    const Vec2 p{(j + 0.5) / 16.0, 0.0};
    const Vec2 v = m.future_axis(p);
    const Class2 h = v.y < 0.0 ? Class2{0, -1} : Class2{0, 1};
    const ShootResult r = shoot(m, h, TangentState{0.0, p.x, p.y, v.x, v.y});
    if (!r) continue;
    CHECK(r.record->causal == CausalType::timelike);
    const double x = r.record->intercept;
    CHECK(near_any(x, {0.125, 0.625}, 1e-6));
    CHECK(x_spread(*r.record) < 1e-9);
    hit.insert(int(std::lround(x * 8)) % 8);
  }
  CHECK(hit == std::set<int>{1, 5});
}

TEST_CASE("shoot: spacelike orbits of strip_k(1) via the negated metric") {
  const auto m = SurfaceModel::strip(1);
  const auto neg = m.negated();
  std::set<int> hit;
  for (int j = 0; j < 16; ++j) {
    const Vec2 p{(j + 0.5) / 16.0, 0.0};
    const Vec2 v = neg.future_axis(p);
    const Class2 h = v.y < 0.0 ? Class2{0, -1} : Class2{0, 1};
    const ShootResult r = shoot(neg, h, TangentState{0.0, p.x, p.y, v.x, v.y});
    if (!r) continue;
    CHECK(r.record->causal == CausalType::timelike);
    CHECK(near_any(r.record->intercept, {0.375, 0.875}, 1e-6));
    hit.insert(int(std::lround(r.record->intercept * 8)) % 8);
  }
  CHECK(hit == std::set<int>{3, 7});
}

TEST_CASE("shoot: invalid requests fail cleanly") {
  const auto m = SurfaceModel::flat(1, 0, -1);
  CHECK_FALSE(shoot(m, {0, 0}, TangentState{0, 0, 0, 0, 1}));
  // Velocity pointing against the class.
  CHECK_FALSE(shoot(m, {0, 1}, TangentState{0, 0, 0, 0, -1}));
  // Timelike seed in a spacelike-only class converges outside its sector or not at all.
  const ShootResult r = shoot(m, {1, 0}, TangentState{0, 0, 0, 0.6, 0.8});
  if (r) CHECK(r.record->causal == CausalType::timelike);
}

TEST_CASE("self_intersections") {
  SUBCASE("figure eight") {
    std::vector<Vec2> eight;
    for (int i = 0; i <= 400; ++i) {
      const double t = kTwoPi * i / 400.0;
      eight.push_back({0.5 + 0.3 * std::sin(t), 0.5 + 0.2 * std::sin(2 * t)});
    }
    const auto x = self_intersections(eight);
    REQUIRE(x.size() == 1);
    CHECK(norm(x[0] - Vec2{0.5, 0.5}) < 1e-9);
  }
  SUBCASE("strip_k(1) timelike orbit") {
    const auto m = SurfaceModel::strip(1);
    const ShootResult r = shoot(m, {0, 1}, TangentState{0, 0.125, 0, 0, 1});
    REQUIRE(r);
    CHECK(self_intersections(r.record->points()).empty());
  }
  SUBCASE("flat line in class (2,1)") {
    const auto m = SurfaceModel::flat(1, 0, -1);
    const Vec2 d = normalized(Vec2{2, 1});
    const ShootResult r = shoot(m, {2, 1}, TangentState{0, 0.1, 0.3, d.x, d.y});
    REQUIRE(r);
    CHECK(self_intersections(r.record->points()).empty());
  }
  SUBCASE("wiggled loop in class (1,2) is simple") {
    std::vector<Vec2> loop;
    for (int i = 0; i <= 800; ++i) {
      const double t = double(i) / 800.0;
      loop.push_back({t + 0.05 * std::sin(kTwoPi * t), 2 * t});
    }
    CHECK(self_intersections(loop).empty());
  }
  SUBCASE("wiggled loop in class (2,0) crosses itself once") {
    std::vector<Vec2> loop;
    for (int i = 0; i <= 801; ++i) {
      const double t = double(i) / 801.0;
      loop.push_back({0.3 + 2 * t, 0.1 * std::sin(kTwoPi * t)});
    }
    const auto x = self_intersections(loop);
    REQUIRE(x.size() == 1);
    CHECK(norm(x[0] - Vec2{0.3, 0.0}) < 1e-4);
  }
}

TEST_CASE("trace_distance") {
  std::vector<Vec2> a, b, c;
  for (int i = 0; i <= 100; ++i) {
    a.push_back({0.25, i / 100.0});
    b.push_back({1.25, 3.0 + i / 100.0});  // deck translate
    c.push_back({0.75, -i / 100.0});       // glide image of a
  }
  CHECK(trace_distance(a, b) < 1e-12);
  CHECK(trace_distance(a, c) == doctest::Approx(0.5));
  CHECK(trace_distance(a, c, true) < 1e-12);
}

TEST_CASE("primitive classes") {
  const auto cls = primitive_classes(3);
  CHECK(cls.size() == 16);
  for (const Class2 h : cls) {
    CHECK(std::gcd(std::abs(h.a), std::abs(h.b)) == 1);
    CHECK(canonical_class(h) == h);
  }
}

TEST_CASE("survey: strip_k(1)") {
  const auto m = SurfaceModel::strip(1);
  const SurveyResult& s = test_support::survey(m);
  const auto t = of_type(s, CausalType::timelike);
  const auto sp = of_type(s, CausalType::spacelike);
  REQUIRE(t.size() == 2);
  REQUIRE(sp.size() == 2);
  CHECK(of_type(s, CausalType::lightlike).empty());
  for (auto* r : t) CHECK(near_any(r->intercept, {0.125, 0.625}, 1e-6));
  for (auto* r : sp) CHECK(near_any(r->intercept, {0.375, 0.875}, 1e-6));
  for (const auto& r : s.records) {
    check_certified(m, r);
    CHECK(self_intersections(r.points()).empty());
  }
  // Sorted by class, then intercept.
  for (std::size_t i = 1; i < s.records.size(); ++i) {
    const Class2 a = canonical_class(s.records[i - 1].homology), b = canonical_class(s.records[i].homology);
    CHECK((a < b || (a == b && s.records[i - 1].intercept <= s.records[i].intercept)));
  }
}

TEST_CASE("survey duality: spacelike records are timelike records of -g") {
  const auto m = SurfaceModel::strip(1);
  const auto sp = of_type(test_support::survey(m), CausalType::spacelike);
  const auto tn = of_type(test_support::survey(m.negated()), CausalType::timelike);
  REQUIRE(sp.size() == tn.size());
  for (auto* r : sp) {
    double best = 1.0;
    for (auto* q : tn) best = std::min(best, trace_distance(r->points(), q->points()));
    CHECK(best < 1e-6);
  }
}

TEST_CASE("survey: galloway_eps(0.2) has no certified lightlike record") {
  const auto m = SurfaceModel::galloway(0.2);
  const SurveyResult& s = test_support::survey(m);
  CHECK(of_type(s, CausalType::lightlike).empty());
  const auto t = of_type(s, CausalType::timelike);
  REQUIRE_FALSE(t.empty());
  bool quarter = false;
  for (auto* r : t) quarter = quarter || (circle_gap(r->intercept, 0.25) < 1e-6 && x_spread(*r) < 1e-9);
  CHECK(quarter);
}

TEST_CASE("survey: Klein bottle after glide dedup") {
  const auto m = SurfaceModel::klein_galloway();
  const SurveyResult& s = test_support::survey(m);
  REQUIRE(s.records.size() == 2);
  const auto t = of_type(s, CausalType::timelike);
  const auto l = of_type(s, CausalType::lightlike);
  REQUIRE(t.size() == 1);
  REQUIRE(l.size() == 1);
  CHECK(of_type(s, CausalType::spacelike).empty());
  CHECK(near_any(t[0]->intercept, {0.0, 0.5}, 1e-6));
  CHECK(x_spread(*t[0]) < 1e-9);
  REQUIRE(l[0]->lambda);
  CHECK(std::abs(*l[0]->lambda - 1.0) <= 1e-6);
  CHECK(near_any(l[0]->intercept, {0.25, 0.75}, 1e-6));
  for (const auto& r : s.records) check_certified(m, r);
}

TEST_CASE("survey: class A model over explicit classes") {
  const auto m = SurfaceModel::flat(1, 0, -1);
  SurveyOptions o;
  o.classes = {{0, 1}, {1, 0}, {1, 1}, {2, 1}};
  const SurveyResult s = survey(m, test_support::atlas(m), o);
  REQUIRE(s.records.size() == 4);
  std::set<Class2> seen;
  for (const auto& r : s.records) {
    seen.insert(canonical_class(r.homology));
    check_certified(m, r);
  }
  CHECK(seen.size() == 4);
  CHECK(s.warnings.empty());
}

TEST_CASE("survey is independent of the worker count") {
  const auto m = SurfaceModel::klein_galloway();
  SurveyOptions o;
  o.workers = 3;
  const SurveyResult a = survey(m, test_support::atlas(m), o);
  const SurveyResult& b = test_support::survey(m);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].intercept == b.records[i].intercept);
    CHECK(a.records[i].period == b.records[i].period);
  }
}

TEST_CASE("maximize_length: flat Minkowski torus") {
  const auto m = SurfaceModel::flat(1, 0, -1);
  MaximizeOptions o;
  o.vertices = 32;
  const MaximizeResult r = maximize_length(m, {0, 1}, CausalSign::nonspacelike, o);
  CHECK(r.length == doctest::Approx(1.0).epsilon(1e-9));
  for (const Vec2 v : r.polygon.vertices) CHECK(v.x == doctest::Approx(r.polygon.vertices[0].x));
  REQUIRE(r.certified);
}

TEST_CASE("maximize_length agrees with the vertical-circle oracle") {
  for (const auto& m : {SurfaceModel::strip(1), SurfaceModel::galloway(0.2)}) {
    CAPTURE(m.name());
    const oracle::CircleMax best = oracle::best_vertical_circle(m);
    const MaximizeResult r = maximize_length(m, {0, 1}, CausalSign::nonspacelike);
    CHECK(std::abs(r.length - best.length) < 1e-4);
    for (const Vec2 v : r.polygon.vertices) CHECK(circle_gap(v.x, best.x) < 1e-4);
    CHECK(r.gradient_norm < 1e-8);
    CHECK_FALSE(r.cap_exceeded);
    // Monotone history and causal edges throughout.
    for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] >= r.history[i - 1]);
    for (double s : r.polygon.slack) CHECK(s >= -1e-12);
    REQUIRE(r.certified);
    check_certified(m, *r.certified);
    CHECK(self_intersections(r.certified->points()).empty());
  }
  CHECK(oracle::best_vertical_circle(SurfaceModel::strip(1)).x == doctest::Approx(0.125).epsilon(1e-6));
}

TEST_CASE("maximize_length is not beaten by a lattice dynamic program") {
  const auto m = SurfaceModel::strip(1);
  const double dp = oracle::lattice_longest_loop(m, 64, 16, 2);
  const MaximizeResult r = maximize_length(m, {0, 1}, CausalSign::nonspacelike);
  CHECK(dp > 0.99);
  CHECK(r.length >= dp - 1e-9);
}

TEST_CASE("maximize_length: nontimelike sign and failure modes") {
  const auto m = SurfaceModel::strip(1);
  const MaximizeResult r = maximize_length(m, {0, 1}, CausalSign::nontimelike);
  CHECK(r.length == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(near_any(r.polygon.vertices[0].x, {0.375, 0.875}, 1e-4));
  REQUIRE(r.certified);
  CHECK(r.certified->causal == CausalType::spacelike);

  CHECK_THROWS_AS(maximize_length(SurfaceModel::flat(1, 0, -1), {1, 0}, CausalSign::nonspacelike),
                  SearchError);
  MaximizeOptions tight;
  tight.cap_factor = 0.5;
  const MaximizeResult capped = maximize_length(m, {0, 1}, CausalSign::nonspacelike, tight);
  CHECK(capped.cap_exceeded);
  CHECK_FALSE(capped.certified);
}
