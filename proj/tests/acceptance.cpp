// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "lorenzlab/classify.hpp"
#include "oracles.hpp"

using namespace lorenzlab;
using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }
double gap(double a, double b) { return std::abs(circle_offset(a - b)); }

struct Analysis {
  FoliationAtlas atlas;
  SurveyResult survey;
  SurfaceReport report;
  double seconds = 0.0;
};

Analysis analyze(const SurfaceModel& m) {
  const auto t0 = Clock::now();
  Analysis a;
  a.atlas = build_atlas(m);
  a.survey = survey(m, a.atlas);
  a.report = build_report(m, a.atlas, a.survey);
  a.seconds = since(t0);
  return a;
}

// Collects failed sub-checks of one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
    return s;
  }

 private:
  std::vector<std::string> failures_;
};

int failed = 0;

void report(int id, const std::string& title, const Checks& c, double seconds, const std::string& detail) {
  std::printf("%s  criterion %d  %-44s %7.1f s  %s\n", c.ok() ? "PASS" : "FAIL", id, title.c_str(), seconds,
              c.ok() ? detail.c_str() : c.summary().c_str());
  std::fflush(stdout);
  if (!c.ok()) ++failed;
}

std::vector<const ClosedGeodesicRecord*> of_type(const SurveyResult& s, CausalType t) {
  std::vector<const ClosedGeodesicRecord*> out;
  for (const auto& r : s.records)
    if (r.causal == t) out.push_back(&r);
  return out;
}

double x_spread(const ClosedGeodesicRecord& r) {
  double lo = 0.0, hi = 0.0;
  for (const auto& s : r.trace) {
    const double d = circle_offset(s.x - r.trace.front().x);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi - lo;
}

// Every target matched by exactly one value and every value by a target.
bool matches(std::vector<double> values, const std::vector<double>& targets, double tol) {
  if (values.size() != targets.size()) return false;
  for (double t : targets) {
    auto it = std::find_if(values.begin(), values.end(), [&](double v) { return gap(v, t) <= tol; });
    if (it == values.end()) return false;
    values.erase(it);
  }
  return true;
}

std::vector<double> intercepts(const std::vector<const ClosedGeodesicRecord*>& recs) {
  std::vector<double> out;
  for (auto* r : recs) out.push_back(r->intercept);
  return out;
}

std::string counts(const Analysis& a) {
  std::ostringstream s;
  s << "found (" << a.atlas.leaves.size() << "," << a.report.found.timelike << "," << a.report.found.spacelike
    << ")";
  return s.str();
}

std::map<std::string, Analysis> analyses;
std::vector<std::pair<SurfaceModel, const ClosedGeodesicRecord*>> certified;

const Analysis& run(const SurfaceModel& m) {
  auto it = analyses.find(m.name());
  if (it == analyses.end()) {
    it = analyses.emplace(m.name(), analyze(m)).first;
    for (const auto& r : it->second.survey.records) certified.emplace_back(m, &r);
  }
  return it->second;
}

void strip_criterion(int k, Checks& c) {
  const Analysis& a = run(SurfaceModel::strip(k));
  const auto p = predicted_counts(k);
  c.expect(long(a.atlas.leaves.size()) == p.leaves, "leaf count " + std::to_string(a.atlas.leaves.size()));
  const auto t = of_type(a.survey, CausalType::timelike);
  const auto s = of_type(a.survey, CausalType::spacelike);
  c.expect(long(t.size()) == p.timelike, "timelike count " + std::to_string(t.size()));
  c.expect(long(s.size()) == p.spacelike, "spacelike count " + std::to_string(s.size()));
  c.expect(of_type(a.survey, CausalType::lightlike).empty(), "lightlike records present");
  std::vector<double> leaf_x;
  for (const Leaf& l : a.atlas.leaves) leaf_x.push_back(l.intercept);
  std::vector<double> want_leaves, want_t, want_s;
  for (int l = 0; l < 4 * k; ++l) want_leaves.push_back(double(l) / (4 * k));
  for (int l = 0; l < k; ++l) {
    want_t.push_back((8.0 * l + 1) / (8.0 * k));
    want_t.push_back((8.0 * l + 5) / (8.0 * k));
    want_s.push_back((8.0 * l + 3) / (8.0 * k));
    want_s.push_back((8.0 * l + 7) / (8.0 * k));
  }
  c.expect(matches(leaf_x, want_leaves, 1e-8), "leaf positions");
  c.expect(matches(intercepts(t), want_t, 1e-6), "timelike positions");
  c.expect(matches(intercepts(s), want_s, 1e-6), "spacelike positions");
  for (auto* r : t) c.expect(x_spread(*r) < 1e-6, "timelike trace not vertical");
  for (const Leaf& l : a.atlas.leaves)
    c.expect(l.lambda && std::abs(*l.lambda - 1.0) > 1e-6, "complete leaf found");
  c.expect(a.report.kg == k, "k_g " + std::to_string(a.report.kg));
}

}  // namespace

int main() {
  const auto suite_start = Clock::now();
  std::printf("lorenzlab acceptance\n");

  {  // 1
    Checks c;
    const auto t0 = Clock::now();
    strip_criterion(1, c);
    const double s = since(t0);
    c.expect(s < 60.0, "runtime above 60 s");
    report(1, "strip_k(1): leaves, positions, counts (4,2,2)", c, s, counts(run(SurfaceModel::strip(1))));
  }
  for (int k : {2, 3}) {  // 2
    Checks c;
    const auto t0 = Clock::now();
    strip_criterion(k, c);
    const double s = since(t0);
    c.expect(s < 180.0, "runtime above 3 min");
    report(2, "strip_k(" + std::to_string(k) + "): counts and positions", c, s, counts(run(SurfaceModel::strip(k))));
  }
  {  // 3
    Checks c;
    const auto t0 = Clock::now();
    const auto m = SurfaceModel::galloway(0.2);
    const Analysis& a = run(m);
    bool quarter = false;
    for (auto* r : of_type(a.survey, CausalType::timelike))
      quarter = quarter || (gap(r->intercept, 0.25) < 1e-6 && x_spread(*r) < 1e-6 && r->residual <= 1e-9);
    c.expect(quarter, "no closed timelike geodesic at x = 1/4");
    c.expect(a.atlas.leaves.size() == 4, "leaf count " + std::to_string(a.atlas.leaves.size()));
    double worst_cos = 0.0, min_lambda_gap = 1e9;
    for (const Leaf& l : a.atlas.leaves) {
      for (const Vec2 p : l.trace) {
        const double cs = std::cos(kTwoPi * p.x);
        worst_cos = std::max(worst_cos, std::abs(cs * cs - 0.2));
      }
      c.expect(l.lambda.has_value(), "leaf without lambda");
      if (l.lambda) min_lambda_gap = std::min(min_lambda_gap, std::abs(*l.lambda - 1.0));
    }
    c.expect(worst_cos < 1e-6, "leaf off cos^2 = 0.2");
    c.expect(min_lambda_gap > 0.01, "leaf with |lambda - 1| <= 0.01");
    c.expect(of_type(a.survey, CausalType::lightlike).empty(), "lightlike record certified");
    std::ostringstream d;
    d << "max |cos^2 - 0.2| " << worst_cos << ", min |lambda - 1| " << min_lambda_gap;
    report(3, "galloway_eps(0.2): x = 1/4 orbit, incomplete leaves", c, since(t0), d.str());
  }
  {  // 4
    Checks c;
    const auto t0 = Clock::now();
    const Analysis& a = run(SurfaceModel::klein_galloway());
    const auto t = of_type(a.survey, CausalType::timelike);
    const auto l = of_type(a.survey, CausalType::lightlike);
    c.expect(a.survey.records.size() == 2, "distinct records " + std::to_string(a.survey.records.size()));
    c.expect(t.size() == 1 && gap(2 * t[0]->intercept, 0.0) < 2e-6 && x_spread(*t[0]) < 1e-6,
             "timelike trace not x = 0 (or its glide image)");
    c.expect(l.size() == 1 && l[0]->lambda && std::abs(*l[0]->lambda - 1.0) <= 1e-6, "complete lightlike leaf");
    c.expect(of_type(a.survey, CausalType::spacelike).empty(), "spacelike record");
    c.expect(a.report.double_cover && a.report.double_cover->total() >= 4, "double cover total < 4");
    c.expect(a.report.double_cover && a.report.double_cover->definite() >= 2, "double cover definite < 2");
    std::ostringstream d;
    if (a.report.double_cover)
      d << "double cover " << a.report.double_cover->total() << " closed, " << a.report.double_cover->definite()
        << " definite";
    report(4, "klein_galloway: two distinct closed geodesics", c, since(t0), d.str());
  }
  {  // 5
    Checks c;
    const auto t0 = Clock::now();
    const auto m = SurfaceModel::flat(1, 0, -1);
    const Analysis& a = run(m);
    c.expect(a.atlas.verdict.verdict == SurfaceClass::A, "not class A");
    std::set<Class2> found;
    for (const auto& r : a.survey.records) {
      found.insert(canonical_class(r.homology));
      c.expect(self_intersections(r.points()).empty(), "self-intersecting record");
    }
    for (const Class2 h : primitive_classes(3))
      c.expect(found.contains(h), "no record in (" + std::to_string(h.a) + "," + std::to_string(h.b) + ")");
    report(5, "flat(1,0,-1): class A, every primitive class", c, since(t0),
           std::to_string(found.size()) + " classes, all simple");
  }
  {  // 6
    Checks c;
    const auto t0 = Clock::now();
    std::ostringstream d;
    // Energy drift, relative to max(1, |v|^2) at each sample.
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double drift = 0.0;
    for (const auto& m : {SurfaceModel::flat(1, 0, -1), SurfaceModel::strip(1), SurfaceModel::galloway(0.2),
                          SurfaceModel::klein_galloway()}) {
      for (int i = 0; i < 100; ++i) {
        const double a = kTwoPi * u(rng);
        const GeodesicPath p =
            integrate_geodesic(m, TangentState{0.0, u(rng), u(rng), std::cos(a), std::sin(a)}, 100.0, 1e-10);
        for (std::size_t k = 0; k < p.samples.size(); ++k) {
          const Vec2 v = p.samples[k].vel();
          drift = std::max(drift, std::abs(p.energy[k] - p.energy[0]) / std::max(1.0, dot(v, v)));
        }
      }
    }
    c.expect(drift < 1e-8, "energy drift");
    d << "drift " << drift;
    // Additivity of the rotation number.
    std::uniform_int_distribution<long> e(-5, 5);
    const SurfaceModel diag(ModelSpec::custom("sin(4*pi*(x+y))", "cos(4*pi*(x+y))", "-sin(4*pi*(x+y))"));
    for (int i = 0; i < 20; ++i) {
      const Class2 s{e(rng), e(rng)}, t{e(rng), e(rng)};
      c.expect(rotation_number(diag, s + t) == rotation_number(diag, s) + rotation_number(diag, t), "additivity");
    }
    for (int k = 1; k <= 3; ++k) c.expect(compute_kg(SurfaceModel::strip(k)) == k, "k_g(strip_k)");
    // Duality of leaf traces and verdicts under g -> -g.
    for (const auto& m : {SurfaceModel::strip(1), SurfaceModel::galloway(0.2)}) {
      const FoliationAtlas& pos = run(m).atlas;
      const FoliationAtlas neg = build_atlas(m.negated());
      c.expect(pos.verdict.verdict == neg.verdict.verdict, "verdict differs under negation");
      c.expect(pos.leaves.size() == neg.leaves.size(), "leaf count differs under negation");
      for (const Leaf& l : pos.leaves) {
        double best = 1.0;
        for (const Leaf& q : neg.leaves) {
          double h = 0.0;
          for (const Vec2 p : l.trace) h = std::max(h, distance_to_polyline(p, q.trace));
          best = std::min(best, h);
        }
        c.expect(best < 1e-6, "leaf trace differs under negation");
      }
    }
    // Maximizer: monotone, causal, and on the vertical-circle oracle.
    for (const auto& m : {SurfaceModel::strip(1), SurfaceModel::galloway(0.2)}) {
      const oracle::CircleMax best = oracle::best_vertical_circle(m);
      const MaximizeResult r = maximize_length(m, {0, 1}, CausalSign::nonspacelike);
      c.expect(std::abs(r.length - best.length) < 1e-4, m.name() + " maximizer length");
      for (const Vec2 v : r.polygon.vertices) c.expect(gap(v.x, best.x) < 1e-4, m.name() + " maximizer position");
      for (std::size_t i = 1; i < r.history.size(); ++i) c.expect(r.history[i] >= r.history[i - 1], "monotone");
      for (double s : r.polygon.slack) c.expect(s >= -1e-12, "slack");
      c.expect(r.certified.has_value(), m.name() + " maximizer not certified");
      d << ", " << m.name() << " max " << r.length;
    }
    // Certified records: re-integrate every stored record.
    double worst = 0.0;
    for (const auto& [m, r] : certified) worst = std::max(worst, closure_residual(m, *r));
    c.expect(worst <= 1e-9, "record closure residual");
    d << ", " << certified.size() << " records re-closed to " << worst;
    report(6, "invariant suite", c, since(t0), d.str());
  }
  {  // 7
    Checks c;
    const auto t0 = Clock::now();
    std::string names;
    for (const auto& m : {SurfaceModel::flat(1, 0, -1), SurfaceModel::strip(1), SurfaceModel::strip(2),
                          SurfaceModel::strip(3), SurfaceModel::galloway(0.2), SurfaceModel::klein_galloway()}) {
      const SurfaceReport& r = run(m).report;
      c.expect(r.found.total() >= 2 && r.found.definite() >= 1, m.name() + " below the floor");
      c.expect(r.pass(), m.name() + " report fails");
      names += (names.empty() ? "" : ", ") + m.name();
    }
    report(7, "global floors on every builtin model", c, since(t0), names);
  }
  const double total = since(suite_start);
  Checks c;
  c.expect(total < 600.0, "suite above 10 min");
  report(6, "full suite runtime under 10 min", c, total, "");
  std::printf("%s\n", failed == 0 ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return failed == 0 ? 0 : 1;
}
