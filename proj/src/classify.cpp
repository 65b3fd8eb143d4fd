#include "lorenzlab/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lorenzlab {

namespace {

// Line angle of the timelike cone axis.
double axis_angle(const SurfaceModel& model, Vec2 p) {
  return cone_angles(model.metric(p)).spacelike_axis + kPi / 2;
}

// Lift of the axis line angle from t0 to t1, refining where the line turns
// by more than a quarter turn between samples.
double lift(const SurfaceModel& model, const std::function<Vec2(double)>& loop, double t0,
            double t1, double a0, double a1) {
  const double d = wrap_half_pi(a1 - a0);
  if (std::abs(d) <= kPi / 8) return d;
  if (t1 - t0 < 1e-5) throw ClassifyError("axis angle jumps between samples below step 1e-5");
  const double tm = 0.5 * (t0 + t1);
  const double am = axis_angle(model, loop(tm));
  return lift(model, loop, t0, tm, a0, am) + lift(model, loop, tm, t1, am, a1);
}

}  // namespace

long rotation_number_along(const SurfaceModel& model, const std::function<Vec2(double)>& loop) {
  constexpr int samples = 512;
  double total = 0.0;
  double prev = axis_angle(model, loop(0.0));
  for (int i = 1; i <= samples; ++i) {
    const double t0 = double(i - 1) / samples, t1 = double(i) / samples;
    const double a = axis_angle(model, loop(t1));
    total += lift(model, loop, t0, t1, prev, a);
    prev = a;
  }
  const double turns = total / kTwoPi;
  const double n = std::round(turns);
  if (std::abs(turns - n) > 1e-6)
    throw ClassifyError("timelike axis does not close up along the loop (" + std::to_string(turns) +
                        " turns); the loop reverses time orientation");
  return long(n);
}

long rotation_number(const SurfaceModel& model, Class2 sigma) {
  const Vec2 h = sigma.vec();
  return rotation_number_along(model, [h](double t) { return h * t; });
}

long compute_kg(const SurfaceModel& model) {
  return std::gcd(std::abs(rotation_number(model, {1, 0})), std::abs(rotation_number(model, {0, 1})));
}

PredictedCounts predicted_counts(long kg) { return {4 * kg, 2 * kg, 2 * kg}; }

RecordCounts count_records(const std::vector<ClosedGeodesicRecord>& records) {
  RecordCounts c;
  for (const auto& r : records) {
    switch (r.causal) {
      case CausalType::timelike:
        ++c.timelike;
        break;
      case CausalType::spacelike:
        ++c.spacelike;
        break;
      case CausalType::lightlike:
        ++c.lightlike;
        break;
    }
  }
  return c;
}

RecordCounts double_cover_counts(const std::vector<ClosedGeodesicRecord>& records, double tol) {
  RecordCounts c = count_records(records);
  for (const auto& r : records) {
    const auto pts = r.points();
    std::vector<Vec2> image;
    image.reserve(pts.size());
    for (const Vec2 p : pts) image.push_back(SurfaceModel::glide(p));
    if (trace_distance(pts, image) < tol) continue;
    switch (r.causal) {
      case CausalType::timelike:
        ++c.timelike;
        break;
      case CausalType::spacelike:
        ++c.spacelike;
        break;
      case CausalType::lightlike:
        ++c.lightlike;
        break;
    }
  }
  return c;
}

bool SurfaceReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ReportCheck& c) { return c.pass; });
}

SurfaceReport build_report(const SurfaceModel& model, const FoliationAtlas& atlas,
                           const SurveyResult& survey) {
  SurfaceReport rep;
  rep.model = model.name();
  rep.topology = to_string(model.spec().topology);
  rep.n_x = rotation_number(model, {1, 0});
  rep.n_y = rotation_number(model, {0, 1});
  rep.kg = std::gcd(std::abs(rep.n_x), std::abs(rep.n_y));
  rep.verdict = atlas.verdict;
  rep.m_plus = atlas.m_plus;
  rep.m_minus = atlas.m_minus;
  rep.closed_leaves = long(atlas.leaves.size());
  rep.found = count_records(survey.records);
  rep.predicted = predicted_counts(rep.kg);
  rep.warnings = survey.warnings;

  auto check = [&](std::string name, long found, long required) {
    rep.checks.push_back({std::move(name), found, required, found >= required});
  };
  check("closed leaves >= 4 k_g", rep.closed_leaves, rep.predicted.leaves);
  check("timelike >= 2 k_g", rep.found.timelike, rep.predicted.timelike);
  check("spacelike >= 2 k_g", rep.found.spacelike, rep.predicted.spacelike);
  check("closed geodesics >= 2", rep.found.total(), 2);
  check("definite >= 1", rep.found.definite(), 1);
  if (model.is_klein()) {
    rep.double_cover = double_cover_counts(survey.records);
    check("double cover: closed geodesics >= 4", rep.double_cover->total(), 4);
    check("double cover: definite >= 2", rep.double_cover->definite(), 2);
  } else if (model.time_orientable()) {
    check("closed geodesics >= 4", rep.found.total(), 4);
    check("definite >= 2", rep.found.definite(), 2);
  }
  if (rep.kg > 0)
    rep.checks.push_back({"k_g > 0 implies class B", rep.kg,
                          0, atlas.verdict.verdict == SurfaceClass::B});
  return rep;
}

}  // namespace lorenzlab
