#include "lorenzlab/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace lorenzlab {

Json to_json(Class2 h) { return Json::array({h.a, h.b}); }

Json to_json(const RotationClass& rc) {
  Json j;
  j["sign"] = rc.sign;
  j["angle"] = rc.cls.angle;
  j["class"] = rc.cls.rational ? to_json(*rc.cls.rational) : Json(nullptr);
  j["radius"] = rc.radius;
  return j;
}

Json to_json(const Leaf& leaf) {
  Json j;
  j["sign"] = leaf.sign;
  j["closed"] = leaf.closed;
  j["intercept"] = leaf.intercept;
  j["transversal"] = leaf.along_y ? "y=0" : "x=0";
  j["homology"] = leaf.homology ? to_json(*leaf.homology) : Json(nullptr);
  j["lambda"] = leaf.lambda ? Json(*leaf.lambda) : Json(nullptr);
  j["complete"] = leaf.lambda ? Json(std::abs(*leaf.lambda - 1.0) <= 1e-6) : Json(nullptr);
  if (leaf.glide_partner >= 0) j["glide_partner"] = leaf.glide_partner;
  return j;
}

Json to_json(const FoliationAtlas& atlas) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["m_plus"] = to_json(atlas.m_plus);
  j["m_minus"] = to_json(atlas.m_minus);
  j["class"] = to_string(atlas.verdict.verdict);
  j["margin"] = atlas.verdict.margin;
  j["all_closed_plus"] = atlas.all_closed_plus;
  j["all_closed_minus"] = atlas.all_closed_minus;
  Json leaves = Json::array();
  for (const Leaf& l : atlas.leaves) leaves.push_back(to_json(l));
  j["leaves"] = std::move(leaves);
  Json annuli = Json::array();
  for (const Annulus& z : atlas.annuli) {
    Json a;
    a["lo"] = z.lo;
    a["hi"] = z.hi;
    a["loop_class"] = to_json(z.loop_class);
    a["timelike_loops"] = z.timelike_loops;
    a["spacelike_loops"] = z.spacelike_loops;
    a["in_reeb_plus"] = z.in_reeb_plus;
    a["in_reeb_minus"] = z.in_reeb_minus;
    annuli.push_back(std::move(a));
  }
  j["annuli"] = std::move(annuli);
  Json reeb = Json::array();
  for (const ReebAnnulus& r : atlas.reeb) reeb.push_back({{"sign", r.sign}, {"lo", r.lo}, {"hi", r.hi}, {"reeb_components", r.reeb_components}});
  j["reeb"] = std::move(reeb);
  return j;
}

Json to_json(const ClosedGeodesicRecord& rec) {
  Json j;
  j["homology"] = to_json(rec.homology);
  j["causal"] = to_string(rec.causal);
  j["method"] = to_string(rec.method);
  j["period"] = rec.period;
  j["length"] = rec.length;
  j["intercept"] = rec.intercept;
  j["residual"] = rec.residual;
  const TangentState s = rec.initial();
  j["initial"] = {s.x, s.y, s.vx, s.vy};
  j["segments"] = rec.nodes.size();
  j["lambda"] = rec.lambda ? Json(*rec.lambda) : Json(nullptr);
  return j;
}

Json to_json(const SurveyResult& survey) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["shots"] = survey.shots;
  j["converged"] = survey.converged;
  Json recs = Json::array();
  for (const auto& r : survey.records) recs.push_back(to_json(r));
  j["records"] = std::move(recs);
  j["warnings"] = survey.warnings;
  return j;
}

Json to_json(const MaximizeResult& result) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["homology"] = to_json(result.polygon.homology);
  j["sign"] = result.polygon.sign == CausalSign::nonspacelike ? "nonspacelike" : "nontimelike";
  j["length"] = result.length;
  j["iterations"] = result.iterations;
  j["gradient_norm"] = result.gradient_norm;
  j["cap_exceeded"] = result.cap_exceeded;
  j["riemannian_length"] = result.polygon.riemannian_length();
  Json verts = Json::array();
  for (const Vec2 v : result.polygon.vertices) verts.push_back({v.x, v.y});
  j["vertices"] = std::move(verts);
  j["certification"] = result.certification;
  j["certified"] = result.certified ? to_json(*result.certified) : Json(nullptr);
  return j;
}

namespace {

Json counts_json(const RecordCounts& c) {
  return {{"timelike", c.timelike}, {"spacelike", c.spacelike}, {"lightlike", c.lightlike}};
}

}  // namespace

Json to_json(const SurfaceReport& rep, bool with_timings) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["model"] = rep.model;
  j["topology"] = rep.topology;
  j["rotation_numbers"] = {{"(1,0)", rep.n_x}, {"(0,1)", rep.n_y}};
  j["k_g"] = rep.kg;
  j["class"] = to_string(rep.verdict.verdict);
  j["m_plus"] = to_json(rep.m_plus);
  j["m_minus"] = to_json(rep.m_minus);
  j["closed_leaves"] = rep.closed_leaves;
  j["found"] = counts_json(rep.found);
  if (rep.double_cover) j["double_cover"] = counts_json(*rep.double_cover);
  j["predicted"] = {{"leaves", rep.predicted.leaves},
                    {"timelike", rep.predicted.timelike},
                    {"spacelike", rep.predicted.spacelike}};
  Json checks = Json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"found", c.found}, {"required", c.required}, {"pass", c.pass}});
  j["checks"] = std::move(checks);
  j["pass"] = rep.pass();
  j["warnings"] = rep.warnings;
  if (with_timings) j["timings"] = rep.timings;
  return j;
}

void write_trace_csv(std::ostream& out, const SurfaceModel& model,
                     const std::vector<ClosedGeodesicRecord>& records) {
  out << "record,t,x,y,vx,vy,e\n";
  char buf[256];
  for (std::size_t i = 0; i < records.size(); ++i)
    for (const TangentState& s : records[i].trace) {
      const double e = model.metric(s.pos()).quad(s.vel());
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, s.t, s.x, s.y,
                    s.vx, s.vy, e);
      out << buf;
    }
}

void write_leaf_csv(std::ostream& out, const std::vector<Leaf>& leaves) {
  out << "leaf,sign,x,y\n";
  char buf[128];
  for (std::size_t i = 0; i < leaves.size(); ++i)
    for (const Vec2 p : leaves[i].trace) {
      std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g\n", i, leaves[i].sign, p.x, p.y);
      out << buf;
    }
}

}  // namespace lorenzlab
