#pragma once

#include <iosfwd>
#include <json.hpp>

#include "lorenzlab/classify.hpp"

namespace lorenzlab {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

Json to_json(Class2 h);
Json to_json(const RotationClass& rc);
Json to_json(const Leaf& leaf);
Json to_json(const FoliationAtlas& atlas);
Json to_json(const ClosedGeodesicRecord& rec);
Json to_json(const SurveyResult& survey);
Json to_json(const MaximizeResult& result);
Json to_json(const SurfaceReport& report, bool with_timings = false);

// Trace CSV: one row per sample, columns t,x,y,vx,vy,e with e = g(v, v).
void write_trace_csv(std::ostream& out, const SurfaceModel& model,
                     const std::vector<ClosedGeodesicRecord>& records);
// Leaf CSV: columns leaf,sign,x,y.
void write_leaf_csv(std::ostream& out, const std::vector<Leaf>& leaves);

}  // namespace lorenzlab
