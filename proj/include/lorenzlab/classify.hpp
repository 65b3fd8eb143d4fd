#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lorenzlab/foliation.hpp"
#include "lorenzlab/search.hpp"

namespace lorenzlab {

class ClassifyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Degree of the timelike cone axis along a loop c: [0,1] -> cover with
// c(1) - c(0) integral, measured in the flat frame.
long rotation_number_along(const SurfaceModel& model, const std::function<Vec2(double)>& loop);
// Along the straight representative of sigma through the origin.
long rotation_number(const SurfaceModel& model, Class2 sigma);

long compute_kg(const SurfaceModel& model);

struct PredictedCounts {
  long leaves = 0, timelike = 0, spacelike = 0;
};
PredictedCounts predicted_counts(long kg);

struct RecordCounts {
  long timelike = 0, spacelike = 0, lightlike = 0;
  long total() const { return timelike + spacelike + lightlike; }
  long definite() const { return timelike + spacelike; }
};

struct ReportCheck {
  std::string name;
  long found = 0;
  long required = 0;
  bool pass = false;
};

struct SurfaceReport {
  std::string model;
  std::string topology;
  long n_x = 0, n_y = 0;  // rotation numbers along (1,0) and (0,1)
  long kg = 0;
  ClassVerdict verdict;
  RotationClass m_plus, m_minus;
  long closed_leaves = 0;
  RecordCounts found;
  // Klein models: counts on the orientable double cover, glide images split.
  std::optional<RecordCounts> double_cover;
  PredictedCounts predicted;
  std::vector<ReportCheck> checks;
  std::vector<std::string> warnings;
  std::map<std::string, double> timings;  // seconds; serialized only on request

  bool pass() const;
};

RecordCounts count_records(const std::vector<ClosedGeodesicRecord>& records);
// Records lifted to the double cover: a record whose glide image is a different
// trace counts twice.
RecordCounts double_cover_counts(const std::vector<ClosedGeodesicRecord>& records, double tol = 1e-4);

SurfaceReport build_report(const SurfaceModel& model, const FoliationAtlas& atlas,
                           const SurveyResult& survey);

}  // namespace lorenzlab
