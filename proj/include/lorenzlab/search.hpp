#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lorenzlab/flow.hpp"
#include "lorenzlab/foliation.hpp"

namespace lorenzlab {

enum class RecordMethod { shooting, maximizer, leaf };
std::string to_string(RecordMethod m);

struct ClosedGeodesicRecord {
  Class2 homology;
  CausalType causal = CausalType::timelike;
  double period = 0.0;  // affine
  // Multiple-shooting nodes; the first one is the initial state. Segment i runs
  // from nodes[i] for period / nodes.size().
  std::vector<TangentState> nodes;
  std::vector<TangentState> trace;
  double residual = 0.0;  // largest segment defect, closure included
  RecordMethod method = RecordMethod::shooting;
  double length = 0.0;     // integral of sqrt|g(v, v)|
  double intercept = 0.0;  // across coordinate where the trace meets the transversal
  std::optional<double> lambda;  // lightlike leaf records

  TangentState initial() const { return nodes.front(); }
  std::vector<Vec2> points() const;
};

struct ShootOptions {
  int segments = 32;
  int max_newton = 50;
  double ode_tol = 1e-12;
  double closure_tol = 1e-9;
  double time_cap = 100.0;
};

struct ShootResult {
  std::optional<ClosedGeodesicRecord> record;
  std::string failure;
  int iterations = 0;
  explicit operator bool() const { return record.has_value(); }
};

// Closed geodesic in class h near the seed by multiple shooting.
ShootResult shoot(const SurfaceModel& model, Class2 h, const TangentState& seed,
                  const ShootOptions& opt = {});

// Re-integrates every segment from the stored nodes and returns the largest
// defect, the closure by the deck translation included.
double closure_residual(const SurfaceModel& model, const ClosedGeodesicRecord& rec,
                        double ode_tol = 1e-12);

// Transversal self-crossings of a closed trace projected to the fundamental domain.
std::vector<Vec2> self_intersections(const std::vector<Vec2>& trace);

// Symmetric Hausdorff distance of two closed traces on the torus; with `glide`
// the glide image of b is also tried.
double trace_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b, bool glide = false);

struct SurveyOptions {
  int intercepts = 16;
  int workers = 1;
  double dedup_tol = 1e-4;
  double lightlike_tol = 1e-6;
  int max_class_coord = 3;
  std::vector<Class2> classes;  // class A override; empty = automatic
  // Nonzero: intercepts are jittered within their grid cells by this RNG seed.
  unsigned long long jitter_seed = 0;
  ShootOptions shoot;
};

struct SurveyResult {
  std::vector<ClosedGeodesicRecord> records;
  std::vector<std::string> warnings;
  int shots = 0;
  int converged = 0;
};

std::vector<Class2> primitive_classes(int max_coord);

SurveyResult survey(const SurfaceModel& model, const FoliationAtlas& atlas,
                    const SurveyOptions& opt = {});

// Causal polygon maximizer.
enum class CausalSign { nonspacelike, nontimelike };

struct MaximizeOptions {
  int vertices = 64;
  int max_iterations = 20000;
  double gradient_tol = 1e-8;
  double cap_factor = 50.0;
  bool certify = true;
};

struct CausalPolygon {
  std::vector<Vec2> vertices;  // vertex i+N is vertex i shifted by h
  Class2 homology;
  CausalSign sign = CausalSign::nonspacelike;
  std::vector<double> slack;  // -g(chord, chord) for nonspacelike, flipped otherwise

  Vec2 vertex(std::size_t i) const;
  double riemannian_length() const;
};

struct MaximizeResult {
  CausalPolygon polygon;
  double length = 0.0;
  std::vector<double> history;  // length per accepted iteration
  int iterations = 0;
  double gradient_norm = 0.0;
  bool cap_exceeded = false;
  std::optional<ClosedGeodesicRecord> certified;
  std::string certification;
};

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lorentzian length of the polygon: sum over edges of sqrt(s g_mid(d, d)) with
// s = -1 for nonspacelike polygons.
double polygon_length(const SurfaceModel& model, const CausalPolygon& poly);

MaximizeResult maximize_length(const SurfaceModel& model, Class2 h, CausalSign sign,
                               const MaximizeOptions& opt = {});

}  // namespace lorenzlab
