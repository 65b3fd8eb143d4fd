#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorenzlab/expression.hpp"
#include "lorenzlab/geometry.hpp"

namespace lorenzlab {

enum class Topology { torus, klein };
enum class Family { flat, strip, galloway, klein_galloway, custom };
enum class CausalType { timelike, lightlike, spacelike };

std::string to_string(Topology t);
std::string to_string(Family f);
std::string to_string(CausalType c);

// Quadratic form E dx^2 + 2F dx dy + G dy^2. F is the full off-diagonal entry g_xy.
struct MetricValue {
  double E = 0.0;
  double F = 0.0;
  double G = 0.0;

  double det() const { return E * G - F * F; }
  bool lorentzian() const { return det() < 0.0; }
  double quad(Vec2 v) const { return E * v.x * v.x + 2.0 * F * v.x * v.y + G * v.y * v.y; }
  double pair(Vec2 u, Vec2 v) const {
    return E * u.x * v.x + F * (u.x * v.y + u.y * v.x) + G * u.y * v.y;
  }
  Vec2 lower(Vec2 v) const { return {E * v.x + F * v.y, F * v.x + G * v.y}; }
  MetricValue operator*(double s) const { return {E * s, F * s, G * s}; }
};

// Metric value together with its first partial derivatives.
struct MetricJet {
  MetricValue value;
  MetricValue d_dx;
  MetricValue d_dy;
};

// Connection coefficients; first letter is the upper index.
struct ChristoffelValue {
  double x_xx = 0.0, x_xy = 0.0, x_yy = 0.0;
  double y_xx = 0.0, y_xy = 0.0, y_yy = 0.0;

  // (Gamma^x(v,v), Gamma^y(v,v))
  Vec2 contract(Vec2 v) const {
    return {x_xx * v.x * v.x + 2.0 * x_xy * v.x * v.y + x_yy * v.y * v.y,
            y_xx * v.x * v.x + 2.0 * y_xy * v.x * v.y + y_yy * v.y * v.y};
  }
};

// Declarative description of a model; the input to SurfaceModel.
struct ModelSpec {
  Topology topology = Topology::torus;
  Family family = Family::flat;
  double E = 1.0, F = 0.0, G = -1.0;  // flat
  int k = 1;                          // strip
  double eps = 0.2;                   // galloway
  std::string expr_E, expr_F, expr_G;  // custom
  bool negate = false;      // use -g
  int time_sign = 1;        // flips the time orientation
  bool swap_null = false;   // exchanges the labels of the two lightlike fields

  static ModelSpec flat(double E, double F, double G);
  static ModelSpec strip(int k);
  static ModelSpec galloway(double eps);
  static ModelSpec klein_galloway();
  static ModelSpec custom(std::string E, std::string F, std::string G,
                          Topology topology = Topology::torus);
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelRejected : public ModelError {
 public:
  ModelRejected(const std::string& reason, std::vector<Vec2> points = {})
      : ModelError(reason), points_(std::move(points)) {}
  const std::vector<Vec2>& points() const { return points_; }

 private:
  std::vector<Vec2> points_;
};

class DegenerateMetric : public ModelError {
 public:
  explicit DegenerateMetric(Vec2 p);
  Vec2 point() const { return p_; }

 private:
  Vec2 p_;
};

// Coefficient evaluator without any validation.
class MetricField {
 public:
  explicit MetricField(const ModelSpec& spec);

  MetricValue value(Vec2 p) const;
  MetricJet jet(Vec2 p) const;
  const ModelSpec& spec() const { return spec_; }

 private:
  MetricValue raw(Vec2 p) const;
  MetricJet raw_jet(Vec2 p) const;

  ModelSpec spec_;
  std::optional<Expression> e_, f_, g_;
};

class TimeOrientation;

// Immutable world object: topology, metric family, conventions.
//
// Construction rejects models that are not Lorentzian on a 256-grid of the
// fundamental domain, or whose coefficients fail the deck-group periodicity check.
// Klein bottle models are represented on the orientable double cover with
// fundamental domain [0,1]^2; the glide (x,y) -> (x+1/2,-y) is kept for
// identification of traces.
class SurfaceModel {
 public:
  explicit SurfaceModel(ModelSpec spec);

  static SurfaceModel flat(double E, double F, double G);
  static SurfaceModel strip(int k);
  static SurfaceModel galloway(double eps);
  static SurfaceModel klein_galloway();

  SurfaceModel negated() const;

  const ModelSpec& spec() const { return field_.spec(); }
  const MetricField& field() const { return field_; }
  std::string name() const;
  bool is_klein() const { return spec().topology == Topology::klein; }

  MetricValue metric(Vec2 p) const { return field_.value(p); }
  MetricJet jet(Vec2 p) const { return field_.jet(p); }

  // Unit (flat norm) future timelike cone bisector at p.
  Vec2 future_axis(Vec2 p) const;
  bool time_orientable() const;

  static Vec2 glide(Vec2 p) { return {p.x + 0.5, -p.y}; }

 private:
  MetricField field_;
  std::shared_ptr<const TimeOrientation> orientation_;
};

// Cone geometry of a Lorentzian form, in angles of the flat trivialization.
struct ConeAngles {
  double spacelike_axis;  // line angle alpha/2 of the spacelike bisector
  double beta;            // null lines sit at spacelike_axis +- beta/2
};
ConeAngles cone_angles(const MetricValue& g);

// Future-pointing unit null vectors.
struct NullPair {
  Vec2 plus;
  Vec2 minus;
};

MetricValue eval_metric(const SurfaceModel& model, Vec2 p);
ChristoffelValue christoffels(const SurfaceModel& model, Vec2 p);
ChristoffelValue christoffels_from_jet(const MetricJet& jet);
CausalType causal_type(const SurfaceModel& model, Vec2 p, Vec2 v, double tol = 1e-12);
CausalType causal_type(const MetricValue& g, Vec2 v, double tol = 1e-12);
NullPair null_directions(const SurfaceModel& model, Vec2 p);

// Unit vector along the null line of the given sign (+1 / -1), oriented to
// have nonnegative inner product with `reference`.
Vec2 null_line(const SurfaceModel& model, int sign, Vec2 p, Vec2 reference);

// Grid points of the fundamental domain with EG - F^2 >= -1e-12.
std::vector<Vec2> verify_lorentzian(const MetricField& field, int grid_n);
std::vector<Vec2> verify_lorentzian(const SurfaceModel& model, int grid_n);

}  // namespace lorenzlab
