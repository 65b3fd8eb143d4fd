#pragma once

#include <optional>
#include <vector>

#include "lorenzlab/geometry.hpp"
#include "lorenzlab/metric.hpp"
#include "lorenzlab/ode.hpp"

namespace lorenzlab {

struct TangentState {
  double t = 0.0;
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;

  Vec2 pos() const { return {x, y}; }
  Vec2 vel() const { return {vx, vy}; }
  ode::State<4> state() const { return {x, y, vx, vy}; }
  static TangentState from(double t, const ode::State<4>& s) { return {t, s[0], s[1], s[2], s[3]}; }
};

enum class FlowExit {
  completed,
  velocity_blowup,  // incompleteness guard: Riemannian speed above the cap
  step_underflow,
  max_steps,
  degenerate,       // RHS failure (degenerate metric or field discontinuity)
  event,
  tube_exit
};
std::string to_string(FlowExit e);

struct GeodesicPath {
  std::vector<TangentState> samples;
  std::vector<double> energy;  // g(v, v) per sample
  FlowExit exit = FlowExit::completed;
  double reached_t = 0.0;
  std::size_t rejected_steps = 0;
  double min_step = 0.0;
  double max_step = 0.0;
};

struct FlowOptions {
  double tol = 1e-10;
  double velocity_cap = 1e8;
  double h_max = std::numeric_limits<double>::infinity();
};

// Right-hand side of the geodesic ODE in (x, y, vx, vy).
struct GeodesicRhs {
  const SurfaceModel* model;
  bool operator()(double, const ode::State<4>& s, ode::State<4>& d) const;
};

GeodesicPath integrate_geodesic(const SurfaceModel& model, const TangentState& s0, double t_end,
                                double tol);
GeodesicPath integrate_geodesic(const SurfaceModel& model, const TangentState& s0, double t_end,
                                const FlowOptions& opt);

// max |e(t) - e(0)| over the samples.
double energy_drift(const GeodesicPath& path);

// Field line of a lightlike direction field, parameterized by flat arclength.
struct LeafPath {
  int sign = 1;
  std::vector<Vec2> points;
  std::vector<double> arclength;
  std::optional<Class2> period;  // set when the path is one closed cycle
  FlowExit exit = FlowExit::completed;

  Vec2 start() const { return points.front(); }
  Vec2 end() const { return points.back(); }
  double length() const { return arclength.empty() ? 0.0 : arclength.back(); }
  // Displacement per unit length over the whole path.
  Vec2 drift() const { return length() > 0.0 ? (end() - start()) / length() : Vec2{}; }
};

struct LeafOptions {
  double tol = 1e-11;
  double h_max = 0.01;
  // Initial direction hint; defaults to the future-pointing null vector.
  std::optional<Vec2> initial_direction;
};

// Follows the oriented lightlike field of `sign` (+1 / -1) from p0 for `arclen`.
LeafPath integrate_leaf(const SurfaceModel& model, int sign, Vec2 p0, double arclen,
                        const LeafOptions& opt = {});

// Follows the leaf until |y - y0| = turns (transversal {y = const}) or
// |x - x0| = turns when `along_x` is set; returns the path with exit == event on
// return.
LeafPath leaf_until_return(const SurfaceModel& model, int sign, Vec2 p0, double arclen_cap,
                           bool along_x, const LeafOptions& opt = {}, int turns = 1);

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Collinearity factor lambda of the geodesic tangent to a closed leaf after one
// cycle: gamma'(T) = lambda gamma'(0). Throws FlowError unless `leaf` is a closed
// leaf of its field.
double cycle_scaling(const SurfaceModel& model, const LeafPath& leaf);

// Reverses the traversal orientation of a closed leaf path.
LeafPath reversed(const LeafPath& leaf);

// Flat distance from p to the polyline, modulo the deck lattice.
double distance_to_polyline(Vec2 p, const std::vector<Vec2>& poly);

}  // namespace lorenzlab
