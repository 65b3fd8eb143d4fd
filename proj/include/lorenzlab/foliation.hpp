#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorenzlab/flow.hpp"

namespace lorenzlab {

class FoliationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Projective homology direction, stored as a line angle in [0, pi).
struct ProjectiveClass {
  double angle = 0.0;
  std::optional<Class2> rational;  // coprime representative when one is close

  Vec2 direction() const { return unit_at(angle); }
  std::string str() const;
};

ProjectiveClass projective_class(Vec2 direction, double rational_tol = 1e-4, long max_den = 64);
// Angle between two lines, in [0, pi/2].
double angular_distance(const ProjectiveClass& a, const ProjectiveClass& b);
// Primitive representative of a class, normalized to a > 0 or (a == 0, b > 0).
Class2 canonical_class(Class2 h);

struct RotationClass {
  int sign = 1;
  ProjectiveClass cls;
  double radius = 0.0;  // confidence radius in radians
};

struct RotationOptions {
  double arclength = 1000.0;
  int seeds = 8;
  double tol = 1e-9;
  int workers = 1;
};

RotationClass rotation_class(const SurfaceModel& model, int sign, const RotationOptions& opt = {});

struct Leaf {
  int sign = 1;
  bool closed = false;
  std::vector<Vec2> trace;  // one period, future orientation, cover coordinates
  std::optional<Class2> homology;
  std::optional<double> lambda;
  double intercept = 0.0;  // coordinate on the transversal
  bool along_y = true;     // transversal is {y = 0}, intercept is an x value
  int glide_partner = -1;  // Klein models: index of the glide image in the atlas
};

struct CensusOptions {
  int samples = 256;
  double bisect_tol = 1e-10;
  double arclength_cap = 1000.0;
  int workers = 1;
};

struct Census {
  std::vector<Leaf> leaves;
  bool along_y = true;
  bool all_closed = false;  // return map is the identity: no isolated closed leaves
};

// Closed leaves of one lightlike foliation, sorted by intercept.
Census closed_leaves(const SurfaceModel& model, int sign, const RotationClass& rc,
                     const CensusOptions& opt = {});

// A closed leaf as a graph over its transversal's complement: across(along).
// With a {y = 0} transversal `along` is y and `across` is x.
class LeafCurve {
 public:
  LeafCurve(const SurfaceModel& model, const Leaf& leaf);
  double across(double along) const;
  double slope(double along) const;
  // Shift of `across` after one period along the leaf.
  double period_shift() const { return shift_; }
  double period_length() const { return span_; }
  bool along_y() const { return along_y_; }

 private:
  bool along_y_;
  std::vector<double> t_, c_, m_;
  double span_ = 1.0;
  double shift_ = 0.0;
};

struct Annulus {
  double lo = 0.0, hi = 1.0;  // intercepts, hi may exceed 1 for the wrapping gap
  int lo_leaf = -1, hi_leaf = -1;
  Class2 loop_class;
  bool timelike_loops = false;
  bool spacelike_loops = false;
  // Whether the annulus lies inside a Reeb component of the +/- foliation.
  bool in_reeb_plus = false;
  bool in_reeb_minus = false;
};

// Annulus of one foliation cut along consecutive equally oriented closed leaves.
struct ReebAnnulus {
  int sign = 1;
  double lo = 0.0, hi = 1.0;
  int reeb_components = 0;
};

enum class SurfaceClass { A, B };
std::string to_string(SurfaceClass c);

struct ClassVerdict {
  SurfaceClass verdict = SurfaceClass::B;
  // Angular distance between m+ and m- minus both confidence radii.
  double margin = 0.0;
};

struct FoliationAtlas {
  RotationClass m_plus, m_minus;
  ClassVerdict verdict;
  bool along_y = true;
  std::vector<Leaf> leaves;  // both signs, sorted by intercept
  std::vector<Annulus> annuli;
  std::vector<ReebAnnulus> reeb;
  bool all_closed_plus = false, all_closed_minus = false;
};

struct AtlasOptions {
  RotationOptions rotation;
  CensusOptions census;
};

ClassVerdict classify_rotation(const RotationClass& plus, const RotationClass& minus,
                               bool closed_plus, bool closed_minus);
ClassVerdict class_AB(const SurfaceModel& model, const AtlasOptions& opt = {});

// Annulus decomposition from a census of both signs on a common transversal.
std::vector<Annulus> annuli(const SurfaceModel& model, const std::vector<Leaf>& leaves);
std::vector<ReebAnnulus> reeb_annuli(const std::vector<Leaf>& leaves, int sign);

FoliationAtlas build_atlas(const SurfaceModel& model, const AtlasOptions& opt = {});

enum class AffiliationKind { crossed, asymptotic };

struct Affiliation {
  int plus_leaf = -1, minus_leaf = -1;  // atlas leaf indices
  AffiliationKind plus_kind = AffiliationKind::crossed;
  AffiliationKind minus_kind = AffiliationKind::crossed;
  bool different() const { return plus_leaf != minus_leaf; }
};

// Boundary leaves that the future lightlike leaves through p run into.
Affiliation affiliation(const SurfaceModel& model, const FoliationAtlas& atlas, Vec2 p,
                        double arclength_cap = 1000.0);

}  // namespace lorenzlab
