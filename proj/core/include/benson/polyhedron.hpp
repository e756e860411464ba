#pragma once

// Floating-point polyhedral calculus: halfspace (H) and generator (V)
// representations, conversion between them by the double description
// method, and redundancy removal.

#include <Eigen/Dense>
#include <boost/dynamic_bitset.hpp>

#include <cstddef>
#include <optional>
#include <vector>

namespace benson {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct GeometryTolerances {
  double zero = 1e-12;    // normals shorter than this are rejected
  double feas = 1e-8;     // point-in-halfspace slack
  double dup = 1e-9;      // duplicate halfspaces / merged generators
  double support = 1e-7;  // "tight" for redundancy and facet tests
};

/// {y : normal' y >= offset}
struct HalfSpace {
  Vec normal;
  double offset = 0.0;

  [[nodiscard]] double slack(const Vec& y) const { return normal.dot(y) - offset; }
};

/// Builds a halfspace scaled to a unit normal. Throws ZeroNormalError when
/// the normal is shorter than `tol_zero`.
HalfSpace make_halfspace(const Vec& normal, double offset, double tol_zero = 1e-12);

struct HRep {
  std::vector<HalfSpace> halfspaces;

  [[nodiscard]] std::size_t size() const { return halfspaces.size(); }
  [[nodiscard]] bool contains(const Vec& y, double tol) const;
  /// Smallest slack over all halfspaces (+inf for an empty list).
  [[nodiscard]] double min_slack(const Vec& y) const;
};

struct VRep {
  std::vector<Vec> vertices;
  std::vector<Vec> rays;  // unit length
};

/// All vertices and extreme rays of the polyhedron given by `hrep`, sorted
/// lexicographically. Throws LineError when the polyhedron contains a line
/// and EmptyError when it is infeasible.
VRep enumerate_vertices(const HRep& hrep, int dim, const GeometryTolerances& tol = {});

/// Drops every halfspace that does not define a facet of the polyhedron
/// spanned by `vrep` (duplicates keep their first occurrence).
HRep remove_redundant(const HRep& hrep, const VRep& vrep, const GeometryTolerances& tol = {});

/// Facet description of conv(vertices) + cone(rays). Implicit equalities are
/// returned as pairs of opposite halfspaces.
HRep hull(const VRep& vrep, int dim, const GeometryTolerances& tol = {});

namespace detail {

/// Incremental double description of the cone {x in R^d : A x >= 0}.
/// Generators are a lineality basis plus extreme rays; each ray carries the
/// set of constraints it is tight on.
class ConeDD {
 public:
  explicit ConeDD(int dim, double tol);

  void add_constraint(const Vec& row);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const std::vector<Vec>& lineality() const { return lineality_; }
  [[nodiscard]] std::size_t num_rays() const { return rays_.size(); }
  [[nodiscard]] const Vec& ray(std::size_t i) const { return rays_[i].dir; }
  [[nodiscard]] const boost::dynamic_bitset<>& zero_set(std::size_t i) const { return rays_[i].zero; }
  [[nodiscard]] const std::vector<Vec>& constraints() const { return constraints_; }
  [[nodiscard]] std::size_t num_merged() const { return merged_; }

 private:
  struct Ray {
    Vec dir;
    boost::dynamic_bitset<> zero;
  };

  void absorb_into_lineality(const Vec& a, std::size_t pivot);
  [[nodiscard]] bool adjacent(std::size_t p, std::size_t n, const boost::dynamic_bitset<>& common) const;

  int dim_;
  double tol_;
  std::vector<Vec> constraints_;
  std::vector<Vec> lineality_;
  std::vector<Ray> rays_;
  std::size_t merged_ = 0;
};

}  // namespace detail

/// H-representation kept in sync with its V-representation. Halfspaces can be
/// appended one at a time; the generators are then updated by one double
/// description step per new halfspace instead of a full recomputation.
class Polyhedron {
 public:
  explicit Polyhedron(int dim, GeometryTolerances tol = {});
  Polyhedron(int dim, const HRep& hrep, GeometryTolerances tol = {});

  /// Polyhedron spanned by `vrep`; its H-representation is the facet list.
  static Polyhedron from_vrep(const VRep& vrep, int dim, GeometryTolerances tol = {});

  /// Appends `h` unless an equal halfspace (within tol.dup) is already
  /// present. Returns whether it was appended.
  bool add_halfspace(const HalfSpace& h);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const HRep& hrep() const { return hrep_; }
  [[nodiscard]] bool dirty() const { return dirty_; }
  [[nodiscard]] const GeometryTolerances& tolerances() const { return tol_; }

  /// Brings the V-representation up to date and returns it.
  const VRep& vrep();
  /// The cached V-representation; throws std::logic_error when dirty.
  [[nodiscard]] const VRep& cached_vrep() const;

  /// Replaces the H-representation by its facets.
  void reduce();

  [[nodiscard]] bool contains(const Vec& y, double tol) const { return hrep_.contains(y, tol); }
  /// Number of degenerate generators merged by the double description so far.
  [[nodiscard]] std::size_t num_merged() const { return dd_.num_merged(); }

 private:
  void rebuild_vrep();

  int dim_;
  GeometryTolerances tol_;
  HRep hrep_;
  detail::ConeDD dd_;
  std::size_t applied_ = 0;
  VRep vrep_;
  bool dirty_ = true;
};

/// Lexicographic comparison with exact ties.
bool lex_less(const Vec& a, const Vec& b);

}  // namespace benson
