#pragma once

// The convex vector optimization problem
//   C-minimize Gamma(x)  subject to  g(x) <= 0,  x in box,
// with a polyhedral ordering cone C.

#include "benson/expr.hpp"
#include "benson/polyhedron.hpp"

#include <optional>
#include <string>
#include <vector>

namespace benson {

/// Coordinate bounds; infinite entries mean the side is open.
struct Box {
  Vec lower;
  Vec upper;

  static Box unbounded(int n);
  [[nodiscard]] int size() const { return static_cast<int>(lower.size()); }
  [[nodiscard]] bool contains(const Vec& x, double tol = 0.0) const;
  [[nodiscard]] bool bounded_below(int i) const;
  [[nodiscard]] bool bounded_above(int i) const;
};

/// Polyhedral, solid and pointed cone C = cone(Y) with C+ = cone(Z) and an
/// interior point c. The columns of Z are scaled so that c'z = 1.
class OrderingCone {
 public:
  /// Validates the data and throws ConeError on inconsistency.
  OrderingCone(Mat generators, Mat dual_generators, Vec interior);

  /// The nonnegative orthant of R^q.
  static OrderingCone orthant(int q, const Vec& interior);
  static OrderingCone orthant(int q) { return orthant(q, Vec::Ones(q)); }
  /// Cone given by its dual generators only; the primal generators are
  /// computed by vertex enumeration.
  static OrderingCone from_dual(Mat dual_generators, Vec interior);
  /// Cone given by its generators only; the dual generators are the facet
  /// normals.
  static OrderingCone from_generators(Mat generators, Vec interior);

  [[nodiscard]] int dim() const { return static_cast<int>(c_.size()); }
  [[nodiscard]] const Mat& generators() const { return y_; }
  [[nodiscard]] const Mat& dual_generators() const { return z_; }
  [[nodiscard]] const Vec& interior() const { return c_; }
  [[nodiscard]] int num_dual_generators() const { return static_cast<int>(z_.cols()); }

  [[nodiscard]] bool contains(const Vec& y, double tol) const;
  /// w in C+, i.e. Y'w >= -tol.
  [[nodiscard]] bool dual_contains(const Vec& w, double tol) const;
  /// w lies in C+ but on its boundary (some generator of C is orthogonal).
  [[nodiscard]] bool on_dual_boundary(const Vec& w, double tol) const;

 private:
  Mat y_;
  Mat z_;
  Vec c_;
};

struct CvopProblem {
  std::string name;
  int n = 0;
  std::vector<Expr> objectives;
  std::vector<Expr> constraints;  // g_i(x) <= 0 after D reduction
  Box box;
  OrderingCone cone;
  std::optional<Mat> cone_D_dual_generators;
  /// c^1, ..., c^{q-1} completing the dual frame (q x (q-1)), if given.
  std::optional<Mat> c_frame;
  /// A strictly feasible point found by a Phase-I solve.
  std::optional<Vec> witness;

  CvopProblem(std::string name, int n, std::vector<Expr> objectives, std::vector<Expr> constraints, Box box,
              OrderingCone cone);

  [[nodiscard]] int q() const { return static_cast<int>(objectives.size()); }
  [[nodiscard]] int m() const { return static_cast<int>(constraints.size()); }

  /// Gamma(x); throws DomainError outside the box.
  [[nodiscard]] Vec objective_values(const Vec& x) const;
  /// g(x); throws DomainError outside the box.
  [[nodiscard]] Vec constraint_values(const Vec& x) const;
  [[nodiscard]] bool feasible(const Vec& x, double tol) const;
  /// Whether every objective and constraint is differentiable.
  [[nodiscard]] bool smooth() const;

 private:
  void check_domain(const Vec& x) const;
};

/// h_i = d_i' g for the columns d_i of `dual_generators` (m x l). Throws
/// ConvexityError when a combination is not convex.
std::vector<Expr> reduce_D_cone(const std::vector<Expr>& g, const Mat& dual_generators);

/// Matrix rank with a relative tolerance.
int numerical_rank(const Mat& a, double tol = 1e-10);

}  // namespace benson
