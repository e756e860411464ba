#pragma once

// Geometric duality between the upper image P and the lower image D of the
// dual problem. The frame T = (c^1, ..., c^{q-1}, c) fixes the coupling
//   phi(y, y*) = (y*_1, ..., y*_{q-1}, 1) T^{-1} y - y*_q.

#include "benson/polyhedron.hpp"
#include "benson/problem.hpp"
#include "benson/scalar_solver.hpp"

#include <vector>

namespace benson {

class DualFrame {
 public:
  /// `completion` holds c^1, ..., c^{q-1} as columns. Throws ConeError when
  /// T is singular.
  DualFrame(const Vec& c, const Mat& completion);

  /// Completion by the unit vectors e_i, skipping the index of max |c_i|.
  static DualFrame standard(const Vec& c);
  /// The problem's own completion if it has one, else the standard one.
  static DualFrame for_problem(const CvopProblem& prob);

  [[nodiscard]] int dim() const { return static_cast<int>(c_.size()); }
  [[nodiscard]] const Mat& T() const { return t_; }
  [[nodiscard]] const Mat& T_inv() const { return t_inv_; }
  [[nodiscard]] const Vec& c() const { return c_; }

  /// w(t) = ((t_1, ..., t_{q-1}, 1) T^{-1})'; independent of t_q.
  [[nodiscard]] Vec w_of_t(const Vec& t) const;
  /// T'w, the inverse of w_of_t on {c'w = 1} up to the last coordinate.
  [[nodiscard]] Vec t_of_w(const Vec& w) const;
  [[nodiscard]] double phi(const Vec& y, const Vec& y_star) const;

  /// {y* : phi(y, y*) >= 0}, never vertical.
  [[nodiscard]] HalfSpace dual_halfspace(const Vec& y) const;
  /// {y : phi(y, y*) >= 0}. Throws ZeroNormalError when w(y*) vanishes.
  [[nodiscard]] HalfSpace primal_halfspace(const Vec& y_star, double tol_zero = 1e-12) const;
  /// The vertical halfspaces {y* : w(y*)'y_j >= 0} over the generators of C.
  [[nodiscard]] std::vector<HalfSpace> feasibility_halfspaces(const OrderingCone& cone) const;

 private:
  Vec c_;
  Mat t_;
  Mat t_inv_;
};

/// D*(t) = (t_1, ..., t_{q-1}, inf w(t)'Gamma). Throws DualUnbounded when
/// the infimum is -infinity or not attained. The P1 solution is stored in
/// `solution` when given.
Vec dual_objective(const DualFrame& frame, const CvopProblem& prob, const Vec& t, const SolverOptions& opts = {},
                   ScalarSolution* solution = nullptr);

/// One halfspace {y : w(y*)'y >= y*_q} per dual point.
HRep primal_outer_from_dual(const DualFrame& frame, const std::vector<Vec>& dual_points, double tol_zero = 1e-12);

/// The vertical cone constraints plus one halfspace {y* : phi(y, y*) >= 0}
/// per image point y.
HRep dual_outer_from_primal(const DualFrame& frame, const OrderingCone& cone, const std::vector<Vec>& image_points);

}  // namespace benson
