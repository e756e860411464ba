#include "benson/duality.hpp"

#include "benson/errors.hpp"
#include "benson/scalarization.hpp"

#include <cmath>
#include <sstream>

namespace benson {

DualFrame::DualFrame(const Vec& c, const Mat& completion) : c_(c) {
  const auto q = c.size();
  if (completion.rows() != q || completion.cols() != q - 1) {
    throw ConeError("dual frame completion must be a q x (q-1) matrix");
  }
  t_.resize(q, q);
  t_.leftCols(q - 1) = completion;
  t_.col(q - 1) = c;
  Eigen::FullPivLU<Mat> lu(t_);
  if (!lu.isInvertible() || numerical_rank(t_) < q) {
    throw ConeError("c^1, ..., c^{q-1}, c are not linearly independent");
  }
  t_inv_ = lu.inverse();
}

DualFrame DualFrame::standard(const Vec& c) {
  const auto q = c.size();
  Eigen::Index skip = 0;
  c.cwiseAbs().maxCoeff(&skip);
  Mat comp = Mat::Zero(q, q - 1);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < q; ++i) {
    if (i != skip) comp(i, col++) = 1.0;
  }
  return DualFrame(c, comp);
}

DualFrame DualFrame::for_problem(const CvopProblem& prob) {
  if (prob.c_frame) return DualFrame(prob.cone.interior(), *prob.c_frame);
  return standard(prob.cone.interior());
}

Vec DualFrame::w_of_t(const Vec& t) const {
  Vec s = t;
  s(dim() - 1) = 1.0;
  return t_inv_.transpose() * s;
}

Vec DualFrame::t_of_w(const Vec& w) const { return t_.transpose() * w; }

double DualFrame::phi(const Vec& y, const Vec& y_star) const {
  return w_of_t(y_star).dot(y) - y_star(dim() - 1);
}

HalfSpace DualFrame::dual_halfspace(const Vec& y) const {
  const int q = dim();
  const Vec a = t_inv_ * y;
  Vec normal(q);
  normal.head(q - 1) = a.head(q - 1);
  normal(q - 1) = -1.0;
  return make_halfspace(normal, -a(q - 1));
}

HalfSpace DualFrame::primal_halfspace(const Vec& y_star, double tol_zero) const {
  return make_halfspace(w_of_t(y_star), y_star(dim() - 1), tol_zero);
}

std::vector<HalfSpace> DualFrame::feasibility_halfspaces(const OrderingCone& cone) const {
  const int q = dim();
  std::vector<HalfSpace> out;
  const Mat& Y = cone.generators();
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    const Vec b = t_inv_ * Y.col(j);
    Vec normal = Vec::Zero(q);
    normal.head(q - 1) = b.head(q - 1);
    // A generator parallel to c gives the constant constraint b_q >= 0.
    if (normal.norm() <= 1e-12) continue;
    out.push_back(make_halfspace(normal, -b(q - 1)));
  }
  return out;
}

Vec dual_objective(const DualFrame& frame, const CvopProblem& prob, const Vec& t, const SolverOptions& opts,
                   ScalarSolution* solution) {
  const Vec w = frame.w_of_t(t);
  const ScalarSolution s = solve(build_P1(prob, w), opts);
  if (solution) *solution = s;
  if (s.status == SolveStatus::Unbounded || s.status == SolveStatus::NotAttained) {
    std::ostringstream os;
    os << "P1(w) has no solution for w = (" << w.transpose() << "): " << to_string(s.status);
    throw DualUnbounded(os.str());
  }
  if (s.status != SolveStatus::Optimal) {
    throw SolverFailure(std::string("P1(w) solve failed: ") + to_string(s.status) + ": " + s.message);
  }
  Vec d = t;
  d(frame.dim() - 1) = s.value;
  return d;
}

HRep primal_outer_from_dual(const DualFrame& frame, const std::vector<Vec>& dual_points, double tol_zero) {
  HRep h;
  for (const auto& d : dual_points) h.halfspaces.push_back(frame.primal_halfspace(d, tol_zero));
  return h;
}

HRep dual_outer_from_primal(const DualFrame& frame, const OrderingCone& cone, const std::vector<Vec>& image_points) {
  HRep h;
  h.halfspaces = frame.feasibility_halfspaces(cone);
  for (const auto& y : image_points) h.halfspaces.push_back(frame.dual_halfspace(y));
  return h;
}

}  // namespace benson
