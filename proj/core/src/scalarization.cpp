#include "benson/scalarization.hpp"

#include "benson/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace benson {

namespace {

// Lawson-Hanson: min |Z mu - w| subject to mu >= 0.
Vec nonnegative_coordinates(const Mat& Z, const Vec& w) {
  const Eigen::Index J = Z.cols();
  Vec mu = Vec::Zero(J);
  std::vector<bool> active(static_cast<std::size_t>(J), false);
  const double tol = 1e-12 * (1.0 + w.lpNorm<Eigen::Infinity>());
  for (int outer = 0; outer < 3 * static_cast<int>(J) + 3; ++outer) {
    const Vec grad = Z.transpose() * (w - Z * mu);
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (!active[static_cast<std::size_t>(j)] && grad(j) > tol && (best < 0 || grad(j) > grad(best))) best = j;
    }
    if (best < 0) break;
    active[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < static_cast<int>(J) + 1; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < J; ++j) {
        if (active[static_cast<std::size_t>(j)]) idx.push_back(j);
      }
      Mat Zp(Z.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) Zp.col(static_cast<Eigen::Index>(k)) = Z.col(idx[k]);
      const Vec sub = Zp.colPivHouseholderQr().solve(w);
      if (sub.minCoeff() > 0.0) {
        mu.setZero();
        for (std::size_t k = 0; k < idx.size(); ++k) mu(idx[k]) = sub(static_cast<Eigen::Index>(k));
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double s = sub(static_cast<Eigen::Index>(k));
        if (s <= 0.0) alpha = std::min(alpha, mu(idx[k]) / (mu(idx[k]) - s));
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        mu(idx[k]) += alpha * (sub(static_cast<Eigen::Index>(k)) - mu(idx[k]));
        if (mu(idx[k]) <= tol) {
          mu(idx[k]) = 0.0;
          active[static_cast<std::size_t>(idx[k])] = false;
        }
      }
    }
  }
  return mu;
}

}  // namespace

ScalarProgram build_P1(const CvopProblem& prob, const Vec& w, double tol) {
  if (w.size() != prob.q()) throw ConeMembershipError("weight has the wrong dimension");
  if (w.lpNorm<Eigen::Infinity>() <= tol) throw ConeMembershipError("weight vector is zero");
  if (!prob.cone.dual_contains(w, tol)) {
    std::ostringstream os;
    os << "weight is not in the dual cone: min Y'w = " << (prob.cone.generators().transpose() * w).minCoeff();
    throw ConeMembershipError(os.str());
  }
  ScalarProgram p;
  p.num_vars = prob.n;
  p.objective = weighted_sum(w, prob.objectives);
  if (!p.objective.is_convex()) {
    // w sits on the boundary of C+ up to rounding; rebuild it from the
    // generators so that the objective is a nonnegative combination of
    // C-convex scalarizations.
    const Mat& Z = prob.cone.dual_generators();
    const Vec mu = nonnegative_coordinates(Z, w);
    std::vector<Expr> parts;
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
      if (mu(j) > 0.0) parts.push_back(Expr::scaled(mu(j), weighted_sum(Z.col(j), prob.objectives)));
    }
    p.objective = Expr::sum(parts);
  }
  p.constraints = prob.constraints;
  p.box = prob.box;
  p.start = prob.witness;
  return p;
}

P2Program build_P2(const CvopProblem& prob, const Vec& v) {
  const int n = prob.n;
  const Mat& Z = prob.cone.dual_generators();
  const Vec& c = prob.cone.interior();
  const Expr z = Expr::variable(n);
  P2Program out;
  out.num_x = n;
  out.num_g = prob.m();
  out.dual_generators = Z;
  out.c = c;
  out.v = v;
  ScalarProgram& p = out.program;
  p.num_vars = n + 1;
  p.objective = z;
  p.constraints = prob.constraints;
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const Vec zj = Z.col(j);
    p.constraints.push_back(Expr::sum({weighted_sum(zj, prob.objectives), Expr::scaled(-zj.dot(c), z),
                                       Expr::constant(-zj.dot(v))}));
  }
  p.box = Box::unbounded(n + 1);
  p.box.lower.head(n) = prob.box.lower;
  p.box.upper.head(n) = prob.box.upper;
  if (prob.witness) {
    // (witness, z0) is strictly feasible once z0 exceeds every cone row.
    Vec s(n + 1);
    s.head(n) = *prob.witness;
    const Vec y = prob.objective_values(*prob.witness);
    s(n) = (Z.transpose() * (y - v)).maxCoeff() + 1.0;
    p.start = s;
  }
  return out;
}

double build_D1_value(const CvopProblem& prob, const Vec& w, const Vec& u, const SolverOptions& opts) {
  ScalarProgram p;
  p.num_vars = prob.n;
  std::vector<Expr> terms{weighted_sum(w, prob.objectives)};
  if (u.size() > 0) terms.push_back(weighted_sum(u, prob.constraints));
  p.objective = Expr::sum(std::move(terms));
  p.box = prob.box;
  p.start = prob.witness;
  const ScalarSolution s = solve(p, opts);
  if (s.status == SolveStatus::Unbounded) return -std::numeric_limits<double>::infinity();
  return s.value;
}

void attach_witness(CvopProblem& prob, const SolverOptions& opts) {
  const PhaseOneResult r = phase_one(prob.n, prob.constraints, prob.box, prob.witness, opts);
  if (r.status != SolveStatus::Optimal) {
    throw SolverFailure(std::string("no strictly feasible point: ") + to_string(r.status) + ": " + r.message);
  }
  prob.witness = r.x;
}

}  // namespace benson
