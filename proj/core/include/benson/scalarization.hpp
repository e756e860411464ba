#pragma once

// Scalar subproblems of the vector problem:
//   P1(w): min w'Gamma(x)  s.t. g(x) <= 0, x in box
//   P2(v): min z           s.t. g(x) <= 0, Z'(Gamma(x) - z c - v) <= 0

#include "benson/problem.hpp"
#include "benson/scalar_solver.hpp"

namespace benson {

/// Throws ConeMembershipError when w is zero or not in C+ (Y'w < -tol).
ScalarProgram build_P1(const CvopProblem& prob, const Vec& w, double tol = 1e-9);

P2Program build_P2(const CvopProblem& prob, const Vec& v);

/// inf over the box of w'Gamma(x) + u'g(x), the dual function of P1(w).
/// Returns -infinity when unbounded below.
double build_D1_value(const CvopProblem& prob, const Vec& w, const Vec& u, const SolverOptions& opts = {});

/// Runs a Phase-I solve and stores a strictly feasible point in
/// prob.witness. Throws SolverFailure when none is found.
void attach_witness(CvopProblem& prob, const SolverOptions& opts = {});

}  // namespace benson
