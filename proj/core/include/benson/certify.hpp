#pragma once

// A posteriori checks of an epsilon-solution.

#include "benson/duality.hpp"
#include "benson/engine.hpp"
#include "benson/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace benson {

struct CertificationCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // worst slack; negative means violated
  std::string detail;
};

struct CertificationReport {
  double epsilon = 0.0;  // level at which (a) and (c) were evaluated
  std::optional<double> achieved_epsilon;
  std::vector<CertificationCheck> checks;

  [[nodiscard]] bool all_pass() const;
  [[nodiscard]] const CertificationCheck* find(const std::string& name) const;
};

struct CertifyOptions {
  double tol = 1e-6;
  int samples = 200;
  std::uint64_t seed = 1;
  /// Re-solve scalar problems at the outer vertices (check e). Needs the
  /// problem; skipped when false.
  bool resolve = true;
  SolverOptions solver;
};

/// Checks
///  (a) outer_primal vertices v satisfy v + eps c in inner_primal,
///  (b) every Gamma(x), x in X, lies in outer_primal,
///  (c) outer_dual vertices t satisfy t - eps e_q in inner_dual, and every
///      D*(t), t in T, lies in outer_dual,
///  (d) no sampled feasible point dominates a point of X through int C,
///  (e) the achieved epsilon recomputed by fresh scalar solves.
/// Partial solutions are checked at their achieved epsilon.
CertificationReport certify(const EpsilonSolution& sol, const CvopProblem& prob, const DualFrame& frame,
                            double epsilon, const CertifyOptions& opts = {});

/// Checks (a) to (c) only, from the stored polyhedra and point sets.
CertificationReport certify_geometry(const EpsilonSolution& sol, double epsilon, double tol = 1e-6);

}  // namespace benson
