#pragma once

// Log-barrier interior point method for small convex programs
//   min f(x)  s.t.  c_i(x) <= 0,  lower <= x <= upper.
// Nonsmooth abs/max nodes are lifted to auxiliary variables with smooth
// epigraph constraints before the barrier method runs, so multipliers are
// exact KKT multipliers in both cases.

#include "benson/expr.hpp"
#include "benson/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace benson {

struct ScalarProgram {
  int num_vars = 0;
  Expr objective;
  std::vector<Expr> constraints;  // each <= 0
  Box box;                        // empty means unbounded
  std::optional<Vec> start;       // any point; need not be feasible

  [[nodiscard]] bool smooth() const;
};

enum class SolveStatus { Optimal, NotAttained, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

struct ScalarSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vec x;
  double value = 0.0;
  Vec multipliers;  // one per constraint, >= 0
  Vec lower_multipliers;
  Vec upper_multipliers;
  double kkt_residual = 0.0;  // stationarity, infinity norm
  double gap = 0.0;           // barrier duality gap bound
  int newton_steps = 0;
  std::string message;

  [[nodiscard]] bool optimal() const { return status == SolveStatus::Optimal; }
};

struct SolverOptions {
  double tol_opt = 1e-8;
  double tol_kkt = 1e-6;
  double tol_feas = 1e-8;
  double huge = 1e9;             // |x| or -f beyond this triggers the unboundedness test
  double barrier_growth = 10.0;  // t <- growth * t
  double proximal = 1.0;         // weight of (1/2)|x - x0|^2 in every centering problem
  int max_newton = 60;           // per centering step
  int max_outer = 40;
};

/// Solves the program. Never throws for solver outcomes; inspect `status`.
/// Throws ConvexityError when the program is not convex.
ScalarSolution solve(const ScalarProgram& prog, const SolverOptions& opts = {});

/// A P2(v) instance: variables (x, z), objective z, constraints g(x) <= 0
/// (the first `num_g` rows) followed by the cone rows
/// z_j'(Gamma(x) - z c - v) <= 0.
struct P2Program {
  ScalarProgram program;
  int num_x = 0;
  int num_g = 0;
  Mat dual_generators;  // Z, columns normalized to c'z_j = 1
  Vec c;
  Vec v;
};

struct P2Solution {
  ScalarSolution raw;
  Vec x;
  double z = 0.0;
  Vec u;  // multipliers of g
  Vec w;  // Z times the cone-row multipliers, c'w = 1

  [[nodiscard]] bool optimal() const { return raw.optimal(); }
};

/// Solves a P2 program and splits the multipliers. Throws WNormalizationError
/// when c'w deviates from 1 by more than 10 tol_kkt.
P2Solution solve_with_duals_P2(const P2Program& p2, const SolverOptions& opts = {});

/// A strictly feasible point of g(x) <= 0 within the box, found by a Phase-I
/// solve, or the failing status.
struct PhaseOneResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vec x;
  double max_violation = 0.0;  // max_i g_i(x)
  std::string message;
};

PhaseOneResult phase_one(int num_vars, const std::vector<Expr>& constraints, const Box& box,
                         const std::optional<Vec>& start, const SolverOptions& opts = {});

}  // namespace benson
