#pragma once

// Outer approximation algorithms for the upper image (primal) and for the
// lower image of the geometric dual (dual).

#include "benson/duality.hpp"
#include "benson/errors.hpp"
#include "benson/polyhedron.hpp"
#include "benson/problem.hpp"
#include "benson/scalar_solver.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace benson {

enum class Algorithm { Primal, Dual };
enum class BreakMode { Break, NoBreak };
enum class Granularity { Fine, Alternative };

const char* to_string(Algorithm a);
const char* to_string(BreakMode b);
const char* to_string(Granularity g);

/// Snapshot handed to RunConfig::observer once per iteration, after the
/// vertices were visited and before the cuts are applied.
struct IterationInfo {
  int iteration = 0;
  const HRep* outer = nullptr;        // current outer approximation
  const VRep* vertices = nullptr;     // its generators
  std::vector<HalfSpace> cuts;        // cuts made in this iteration
  std::vector<Vec> cut_normals_w;     // primal: w^v of each cut
  double max_gap = 0.0;               // max z^v (primal) or t_q - y^w (dual) seen
};

struct RunConfig {
  double epsilon = 0.05;
  Algorithm algorithm = Algorithm::Primal;
  BreakMode break_mode = BreakMode::Break;
  Granularity granularity = Granularity::Fine;
  int max_iterations = 500;
  /// Skip re-solving vertices that were already accepted.
  bool cache = true;
  /// Worker threads for the no-break variant.
  int threads = 1;
  /// Points whose images agree within this (relative) distance are merged.
  double point_merge_tol = 1e-6;
  SolverOptions solver;
  GeometryTolerances geometry;
  std::function<void(const IterationInfo&)> observer;
};

enum class PointSource { Init, Cut, Accept };

const char* to_string(PointSource s);

struct PrimalPoint {
  Vec x;
  Vec y;  // Gamma(x)
  PointSource source = PointSource::Init;
  double gap = 0.0;  // z^v or t_q - y^w at the solve that produced x
};

struct DualPoint {
  Vec t;
  Vec d;  // D*(t)
};

struct RunStats {
  int num_scalar_solves = 0;
  int num_cached = 0;
  int num_vertex_enumerations = 0;
  int iterations = 0;
  int card_X = 0;
  int card_T = 0;
  int merged_primal = 0;   // duplicates dropped from X
  int merged_dual = 0;     // duplicates dropped from T
  int merged_vertices = 0;  // degenerate generators merged by the enumeration
  int not_attained = 0;     // scalar solves whose infimum is only approached
  double wall_time = 0.0;
  double achieved_epsilon = 0.0;
  std::vector<double> max_gap_per_iteration;
};

struct EpsilonSolution {
  explicit EpsilonSolution(int q);

  Algorithm algorithm = Algorithm::Primal;
  BreakMode break_mode = BreakMode::Break;
  Granularity granularity = Granularity::Fine;
  double epsilon = 0.0;
  bool complete = false;

  Vec c;
  Mat T;
  Mat cone_generators;  // Y

  std::vector<PrimalPoint> primal_points;
  std::vector<DualPoint> dual_points;
  Polyhedron inner_primal;
  Polyhedron outer_primal;
  Polyhedron inner_dual;
  Polyhedron outer_dual;
  RunStats stats;

  [[nodiscard]] std::vector<Vec> images() const;
  [[nodiscard]] std::vector<Vec> dual_images() const;
};

/// Raised when max_iterations is reached; carries the partial solution.
class MaxIterationsError : public Error {
 public:
  MaxIterationsError(const std::string& what, std::shared_ptr<EpsilonSolution> partial)
      : Error("MaxIterationsError", what), partial_(std::move(partial)) {}
  [[nodiscard]] const EpsilonSolution& partial() const { return *partial_; }

 private:
  std::shared_ptr<EpsilonSolution> partial_;
};

struct PrimalInit {
  Polyhedron outer;
  std::vector<PrimalPoint> points;
  std::vector<DualPoint> dual_points;
  int solves = 0;
  int not_attained = 0;
};

struct DualInit {
  Polyhedron outer;
  PrimalPoint point;
  DualPoint dual_point;
  Vec eta;
  HalfSpace hyperplane;
};

PrimalInit initialize_primal(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg = {});
DualInit initialize_dual(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg = {});

EpsilonSolution run_primal(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg);
EpsilonSolution run_dual(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg);
/// Dispatches on cfg.algorithm.
EpsilonSolution run(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg);

/// Builds the four approximations from the point sets of `sol`.
void build_approximations(EpsilonSolution& sol, const DualFrame& frame, const OrderingCone& cone,
                          const GeometryTolerances& tol = {});

}  // namespace benson
