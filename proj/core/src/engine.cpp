#include "benson/engine.hpp"

#include "benson/scalarization.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

namespace benson {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool close(const Vec& a, const Vec& b, double tol) {
  const double scale = 1.0 + std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
  return (a - b).lpNorm<Eigen::Infinity>() <= tol * scale;
}

std::string fmt_vec(const Vec& v) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ")";
  return os.str();
}

// Accepted vertices with the gap measured when they were accepted.
class VertexCache {
 public:
  explicit VertexCache(double tol) : tol_(tol) {}

  [[nodiscard]] const double* find(const Vec& v) const {
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      if (close(keys_[i], v, tol_)) return &gaps_[i];
    }
    return nullptr;
  }
  void insert(const Vec& v, double gap) {
    keys_.push_back(v);
    gaps_.push_back(gap);
  }

 private:
  double tol_;
  std::vector<Vec> keys_;
  std::vector<double> gaps_;
};

bool add_primal(std::vector<PrimalPoint>& pts, PrimalPoint p, double tol, RunStats& st) {
  for (const auto& q : pts) {
    if (close(q.y, p.y, tol)) {
      ++st.merged_primal;
      return false;
    }
  }
  pts.push_back(std::move(p));
  return true;
}

bool add_dual(std::vector<DualPoint>& pts, DualPoint p, double tol, RunStats& st) {
  for (const auto& q : pts) {
    if (close(q.d, p.d, tol)) {
      ++st.merged_dual;
      return false;
    }
  }
  pts.push_back(std::move(p));
  return true;
}

void validate_cut(const HalfSpace& h, const std::vector<Vec>& inner, double tol_feas, const char* what) {
  const double tol = 10.0 * tol_feas * (1.0 + std::abs(h.offset));
  for (const auto& y : inner) {
    const double s = h.slack(y);
    if (s < -tol) {
      std::ostringstream os;
      os << what << " cut violates the inner point " << fmt_vec(y) << " by " << -s;
      throw CutValidationError(os.str());
    }
  }
}

bool usable(SolveStatus s) { return s == SolveStatus::Optimal || s == SolveStatus::NotAttained; }

P2Solution solve_p2(const CvopProblem& prob, const Vec& v, const SolverOptions& opts) {
  P2Solution s = solve_with_duals_P2(build_P2(prob, v), opts);
  if (!usable(s.raw.status)) {
    throw SolverFailure("P2(v) at v = " + fmt_vec(v) + " failed: " + to_string(s.raw.status) + ": " + s.raw.message);
  }
  return s;
}

ScalarSolution solve_p1_dual(const CvopProblem& prob, const Vec& w, const SolverOptions& opts) {
  ScalarSolution s = solve(build_P1(prob, w), opts);
  if (s.status == SolveStatus::Unbounded || s.status == SolveStatus::NotAttained) {
    throw DualUnbounded("P1(w) has no optimal solution for w = " + fmt_vec(w) + " (" + to_string(s.status) +
                        "); the dual algorithm is not applicable to this problem");
  }
  if (s.status != SolveStatus::Optimal) {
    throw SolverFailure("P1(w) at w = " + fmt_vec(w) + " failed: " + to_string(s.status) + ": " + s.message);
  }
  return s;
}

void finish(EpsilonSolution& sol, const DualFrame& frame, const CvopProblem& prob, const RunConfig& cfg,
            Clock::time_point t0) {
  build_approximations(sol, frame, prob.cone, cfg.geometry);
  sol.stats.card_X = static_cast<int>(sol.primal_points.size());
  sol.stats.card_T = static_cast<int>(sol.dual_points.size());
  sol.stats.wall_time = seconds_since(t0);
}

EpsilonSolution make_solution(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg) {
  EpsilonSolution sol(prob.q());
  sol.algorithm = cfg.algorithm;
  sol.break_mode = cfg.break_mode;
  sol.granularity = cfg.granularity;
  sol.epsilon = cfg.epsilon;
  sol.c = prob.cone.interior();
  sol.T = frame.T();
  sol.cone_generators = prob.cone.generators();
  return sol;
}

[[noreturn]] void throw_partial(EpsilonSolution sol, const DualFrame& frame, const CvopProblem& prob,
                                const RunConfig& cfg, Clock::time_point t0) {
  finish(sol, frame, prob, cfg, t0);
  const double eps_k = sol.stats.achieved_epsilon;
  auto partial = std::make_shared<EpsilonSolution>(std::move(sol));
  std::ostringstream os;
  os << "iteration limit " << cfg.max_iterations << " reached; partial solution with epsilon_k = " << eps_k;
  throw MaxIterationsError(os.str(), std::move(partial));
}

void check_config(const RunConfig& cfg) {
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) throw std::invalid_argument("epsilon must be positive");
  if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
}

// Solves P2 at each vertex in `todo`, concurrently when asked to.
std::vector<P2Solution> solve_batch(const CvopProblem& prob, const std::vector<Vec>& todo, const RunConfig& cfg) {
  std::vector<P2Solution> out(todo.size());
  if (cfg.threads <= 1 || todo.size() < 2) {
    for (std::size_t i = 0; i < todo.size(); ++i) out[i] = solve_p2(prob, todo[i], cfg.solver);
    return out;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), todo.size());
  std::vector<std::future<void>> fs;
  for (std::size_t w = 0; w < workers; ++w) {
    fs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < todo.size(); i += workers) out[i] = solve_p2(prob, todo[i], cfg.solver);
    }));
  }
  for (auto& f : fs) f.get();
  return out;
}

}  // namespace

const char* to_string(Algorithm a) { return a == Algorithm::Primal ? "primal" : "dual"; }
const char* to_string(BreakMode b) { return b == BreakMode::Break ? "break" : "nobreak"; }
const char* to_string(Granularity g) { return g == Granularity::Fine ? "fine" : "alt"; }

const char* to_string(PointSource s) {
  switch (s) {
    case PointSource::Init: return "init";
    case PointSource::Cut: return "cut";
    case PointSource::Accept: return "accept";
  }
  return "unknown";
}

EpsilonSolution::EpsilonSolution(int q) : inner_primal(q), outer_primal(q), inner_dual(q), outer_dual(q) {}

std::vector<Vec> EpsilonSolution::images() const {
  std::vector<Vec> out;
  for (const auto& p : primal_points) out.push_back(p.y);
  return out;
}

std::vector<Vec> EpsilonSolution::dual_images() const {
  std::vector<Vec> out;
  for (const auto& p : dual_points) out.push_back(p.d);
  return out;
}

void build_approximations(EpsilonSolution& sol, const DualFrame& frame, const OrderingCone& cone,
                          const GeometryTolerances& tol) {
  const int q = frame.dim();
  const std::vector<Vec> images = sol.images();
  const std::vector<Vec> dimages = sol.dual_images();

  VRep ip;
  ip.vertices = images;
  for (Eigen::Index j = 0; j < cone.generators().cols(); ++j) ip.rays.push_back(cone.generators().col(j).normalized());
  sol.inner_primal = Polyhedron::from_vrep(ip, q, tol);
  sol.inner_primal.vrep();

  sol.outer_primal = Polyhedron(q, primal_outer_from_dual(frame, dimages, tol.zero), tol);
  sol.outer_primal.reduce();

  VRep id;
  id.vertices = dimages;
  id.rays.push_back(-Vec::Unit(q, q - 1));
  sol.inner_dual = Polyhedron::from_vrep(id, q, tol);
  sol.inner_dual.vrep();

  sol.outer_dual = Polyhedron(q, dual_outer_from_primal(frame, cone, images), tol);
  sol.outer_dual.reduce();
}

PrimalInit initialize_primal(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg) {
  const int q = prob.q();
  const Mat& Z = prob.cone.dual_generators();
  PrimalInit init{Polyhedron(q, cfg.geometry), {}, {}, 0, 0};
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const Vec z = Z.col(j);
    const ScalarSolution s = solve(build_P1(prob, z), cfg.solver);
    ++init.solves;
    if (s.status == SolveStatus::Unbounded) {
      throw InitUnboundedError("P1(z^" + std::to_string(j + 1) + ") is unbounded: the problem is not bounded");
    }
    if (s.status == SolveStatus::NotAttained) {
      ++init.not_attained;
      spdlog::warn("P1(z^{}) infimum is not attained; using an approximate minimizer", j + 1);
    } else if (s.status != SolveStatus::Optimal) {
      throw SolverFailure("P1(z^" + std::to_string(j + 1) + ") failed: " + to_string(s.status) + ": " + s.message);
    }
    const Vec y = prob.objective_values(s.x);
    const double offset = z.dot(y);
    init.outer.add_halfspace(make_halfspace(z, offset, cfg.geometry.zero));
    init.points.push_back({s.x, y, PointSource::Init, 0.0});
    Vec t = frame.t_of_w(z);
    Vec d = t;
    d(q - 1) = offset;
    init.dual_points.push_back({t, d});
  }
  init.outer.vrep();
  return init;
}

DualInit initialize_dual(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg) {
  const int q = prob.q();
  const Mat& Z = prob.cone.dual_generators();
  const Vec eta = Z.rowwise().mean();
  const ScalarSolution s = solve(build_P1(prob, eta), cfg.solver);
  if (s.status == SolveStatus::Unbounded || s.status == SolveStatus::NotAttained) {
    throw InitUnboundedError("P1(eta) has no optimal solution (" + std::string(to_string(s.status)) +
                             "); the initial dual hyperplane cannot be computed");
  }
  if (s.status != SolveStatus::Optimal) {
    throw SolverFailure(std::string("P1(eta) failed: ") + to_string(s.status) + ": " + s.message);
  }
  const Vec y = prob.objective_values(s.x);
  const HalfSpace h = frame.dual_halfspace(y);
  if (std::abs(h.normal(q - 1)) <= cfg.geometry.zero) {
    throw VerticalInitError("initial dual hyperplane is numerically vertical");
  }
  HRep hr;
  hr.halfspaces = frame.feasibility_halfspaces(prob.cone);
  hr.halfspaces.push_back(h);
  Vec t = frame.t_of_w(eta);
  Vec d = t;
  d(q - 1) = eta.dot(y);
  DualInit init{Polyhedron(q, hr, cfg.geometry), {s.x, y, PointSource::Init, 0.0}, {t, d}, eta, h};
  init.outer.vrep();
  return init;
}

EpsilonSolution run_primal(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg) {
  check_config(cfg);
  const auto t0 = Clock::now();
  const int q = prob.q();
  const bool fine = cfg.granularity == Granularity::Fine;
  const bool brk = cfg.break_mode == BreakMode::Break;
  EpsilonSolution sol = make_solution(prob, frame, cfg);
  sol.algorithm = Algorithm::Primal;
  RunStats& st = sol.stats;

  PrimalInit init = initialize_primal(prob, frame, cfg);
  st.num_scalar_solves = init.solves;
  st.not_attained = init.not_attained;
  Polyhedron P = std::move(init.outer);
  std::vector<Vec> seen;  // every image found, for cut validation
  for (auto& p : init.points) {
    seen.push_back(p.y);
    if (fine) add_primal(sol.primal_points, p, cfg.point_merge_tol, st);
  }
  for (auto& d : init.dual_points) add_dual(sol.dual_points, d, cfg.point_merge_tol, st);

  VertexCache cache(cfg.geometry.dup);
  for (int k = 0;; ++k) {
    if (k >= cfg.max_iterations) {
      st.merged_vertices = static_cast<int>(P.num_merged());
      throw_partial(std::move(sol), frame, prob, cfg, t0);
    }
    const VRep V = P.vrep();
    ++st.num_vertex_enumerations;
    st.iterations = k + 1;

    std::vector<Vec> todo;
    std::vector<const double*> cached(V.vertices.size(), nullptr);
    for (std::size_t i = 0; i < V.vertices.size(); ++i) {
      if (cfg.cache) cached[i] = cache.find(V.vertices[i]);
    }
    std::vector<P2Solution> batch;
    if (!brk) {
      for (std::size_t i = 0; i < V.vertices.size(); ++i) {
        if (!cached[i]) todo.push_back(V.vertices[i]);
      }
      batch = solve_batch(prob, todo, cfg);
    }

    IterationInfo info;
    info.iteration = k;
    info.outer = &P.hrep();
    info.vertices = &V;
    double max_gap = 0.0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < V.vertices.size(); ++i) {
      const Vec& v = V.vertices[i];
      if (cached[i]) {
        ++st.num_cached;
        max_gap = std::max(max_gap, *cached[i]);
        continue;
      }
      const P2Solution s = brk ? solve_p2(prob, v, cfg.solver) : std::move(batch[next++]);
      ++st.num_scalar_solves;
      if (s.raw.status == SolveStatus::NotAttained) ++st.not_attained;
      const double z = s.z;
      max_gap = std::max(max_gap, z);
      const bool cut = z > cfg.epsilon;
      const Vec y = prob.objective_values(s.x);
      seen.push_back(y);
      Vec t = frame.t_of_w(s.w);
      Vec d = t;
      d(q - 1) = s.w.dot(v) + z;
      PrimalPoint pp{s.x, y, cut ? PointSource::Cut : PointSource::Accept, z};
      if (fine) {
        add_primal(sol.primal_points, pp, cfg.point_merge_tol, st);
        add_dual(sol.dual_points, {t, d}, cfg.point_merge_tol, st);
      } else if (cut) {
        add_dual(sol.dual_points, {t, d}, cfg.point_merge_tol, st);
      } else {
        add_primal(sol.primal_points, pp, cfg.point_merge_tol, st);
      }
      spdlog::debug("primal it {} v={} z={:.6g}{}", k, fmt_vec(v), z, cut ? " cut" : "");
      if (cut) {
        const HalfSpace h = make_halfspace(s.w, d(q - 1), cfg.geometry.zero);
        validate_cut(h, seen, cfg.geometry.feas, "primal");
        info.cuts.push_back(h);
        info.cut_normals_w.push_back(s.w);
        if (brk) break;
      } else if (cfg.cache) {
        cache.insert(v, z);
      }
    }
    info.max_gap = max_gap;
    st.max_gap_per_iteration.push_back(max_gap);
    st.achieved_epsilon = max_gap;
    if (cfg.observer) cfg.observer(info);
    if (info.cuts.empty()) break;
    for (const auto& h : info.cuts) P.add_halfspace(h);
  }
  st.merged_vertices = static_cast<int>(P.num_merged());
  sol.complete = true;
  finish(sol, frame, prob, cfg, t0);
  spdlog::info("primal run: {} solves, {} enumerations, |X|={}, |T|={}", st.num_scalar_solves,
               st.num_vertex_enumerations, st.card_X, st.card_T);
  return sol;
}

EpsilonSolution run_dual(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg) {
  check_config(cfg);
  const auto t0 = Clock::now();
  const int q = prob.q();
  const bool fine = cfg.granularity == Granularity::Fine;
  const bool brk = cfg.break_mode == BreakMode::Break;
  EpsilonSolution sol = make_solution(prob, frame, cfg);
  sol.algorithm = Algorithm::Dual;
  RunStats& st = sol.stats;

  DualInit init = initialize_dual(prob, frame, cfg);
  st.num_scalar_solves = 1;
  Polyhedron D = std::move(init.outer);
  add_primal(sol.primal_points, init.point, cfg.point_merge_tol, st);
  if (fine) add_dual(sol.dual_points, init.dual_point, cfg.point_merge_tol, st);
  std::vector<Vec> seen{init.dual_point.d};

  const double bd_tol = 1e-9;
  VertexCache cache(cfg.geometry.dup);
  for (int k = 0;; ++k) {
    if (k >= cfg.max_iterations) {
      st.merged_vertices = static_cast<int>(D.num_merged());
      throw_partial(std::move(sol), frame, prob, cfg, t0);
    }
    const VRep V = D.vrep();
    ++st.num_vertex_enumerations;
    st.iterations = k + 1;

    IterationInfo info;
    info.iteration = k;
    info.outer = &D.hrep();
    info.vertices = &V;
    double max_gap = 0.0;
    for (const auto& t : V.vertices) {
      if (cfg.cache) {
        if (const double* g = cache.find(t)) {
          ++st.num_cached;
          max_gap = std::max(max_gap, *g);
          continue;
        }
      }
      const Vec w = frame.w_of_t(t);
      const ScalarSolution s = solve_p1_dual(prob, w, cfg.solver);
      ++st.num_scalar_solves;
      const double yw = s.value;
      const double gap = t(q - 1) - yw;
      max_gap = std::max(max_gap, gap);
      const bool cut = gap > cfg.epsilon;
      const Vec y = prob.objective_values(s.x);
      Vec d = t;
      d(q - 1) = yw;
      seen.push_back(d);
      PrimalPoint pp{s.x, y, cut ? PointSource::Cut : PointSource::Accept, gap};
      if (fine) {
        add_primal(sol.primal_points, pp, cfg.point_merge_tol, st);
        if (!prob.cone.on_dual_boundary(w, bd_tol) || !cut) add_dual(sol.dual_points, {t, d}, cfg.point_merge_tol, st);
      } else if (cut) {
        add_primal(sol.primal_points, pp, cfg.point_merge_tol, st);
      } else {
        add_dual(sol.dual_points, {t, d}, cfg.point_merge_tol, st);
      }
      spdlog::debug("dual it {} t={} gap={:.6g}{}", k, fmt_vec(t), gap, cut ? " cut" : "");
      if (cut) {
        const HalfSpace h = frame.dual_halfspace(y);
        if (std::abs(h.normal(q - 1)) <= cfg.geometry.zero) {
          throw VerticalCutError("dual cut at t = " + fmt_vec(t) + " is numerically vertical");
        }
        validate_cut(h, seen, cfg.geometry.feas, "dual");
        info.cuts.push_back(h);
        if (brk) break;
      } else if (cfg.cache) {
        cache.insert(t, gap);
      }
    }
    info.max_gap = max_gap;
    st.max_gap_per_iteration.push_back(max_gap);
    st.achieved_epsilon = max_gap;
    if (cfg.observer) cfg.observer(info);
    if (info.cuts.empty()) break;
    for (const auto& h : info.cuts) D.add_halfspace(h);
  }
  st.merged_vertices = static_cast<int>(D.num_merged());
  sol.complete = true;
  finish(sol, frame, prob, cfg, t0);
  spdlog::info("dual run: {} solves, {} enumerations, |X|={}, |T|={}", st.num_scalar_solves,
               st.num_vertex_enumerations, st.card_X, st.card_T);
  return sol;
}

EpsilonSolution run(const CvopProblem& prob, const DualFrame& frame, const RunConfig& cfg) {
  return cfg.algorithm == Algorithm::Primal ? run_primal(prob, frame, cfg) : run_dual(prob, frame, cfg);
}

}  // namespace benson
