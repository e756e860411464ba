// Acceptance checks. Prints one PASS/FAIL line per criterion; the exit code
// is nonzero when any selected criterion fails.
//
//   acceptance            all criteria
//   acceptance 3 7        only criteria 3 and 7

#include "benson/certify.hpp"
#include "benson/engine.hpp"
#include "benson/errors.hpp"
#include "benson/io.hpp"
#include "benson/scalar_solver.hpp"

#include "support.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace benson;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

std::vector<Vec> points2(std::initializer_list<std::pair<double, double>> list) {
  std::vector<Vec> out;
  for (const auto& [a, b] : list) {
    Vec v(2);
    v << a, b;
    out.push_back(v);
  }
  return out;
}

// Every expected point has a partner within tol and the counts agree.
bool same_points(const std::vector<Vec>& got, const std::vector<Vec>& want, double tol, std::string& why) {
  if (got.size() != want.size()) {
    why = "expected " + std::to_string(want.size()) + " points, got " + std::to_string(got.size());
    return false;
  }
  std::vector<bool> used(got.size(), false);
  for (const auto& w : want) {
    bool found = false;
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (!used[i] && (got[i] - w).lpNorm<Eigen::Infinity>() <= tol) {
        used[i] = true;
        found = true;
        break;
      }
    }
    if (!found) {
      std::ostringstream os;
      os << "no match for (" << w(0) << ", " << w(1) << ")";
      why = os.str();
      return false;
    }
  }
  return true;
}

std::vector<Vec> xs(const EpsilonSolution& s) {
  std::vector<Vec> out;
  for (const auto& p : s.primal_points) out.push_back(p.x);
  return out;
}

bool within(double got, double want, double rel) { return std::abs(got - want) <= rel * want; }

const CvopProblem& problem(const std::string& file) {
  static std::map<std::string, CvopProblem> cache;
  auto it = cache.find(file);
  if (it == cache.end()) it = cache.emplace(file, load_problem(testing::data_file(file))).first;
  return it->second;
}

RunConfig config(double eps, Algorithm a, BreakMode b = BreakMode::Break, Granularity g = Granularity::Fine) {
  RunConfig cfg;
  cfg.epsilon = eps;
  cfg.algorithm = a;
  cfg.break_mode = b;
  cfg.granularity = g;
  return cfg;
}

// Iterations in which the outer approximation was refined.
int refining_iterations(const CvopProblem& p, RunConfig cfg, EpsilonSolution* out = nullptr) {
  int count = 0;
  cfg.observer = [&](const IterationInfo& it) {
    if (!it.cuts.empty()) ++count;
  };
  EpsilonSolution s = run(p, DualFrame::for_problem(p), cfg);
  if (out) *out = std::move(s);
  return count;
}

const auto kPrimalFine = points2({{0, 1}, {0.0141, 0.8329}, {0.0635, 0.6493}, {0.1564, 0.4631}, {0.2929, 0.2929},
                                  {0.4631, 0.1564}, {0.6493, 0.0635}, {0.8329, 0.0141}, {1, 0}});
const auto kPrimalAlt = points2({{0.0141, 0.8329}, {0.1564, 0.4631}, {0.4631, 0.1564}, {0.8329, 0.0141}});
const auto kDualFine = points2({{0, 1}, {0.0192, 0.8049}, {0.0761, 0.6173}, {0.1685, 0.4445}, {0.2929, 0.2929},
                                {0.4445, 0.1685}, {0.6173, 0.0761}, {0.8049, 0.0192}, {1, 0}});
const auto kDualAlt = points2({{0, 1}, {0.0761, 0.6173}, {0.2929, 0.2929}, {0.6173, 0.0761}, {1, 0}});

constexpr double kPointTol = 5e-4;

Outcome criterion1() {
  Outcome o;
  const CvopProblem& p = problem("example1.json");
  const auto t0 = Clock::now();
  EpsilonSolution s = run(p, DualFrame::for_problem(p), config(0.05, Algorithm::Primal));
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::string why;
  o.require(secs < 60.0, "runtime");
  o.require(same_points(xs(s), kPrimalFine, kPointTol, why), why);
  const std::size_t nv = s.outer_primal.vrep().vertices.size();
  o.require(nv == 8, "outer primal has " + std::to_string(nv) + " vertices");
  o.detail << "time " << secs << " s, |X| " << s.primal_points.size() << ", outer vertices " << nv;
  return o;
}

Outcome criterion2() {
  Outcome o;
  const CvopProblem& p = problem("example1.json");
  const EpsilonSolution s =
      run(p, DualFrame::for_problem(p), config(0.05, Algorithm::Primal, BreakMode::Break, Granularity::Alternative));
  std::string why;
  o.require(same_points(xs(s), kPrimalAlt, kPointTol, why), why);
  o.detail << "|X| " << s.primal_points.size();
  return o;
}

Outcome criterion3() {
  Outcome o;
  const CvopProblem& p = problem("example1.json");
  const DualFrame frame = DualFrame::for_problem(p);
  const DualInit init = initialize_dual(p, frame, config(0.05, Algorithm::Dual));
  // The initial hyperplane n't >= b written as t_2 = (b - n_1 t_1) / n_2 at t_1 = 0 and 1.
  const HalfSpace& h = init.hyperplane;
  const double at0 = h.offset / h.normal(1);
  const double at1 = (h.offset - h.normal(0)) / h.normal(1);
  o.require(std::abs(at0 - 0.2929) <= kPointTol && std::abs(at1 - 0.2929) <= kPointTol, "initial hyperplane");

  EpsilonSolution fine(2);
  const int iters = refining_iterations(p, config(0.05, Algorithm::Dual), &fine);
  o.require(std::abs(iters - 4) <= 1, "iterations " + std::to_string(iters));
  std::string why;
  o.require(same_points(xs(fine), kDualFine, kPointTol, why), "fine: " + why);
  const std::size_t inner = fine.inner_dual.vrep().vertices.size();
  const std::size_t outer = fine.outer_dual.vrep().vertices.size();
  o.require(inner == 9, "inner dual vertices " + std::to_string(inner));
  o.require(outer == 10, "outer dual vertices " + std::to_string(outer));

  const EpsilonSolution alt =
      run(p, frame, config(0.05, Algorithm::Dual, BreakMode::Break, Granularity::Alternative));
  o.require(same_points(xs(alt), kDualAlt, kPointTol, why), "alt: " + why);
  o.detail << "hyperplane t2 = " << at0 << ", iterations " << iters << ", |X| fine " << fine.primal_points.size()
           << " alt " << alt.primal_points.size() << ", dual vertices inner " << inner << " outer " << outer;
  return o;
}

struct TableRow {
  double eps;
  Algorithm alg;
  BreakMode brk;
  int num_opt;
  int card_x;
};

std::string row_name(const TableRow& r) {
  std::ostringstream os;
  os << r.eps << " " << to_string(r.alg) << "/" << to_string(r.brk);
  return os.str();
}

Outcome criterion4() {
  Outcome o;
  const CvopProblem& p = problem("example1.json");
  const std::vector<TableRow> rows{
      {0.01, Algorithm::Primal, BreakMode::Break, 17, 17},  {0.01, Algorithm::Primal, BreakMode::NoBreak, 17, 17},
      {0.01, Algorithm::Dual, BreakMode::Break, 19, 17},    {0.01, Algorithm::Dual, BreakMode::NoBreak, 19, 17},
      {0.001, Algorithm::Primal, BreakMode::Break, 45, 45}, {0.001, Algorithm::Primal, BreakMode::NoBreak, 45, 45},
      {0.001, Algorithm::Dual, BreakMode::Break, 43, 41},   {0.001, Algorithm::Dual, BreakMode::NoBreak, 43, 41}};
  for (const auto& r : rows) {
    const EpsilonSolution s = run(p, DualFrame::for_problem(p), config(r.eps, r.alg, r.brk));
    const bool ok = within(s.stats.num_scalar_solves, r.num_opt, 0.15) && within(s.stats.card_X, r.card_x, 0.15);
    o.require(ok, row_name(r));
    o.detail << " " << row_name(r) << ": " << s.stats.num_scalar_solves << "/" << s.stats.card_X << " (reference "
             << r.num_opt << "/" << r.card_x << ");";
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  const CvopProblem& p = problem("example2.json");
  const DualFrame frame = DualFrame::for_problem(p);
  const std::vector<TableRow> rows{{0.01, Algorithm::Primal, BreakMode::Break, 25, 24},
                                   {0.01, Algorithm::Primal, BreakMode::NoBreak, 25, 24},
                                   {0.01, Algorithm::Dual, BreakMode::Break, 27, 25},
                                   {0.01, Algorithm::Dual, BreakMode::NoBreak, 27, 25}};
  for (const auto& r : rows) {
    const EpsilonSolution s = run(p, frame, config(r.eps, r.alg, r.brk));
    const CertificationReport rep = certify(s, p, frame, r.eps);
    o.require(s.complete && rep.all_pass(), row_name(r) + " certification");
    o.require(within(s.stats.card_X, r.card_x, 0.15), row_name(r) + " |X|");
    o.detail << " " << row_name(r) << ": |X| " << s.stats.card_X << " (reference " << r.card_x << "), certified "
             << (rep.all_pass() ? "yes" : "no") << ";";
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  const CvopProblem& p = problem("example3.json");
  const DualFrame frame = DualFrame::for_problem(p);
  for (const auto& r : {TableRow{0.1, Algorithm::Primal, BreakMode::Break, 107, 107},
                        TableRow{0.1, Algorithm::Primal, BreakMode::NoBreak, 133, 133}}) {
    const EpsilonSolution s = run(p, frame, config(r.eps, r.alg, r.brk));
    const CertificationReport rep = certify(s, p, frame, r.eps);
    o.require(s.complete && rep.all_pass(), row_name(r) + " certification");
    o.require(within(s.stats.num_scalar_solves, r.num_opt, 0.20), row_name(r) + " num_opt");
    o.detail << " " << row_name(r) << ": num_opt " << s.stats.num_scalar_solves << " (reference " << r.num_opt
             << "), certified " << (rep.all_pass() ? "yes" : "no") << ";";
  }
  std::string diagnostic = "none";
  try {
    (void)run(p, frame, config(0.1, Algorithm::Dual));
  } catch (const DualUnbounded& e) {
    diagnostic = e.kind();
  } catch (const InitUnboundedError& e) {
    diagnostic = e.kind();
  } catch (const VerticalInitError& e) {
    diagnostic = e.kind();
  } catch (const std::exception& e) {
    diagnostic = std::string("unexpected: ") + e.what();
  }
  o.require(diagnostic == "DualUnbounded" || diagnostic == "InitUnboundedError" || diagnostic == "VerticalInitError",
            "dual diagnostic");
  o.detail << " dual: " << diagnostic;
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int runs = 0;
  int cert_fail = 0;
  int nest_fail = 0;
  int cut_fail = 0;
  int agree_fail = 0;
  double worst_agree = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int q = 2 + k % 2;
    const int n = 2 + k % 3;
    const CvopProblem p = testing::random_quadratic_cvop(rng, q, n);
    const DualFrame frame = DualFrame::for_problem(p);
    const std::vector<Vec> samples = testing::sample_feasible(p, rng, 200);
    std::vector<Vec> sample_images;
    for (const auto& x : samples) sample_images.push_back(p.objective_values(x));
    for (double eps : {0.1, 0.01}) {
      std::map<Algorithm, EpsilonSolution> sols;
      for (Algorithm alg : {Algorithm::Primal, Algorithm::Dual}) {
        RunConfig cfg = config(eps, alg);
        std::vector<HRep> outers;
        std::vector<std::vector<Vec>> verts;
        std::vector<HalfSpace> cuts;
        cfg.observer = [&](const IterationInfo& it) {
          outers.push_back(*it.outer);
          verts.push_back(it.vertices->vertices);
          for (const auto& h : it.cuts) cuts.push_back(h);
        };
        EpsilonSolution s = run(p, frame, cfg);
        ++runs;
        if (!certify(s, p, frame, eps).all_pass()) ++cert_fail;
        for (std::size_t i = 1; i < outers.size(); ++i) {
          for (const auto& v : verts[i]) {
            if (!outers[i - 1].contains(v, 1e-7 * (1.0 + v.lpNorm<Eigen::Infinity>()))) ++nest_fail;
          }
        }
        // Primal cuts must keep every sampled image; dual cuts every point of D found.
        const std::vector<Vec>& keep = alg == Algorithm::Primal ? sample_images : s.dual_images();
        for (const auto& h : cuts) {
          for (const auto& y : keep) {
            if (h.slack(y) < -1e-8 * (1.0 + std::abs(h.offset))) {
              ++cut_fail;
              break;
            }
          }
        }
        sols.emplace(alg, std::move(s));
      }
      const EpsilonSolution& primal = sols.at(Algorithm::Primal);
      const EpsilonSolution& dual = sols.at(Algorithm::Dual);
      for (const auto& y : primal.images()) {
        const double slack = dual.outer_primal.hrep().min_slack(y);
        worst_agree = std::min(worst_agree, slack);
        if (slack < -1e-8 * (1.0 + y.lpNorm<Eigen::Infinity>())) ++agree_fail;
      }
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.require(cert_fail == 0, "certification " + std::to_string(cert_fail));
  o.require(nest_fail == 0, "nesting " + std::to_string(nest_fail));
  o.require(cut_fail == 0, "cut validity " + std::to_string(cut_fail));
  o.require(agree_fail == 0, "primal/dual agreement " + std::to_string(agree_fail));
  o.require(secs <= 600.0, "runtime");
  o.detail << runs << " runs in " << secs << " s, worst agreement slack " << worst_agree;
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::mt19937_64 rng(77);
  double worst_dd = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int dim = 2 + k % 3;
    const HRep h = k % 2 == 0 ? testing::random_polytope(rng, dim, 2 + k % 6) : testing::random_upper_set(rng, dim, 2 + k % 6);
    worst_dd = std::max(worst_dd, testing::hausdorff(enumerate_vertices(h, dim).vertices, testing::brute_force_vertices(h, dim)));
  }
  o.require(worst_dd <= 1e-8, "double description");

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_qp = 0.0;
  for (int k = 0; k < 30; ++k) {
    const int n = 2 + k % 3;
    const int m = 2 + k % 5;
    const Mat Q = testing::random_spd(rng, n);
    Vec b(n);
    for (int i = 0; i < n; ++i) b(i) = 2.0 * u(rng);
    Mat A(m, n);
    Vec r(m);
    for (int i = 0; i < m; ++i) {
      A.row(i) = testing::random_unit(rng, n).transpose();
      r(i) = 0.5 + 0.5 * u(rng);
    }
    const testing::QpResult want = testing::brute_force_qp(Q, b, A, r);
    ScalarProgram prog;
    prog.num_vars = n;
    prog.objective = Expr::scaled(0.5, Expr::quad_form(Q, testing::variables(n))) + Expr::affine(b, 0.0);
    for (int i = 0; i < m; ++i) prog.constraints.push_back(Expr::affine(A.row(i).transpose(), -r(i)));
    prog.box = Box::unbounded(n);
    const ScalarSolution got = solve(prog);
    if (!got.optimal() || !want.feasible) {
      worst_qp = INFINITY;
      continue;
    }
    worst_qp = std::max({worst_qp, std::abs(got.value - want.value), (got.x - want.x).lpNorm<Eigen::Infinity>()});
  }
  o.require(worst_qp <= 1e-6, "QP oracle");

  // Smooth points of smooth and nonsmooth expressions.
  double worst_grad = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 3;
    Vec a(n);
    Vec c(n);
    for (int i = 0; i < n; ++i) {
      a(i) = u(rng);
      c(i) = u(rng);
    }
    const Expr e = Expr::sum({Expr::exp(Expr::affine(a, 0.2)), Expr::abs(Expr::affine(c, 0.1)),
                              Expr::max({Expr::square(Expr::affine(a, -0.3)), Expr::affine(c, 0.0)}),
                              Expr::quad_form(testing::random_spd(rng, n), testing::variables(n))});
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = u(rng);
    // Skip points within 1e-3 of a kink.
    if (std::abs(c.dot(x) + 0.1) < 1e-3 || std::abs(std::pow(a.dot(x) - 0.3, 2) - c.dot(x)) < 1e-3) continue;
    Vec fd(n);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      Vec xp = x;
      Vec xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (e.eval(xp) - e.eval(xm)) / (2 * h);
    }
    worst_grad = std::max(worst_grad, (e.subgradient(x) - fd).lpNorm<Eigen::Infinity>());
  }
  o.require(worst_grad <= 1e-6, "subgradients");
  o.detail << "DD Hausdorff " << worst_dd << ", QP error " << worst_qp << ", gradient error " << worst_grad;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all = true;
  for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) {
    if (!selected.empty() && !selected.count(k)) continue;
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::printf("criterion %d: %s: %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
