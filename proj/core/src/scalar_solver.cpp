#include "benson/scalar_solver.hpp"

#include "benson/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace benson {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInactiveRatio = 1e3;

// Smooth program handed to the barrier method.
struct Smooth {
  int n = 0;
  Expr f;
  std::vector<Expr> c;
  Vec lb;
  Vec ub;

  [[nodiscard]] int num_barrier_terms() const {
    int k = static_cast<int>(c.size());
    for (int j = 0; j < n; ++j) k += (std::isfinite(lb(j)) ? 1 : 0) + (std::isfinite(ub(j)) ? 1 : 0);
    return k;
  }
};

struct AuxVar {
  int var;
  std::vector<Expr> branches;
};

// Replaces every abs/max node by a fresh variable t with rows branch - t <= 0.
class Lifter {
 public:
  explicit Lifter(int n) : next_(n) {}

  Expr rewrite(const Expr& e) {
    if (e.smooth()) return e;
    using K = Expr::Kind;
    switch (e.kind()) {
      case K::Sum: {
        std::vector<Expr> ch;
        for (const auto& c : e.children()) ch.push_back(rewrite(c));
        return Expr::sum(std::move(ch));
      }
      case K::Scaled: return Expr::scaled(e.scalar(), rewrite(e.children()[0]));
      case K::Exp: return Expr::exp(rewrite(e.children()[0]));
      case K::Abs: {
        Expr a = rewrite(e.children()[0]);
        return epigraph({a, Expr::scaled(-1.0, a)});
      }
      case K::Max: {
        std::vector<Expr> br;
        for (const auto& c : e.children()) br.push_back(rewrite(c));
        return epigraph(std::move(br));
      }
      default: return e;
    }
  }

  [[nodiscard]] int num_vars() const { return next_; }
  std::vector<Expr> rows;
  std::vector<AuxVar> aux;

 private:
  Expr epigraph(std::vector<Expr> branches) {
    const int v = next_++;
    const Expr tv = Expr::variable(v);
    for (const auto& b : branches) rows.push_back(Expr::sum({b, Expr::scaled(-1.0, tv)}));
    aux.push_back({v, std::move(branches)});
    return tv;
  }

  int next_;
};

struct Lifted {
  Smooth p;
  int n_orig = 0;
  int m_orig = 0;
  std::vector<AuxVar> aux;

  // Fills auxiliary variables slightly above their branch maxima.
  [[nodiscard]] Vec extend(const Vec& x) const {
    Vec e = Vec::Zero(p.n);
    e.head(n_orig) = x;
    for (const auto& a : aux) {
      double m = -kInf;
      for (const auto& b : a.branches) m = std::max(m, b.eval(e));
      e(a.var) = m + 1e-3 * (1.0 + std::abs(m));
    }
    return e;
  }
};

Lifted lift(int n, const Expr& f, const std::vector<Expr>& cons, const Box& box) {
  Lifter lf(n);
  Lifted l;
  l.n_orig = n;
  l.m_orig = static_cast<int>(cons.size());
  l.p.f = lf.rewrite(f);
  for (const auto& c : cons) l.p.c.push_back(lf.rewrite(c));
  for (auto& r : lf.rows) l.p.c.push_back(std::move(r));
  l.aux = std::move(lf.aux);
  l.p.n = lf.num_vars();
  l.p.lb = Vec::Constant(l.p.n, -kInf);
  l.p.ub = Vec::Constant(l.p.n, kInf);
  if (box.size() == n) {
    l.p.lb.head(n) = box.lower;
    l.p.ub.head(n) = box.upper;
  }
  return l;
}

// Moves x strictly inside the box.
Vec box_interior(Vec x, const Vec& lb, const Vec& ub) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const bool lo = std::isfinite(lb(j));
    const bool hi = std::isfinite(ub(j));
    if (lo && hi) {
      const double w = ub(j) - lb(j);
      x(j) = std::clamp(x(j), lb(j) + 0.01 * w, ub(j) - 0.01 * w);
    } else if (lo) {
      x(j) = std::max(x(j), lb(j) + 0.1);
    } else if (hi) {
      x(j) = std::min(x(j), ub(j) - 0.1);
    }
  }
  return x;
}

bool strictly_feasible(const Smooth& p, const Vec& x) {
  for (int j = 0; j < p.n; ++j) {
    if (!(x(j) > p.lb(j) && x(j) < p.ub(j))) return false;
  }
  return std::all_of(p.c.begin(), p.c.end(), [&](const Expr& c) { return c.eval(x) < 0.0; });
}

// F(x) = t f(x) - sum log(-c_i(x)) - box log terms + (delta/2) |x - anchor|^2
struct Centering {
  const Smooth& p;
  double t;
  double delta;
  const Vec& anchor;

  bool eval(const Vec& x, double& F, Vec* g, Mat* H) const {
    const int n = p.n;
    F = 0.0;
    if (g) g->setZero(n);
    if (H) H->setZero(n, n);
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(p.lb(j))) {
        const double d = x(j) - p.lb(j);
        if (!(d > 0.0)) return false;
        F -= std::log(d);
        if (g) (*g)(j) -= 1.0 / d;
        if (H) (*H)(j, j) += 1.0 / (d * d);
      }
      if (std::isfinite(p.ub(j))) {
        const double d = p.ub(j) - x(j);
        if (!(d > 0.0)) return false;
        F -= std::log(d);
        if (g) (*g)(j) += 1.0 / d;
        if (H) (*H)(j, j) += 1.0 / (d * d);
      }
    }
    p.f.accumulate(x, t, F, g, H);
    Vec cg(g ? n : 0);
    Mat ch(H ? n : 0, H ? n : 0);
    for (const auto& c : p.c) {
      double cv = 0.0;
      if (g) cg.setZero();
      if (H) ch.setZero();
      c.accumulate(x, 1.0, cv, g ? &cg : nullptr, H ? &ch : nullptr);
      if (!(cv < 0.0)) return false;
      F -= std::log(-cv);
      if (g) *g += cg / (-cv);
      if (H) {
        H->noalias() += (cg * cg.transpose()) / (cv * cv);
        *H += ch / (-cv);
      }
    }
    const Vec dx = x - anchor;
    F += 0.5 * delta * dx.squaredNorm();
    if (g) *g += delta * dx;
    if (H) H->diagonal().array() += delta;
    return std::isfinite(F);
  }
};

struct CenterResult {
  int steps = 0;
  bool converged = false;
};

CenterResult center(const Centering& cf, Vec& x, int max_steps) {
  CenterResult r;
  const int n = cf.p.n;
  Vec g(n);
  Mat H(n, n);
  double F = 0.0;
  for (int k = 0; k < max_steps; ++k) {
    if (!cf.eval(x, F, &g, &H)) break;
    Eigen::LDLT<Mat> ldlt(H);
    Vec dx = -ldlt.solve(g);
    double dec2 = -g.dot(dx);
    if (ldlt.info() != Eigen::Success || !dx.allFinite() || !(dec2 >= 0.0)) {
      Mat Hs = H;
      Hs.diagonal().array() += 1e-10 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      dx = -Hs.llt().solve(g);
      dec2 = -g.dot(dx);
      if (!dx.allFinite() || !(dec2 >= 0.0)) break;
    }
    ++r.steps;
    if (dec2 <= 1e-14) {
      r.converged = true;
      break;
    }
    double alpha = 1.0;
    double Fn = 0.0;
    int halvings = 0;
    while (!cf.eval(x + alpha * dx, Fn, nullptr, nullptr) && halvings < 80) {
      alpha *= 0.5;
      ++halvings;
    }
    if (halvings == 80) break;
    if (dec2 > 0.25) {
      while (Fn > F - 0.25 * alpha * dec2 && alpha > 1e-12) {
        alpha *= 0.5;
        if (!cf.eval(x + alpha * dx, Fn, nullptr, nullptr)) Fn = kInf;
      }
      if (alpha <= 1e-12) break;
    }
    x += alpha * dx;
  }
  return r;
}

struct PathResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vec x;
  Vec lambda;
  Vec mu_lo;
  Vec mu_hi;
  double t = 1.0;
  double gap = kInf;
  double kkt = kInf;
  int steps = 0;
  std::string message;
};

bool certify_unbounded(const Smooth& p, const Vec& prev, const Vec& cur, double huge) {
  Vec d = cur - prev;
  const double dn = d.lpNorm<Eigen::Infinity>();
  if (!(dn > 0.0)) return false;
  d /= dn;
  const double f0 = p.f.eval(cur);
  double last = f0;
  for (int k = 1; k <= 4; ++k) {
    const Vec y = cur + std::pow(10.0, k) * huge * d;
    for (int j = 0; j < p.n; ++j) {
      if (y(j) < p.lb(j) || y(j) > p.ub(j)) return false;
    }
    for (const auto& c : p.c) {
      if (!(c.eval(y) <= 0.0)) return false;
    }
    const double fy = p.f.eval(y);
    if (!(fy < last)) return false;
    last = fy;
  }
  return last < -huge;
}

PathResult barrier_path(const Smooth& p, Vec x, const SolverOptions& o) {
  PathResult res;
  const Vec anchor = x;
  const int m_eff = p.num_barrier_terms() + 1;
  const double gap_target = o.tol_opt;
  double t = 1.0;
  std::vector<Vec> history;
  bool finished = false;
  for (int outer = 0; outer < o.max_outer; ++outer) {
    Centering cf{p, t, o.proximal, anchor};
    const CenterResult cr = center(cf, x, o.max_newton);
    res.steps += cr.steps;
    history.push_back(x);
    const double fx = p.f.eval(x);
    if (x.lpNorm<Eigen::Infinity>() > o.huge || fx < -o.huge) {
      if (history.size() >= 2 && certify_unbounded(p, history[history.size() - 2], x, o.huge)) {
        res.status = SolveStatus::Unbounded;
        res.x = x;
        res.t = t;
        res.message = "objective decreases without bound along a feasible ray";
        return res;
      }
    }
    if (static_cast<double>(m_eff) / t <= gap_target) {
      finished = true;
      break;
    }
    t *= o.barrier_growth;
  }
  res.x = x;
  res.t = t;
  res.gap = static_cast<double>(p.num_barrier_terms()) / t;

  const int n = p.n;
  res.lambda.resize(static_cast<Eigen::Index>(p.c.size()));
  res.mu_lo = Vec::Zero(n);
  res.mu_hi = Vec::Zero(n);
  Vec grad_f = Vec::Zero(n);
  double fv = 0.0;
  p.f.accumulate(x, 1.0, fv, &grad_f, nullptr);
  const double gscale = std::max(1.0, grad_f.lpNorm<Eigen::Infinity>());

  // Every barrier term as (gradient, slack, multiplier). Box rows come last.
  const auto rows = static_cast<Eigen::Index>(p.c.size()) + 2 * n;
  Mat G = Mat::Zero(n, rows);
  Vec slack = Vec::Constant(rows, kInf);
  for (std::size_t i = 0; i < p.c.size(); ++i) {
    Vec cg = Vec::Zero(n);
    double cv = 0.0;
    p.c[i].accumulate(x, 1.0, cv, &cg, nullptr);
    G.col(static_cast<Eigen::Index>(i)) = cg;
    slack(static_cast<Eigen::Index>(i)) = -cv;
  }
  const auto box0 = static_cast<Eigen::Index>(p.c.size());
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(p.lb(j))) {
      G(j, box0 + j) = -1.0;
      slack(box0 + j) = x(j) - p.lb(j);
    }
    if (std::isfinite(p.ub(j))) {
      G(j, box0 + n + j) = 1.0;
      slack(box0 + n + j) = p.ub(j) - x(j);
    }
  }
  Vec lam = (t * slack.array()).inverse().matrix();
  res.kkt = (grad_f + G * lam).lpNorm<Eigen::Infinity>();

  // Barrier multipliers of nearly active rows inherit the rounding in their
  // tiny slacks. Re-estimate them by least squares on the rows identified
  // as active and keep the estimate when it is nonnegative and better.
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (lam(i) > slack(i)) active.push_back(i);
  }
  if (!active.empty() && static_cast<int>(active.size()) <= n) {
    Vec inactive = lam;
    Mat GA(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      GA.col(static_cast<Eigen::Index>(k)) = G.col(active[k]);
      inactive(active[k]) = 0.0;
    }
    const Vec est = GA.colPivHouseholderQr().solve(-(grad_f + G * inactive));
    if (est.allFinite() && est.minCoeff() >= 0.0) {
      Vec refined = inactive;
      for (std::size_t k = 0; k < active.size(); ++k) refined(active[k]) = est(static_cast<Eigen::Index>(k));
      const double kkt = (grad_f + G * refined).lpNorm<Eigen::Infinity>();
      if (kkt < res.kkt) {
        res.kkt = kkt;
        lam = refined;
      }
    }
  }
  res.lambda = lam.head(box0);
  res.mu_lo = lam.segment(box0, n);
  res.mu_hi = lam.tail(n);

  // A minimizer that keeps moving while t grows is escaping to infinity.
  if (history.size() >= 4) {
    const auto k = history.size() - 1;
    const double d_k = (history[k] - history[k - 1]).lpNorm<Eigen::Infinity>();
    const double d_k2 = (history[k - 2] - history[k - 3]).lpNorm<Eigen::Infinity>();
    if (d_k > 1e-3 * (1.0 + x.lpNorm<Eigen::Infinity>()) && d_k >= 0.5 * d_k2) {
      if (certify_unbounded(p, history[k - 1], history[k], o.huge)) {
        res.status = SolveStatus::Unbounded;
        res.message = "objective decreases without bound along a feasible ray";
        return res;
      }
      res.status = SolveStatus::NotAttained;
      std::ostringstream os;
      os << "infimum is not attained: iterates keep drifting (last step " << d_k << ")";
      res.message = os.str();
      return res;
    }
  }
  if (!finished) {
    res.status = SolveStatus::NumericalFailure;
    res.message = "barrier parameter cap reached";
    return res;
  }
  if (res.kkt > o.tol_kkt * gscale) {
    res.status = SolveStatus::NumericalFailure;
    std::ostringstream os;
    os << "KKT residual " << res.kkt << " above tolerance";
    res.message = os.str();
    return res;
  }
  res.status = SolveStatus::Optimal;
  return res;
}

struct PhaseOneInternal {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vec x;
  double s = kInf;
  std::string message;
};

// min s  s.t. c_i(x) - s <= 0, s >= -1, x in box.
PhaseOneInternal phase_one_smooth(const Smooth& p, const Vec& x0, const SolverOptions& o) {
  PhaseOneInternal out;
  Smooth q;
  q.n = p.n + 1;
  const Expr s = Expr::variable(p.n);
  q.f = s;
  for (const auto& c : p.c) q.c.push_back(Expr::sum({c, Expr::scaled(-1.0, s)}));
  Vec a = Vec::Zero(q.n);
  a(p.n) = -1.0;
  q.c.push_back(Expr::affine(a, -1.0));
  q.lb = Vec::Constant(q.n, -kInf);
  q.ub = Vec::Constant(q.n, kInf);
  q.lb.head(p.n) = p.lb;
  q.ub.head(p.n) = p.ub;
  Vec y(q.n);
  y.head(p.n) = x0;
  double worst = -1.0;
  for (const auto& c : p.c) worst = std::max(worst, c.eval(x0));
  if (!std::isfinite(worst)) {
    out.message = "constraints are not finite at the starting point";
    return out;
  }
  y(p.n) = worst + 1.0;
  PathResult pr = barrier_path(q, y, o);
  out.x = pr.x.head(p.n);
  out.s = pr.x(p.n);
  double maxc = -kInf;
  for (const auto& c : p.c) maxc = std::max(maxc, c.eval(out.x));
  if (maxc < 0.0 && strictly_feasible(p, out.x)) {
    out.status = SolveStatus::Optimal;
    return out;
  }
  if (pr.status == SolveStatus::Optimal || pr.status == SolveStatus::NotAttained) {
    if (out.s > o.tol_feas) {
      out.status = SolveStatus::Infeasible;
      std::ostringstream os;
      os << "Phase-I optimum " << out.s << " is positive: no feasible point";
      out.message = os.str();
    } else {
      out.status = SolveStatus::NumericalFailure;
      std::ostringstream os;
      os << "Slater condition fails: Phase-I optimum " << out.s << " is not negative";
      out.message = os.str();
    }
    return out;
  }
  out.status = SolveStatus::NumericalFailure;
  out.message = "Phase-I solve failed: " + pr.message;
  return out;
}

void check_convex(const ScalarProgram& prog) {
  if (!prog.objective.is_convex()) {
    throw ConvexityError(std::string("objective is not convex (curvature ") + to_string(prog.objective.curvature()) + ")");
  }
  for (std::size_t i = 0; i < prog.constraints.size(); ++i) {
    if (!prog.constraints[i].is_convex()) {
      throw ConvexityError("constraint " + std::to_string(i) + " is not convex");
    }
  }
}

bool box_has_interior(const Smooth& p) {
  for (int j = 0; j < p.n; ++j) {
    if (!(p.lb(j) < p.ub(j))) return false;
  }
  return true;
}

}  // namespace

bool ScalarProgram::smooth() const {
  return objective.smooth() &&
         std::all_of(constraints.begin(), constraints.end(), [](const Expr& c) { return c.smooth(); });
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NotAttained: return "not_attained";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

ScalarSolution solve(const ScalarProgram& prog, const SolverOptions& opts) {
  check_convex(prog);
  const int n = prog.num_vars;
  const Lifted L = lift(n, prog.objective, prog.constraints, prog.box);
  ScalarSolution sol;
  if (!box_has_interior(L.p)) {
    sol.message = "variable box has empty interior";
    return sol;
  }
  Vec x0 = prog.start && prog.start->size() == n ? *prog.start : Vec::Zero(n);
  x0 = box_interior(x0, L.p.lb.head(n), L.p.ub.head(n));
  Vec y = L.extend(x0);
  int steps = 0;
  if (!strictly_feasible(L.p, y)) {
    const PhaseOneInternal p1 = phase_one_smooth(L.p, y, opts);
    if (p1.status != SolveStatus::Optimal) {
      sol.status = p1.status;
      sol.x = p1.x.size() ? Vec(p1.x.head(n)) : x0;
      sol.message = p1.message;
      return sol;
    }
    y = p1.x;
  }
  const PathResult pr = barrier_path(L.p, y, opts);
  sol.status = pr.status;
  sol.x = pr.x.head(n);
  sol.value = prog.objective.eval(sol.x);
  sol.gap = pr.gap;
  sol.kkt_residual = pr.kkt;
  sol.newton_steps = steps + pr.steps;
  sol.message = pr.message;
  if (pr.lambda.size() >= L.m_orig) sol.multipliers = pr.lambda.head(L.m_orig);
  if (pr.mu_lo.size() >= n) {
    sol.lower_multipliers = pr.mu_lo.head(n);
    sol.upper_multipliers = pr.mu_hi.head(n);
  }
  if (sol.status == SolveStatus::Unbounded) sol.value = -kInf;
  spdlog::debug("scalar solve: status={} value={:.10g} kkt={:.2e} newton={}", to_string(sol.status), sol.value,
                sol.kkt_residual, sol.newton_steps);
  return sol;
}

P2Solution solve_with_duals_P2(const P2Program& p2, const SolverOptions& opts) {
  P2Solution out;
  out.raw = solve(p2.program, opts);
  out.x = out.raw.x.head(p2.num_x);
  out.z = out.raw.x(p2.num_x);
  if (out.raw.status != SolveStatus::Optimal && out.raw.status != SolveStatus::NotAttained) return out;
  const auto J = p2.dual_generators.cols();
  out.u = out.raw.multipliers.head(p2.num_g);
  Vec mu = out.raw.multipliers.segment(p2.num_g, J);
  out.w = p2.dual_generators * mu;
  const double cw = p2.c.dot(out.w);
  if (!(std::abs(cw - 1.0) <= 10.0 * opts.tol_kkt)) {
    std::ostringstream os;
    os << "weight from P2 multipliers has c'w = " << cw << ", expected 1";
    throw WNormalizationError(os.str());
  }
  // A cone row whose multiplier is far below its slack is inactive; what is
  // left there is barrier residue. Keeping it tilts the cut and can create
  // vertices at enormous distance.
  for (Eigen::Index j = 0; j < J; ++j) {
    const double slack = -p2.program.constraints[static_cast<std::size_t>(p2.num_g + j)].eval(out.raw.x);
    if (mu(j) * kInactiveRatio < slack) mu(j) = 0.0;
  }
  const Vec cleaned = p2.dual_generators * mu;
  const double ccw = p2.c.dot(cleaned);
  out.w = ccw > 0.5 ? Vec(cleaned / ccw) : Vec(out.w / cw);
  return out;
}

PhaseOneResult phase_one(int num_vars, const std::vector<Expr>& constraints, const Box& box,
                         const std::optional<Vec>& start, const SolverOptions& opts) {
  const Lifted L = lift(num_vars, Expr::constant(0.0), constraints, box);
  PhaseOneResult out;
  if (!box_has_interior(L.p)) {
    out.message = "variable box has empty interior";
    return out;
  }
  Vec x0 = start && start->size() == num_vars ? *start : Vec::Zero(num_vars);
  x0 = box_interior(x0, L.p.lb.head(num_vars), L.p.ub.head(num_vars));
  Vec y = L.extend(x0);
  if (!strictly_feasible(L.p, y)) {
    const PhaseOneInternal p1 = phase_one_smooth(L.p, y, opts);
    out.status = p1.status;
    out.message = p1.message;
    if (p1.x.size() == 0) return out;
    y = p1.x;
  } else {
    out.status = SolveStatus::Optimal;
  }
  out.x = y.head(num_vars);
  out.max_violation = -kInf;
  for (const auto& c : constraints) out.max_violation = std::max(out.max_violation, c.eval(out.x));
  return out;
}

}  // namespace benson
