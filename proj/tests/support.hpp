#pragma once

// Independent oracles and generators shared by the test binaries.

#include "benson/expr.hpp"
#include "benson/polyhedron.hpp"
#include "benson/problem.hpp"
#include "benson/scalarization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace testing {

using benson::Expr;
using benson::HalfSpace;
using benson::HRep;
using benson::Mat;
using benson::Vec;

inline std::string data_file(const std::string& name) { return std::string(BENSON_DATA_DIR) + "/" + name; }

// Calls f on every k-subset of {0..n-1}.
template <typename F>
void for_each_subset(int n, int k, F&& f) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k > n) return;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

// Vertices by solving every square subsystem and keeping the feasible,
// pairwise distinct solutions.
inline std::vector<Vec> brute_force_vertices(const HRep& h, int dim, double tol = 1e-9) {
  std::vector<Vec> out;
  const int m = static_cast<int>(h.size());
  for_each_subset(m, dim, [&](const std::vector<int>& idx) {
    Mat A(dim, dim);
    Vec b(dim);
    for (int r = 0; r < dim; ++r) {
      A.row(r) = h.halfspaces[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])].normal.transpose();
      b(r) = h.halfspaces[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])].offset;
    }
    Eigen::FullPivLU<Mat> lu(A);
    if (lu.rank() < dim) return;
    const Vec y = lu.solve(b);
    if (h.min_slack(y) < -tol) return;
    for (const auto& v : out) {
      if ((v - y).lpNorm<Eigen::Infinity>() < 1e-7) return;
    }
    out.push_back(y);
  });
  return out;
}

inline double hausdorff(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.empty() || b.empty()) return a.size() == b.size() ? 0.0 : std::numeric_limits<double>::infinity();
  auto directed = [](const std::vector<Vec>& p, const std::vector<Vec>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : q) best = std::min(best, (x - y).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

inline Vec random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = g(rng);
  return v.normalized();
}

// A random polytope containing the origin: {y : n_i'y >= -1}, plus a box so
// it is bounded.
inline HRep random_polytope(std::mt19937_64& rng, int dim, int extra) {
  HRep h;
  for (int i = 0; i < dim; ++i) {
    for (double s : {1.0, -1.0}) {
      Vec n = Vec::Zero(dim);
      n(i) = s;
      h.halfspaces.push_back({n, -2.0});
    }
  }
  std::uniform_real_distribution<double> off(-1.5, -0.5);
  for (int i = 0; i < extra; ++i) h.halfspaces.push_back({random_unit(rng, dim), off(rng)});
  return h;
}

// A random unbounded polyhedron that looks like an upper image:
// nonnegative normals and a nonnegative orthant recession cone.
inline HRep random_upper_set(std::mt19937_64& rng, int dim, int count) {
  HRep h;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_real_distribution<double> off(0.0, 2.0);
  for (int i = 0; i < dim; ++i) h.halfspaces.push_back({Vec::Unit(dim, i), 0.0});
  for (int i = 0; i < count; ++i) {
    Vec n(dim);
    for (int j = 0; j < dim; ++j) n(j) = u(rng);
    h.halfspaces.push_back({n.normalized(), off(rng)});
  }
  return h;
}

// min 1/2 x'Qx + b'x s.t. A x <= r, by enumerating active sets. Q must be
// positive definite; returns the optimal x and value.
struct QpResult {
  Vec x;
  double value = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

inline QpResult brute_force_qp(const Mat& Q, const Vec& b, const Mat& A, const Vec& r) {
  const int n = static_cast<int>(Q.rows());
  const int m = static_cast<int>(A.rows());
  QpResult best;
  for (int k = 0; k <= std::min(n, m); ++k) {
    for_each_subset(m, k, [&](const std::vector<int>& S) {
      Mat K = Mat::Zero(n + k, n + k);
      Vec rhs(n + k);
      K.topLeftCorner(n, n) = Q;
      rhs.head(n) = -b;
      for (int i = 0; i < k; ++i) {
        const Vec a = A.row(S[static_cast<std::size_t>(i)]).transpose();
        K.block(0, n + i, n, 1) = a;
        K.block(n + i, 0, 1, n) = a.transpose();
        rhs(n + i) = r(S[static_cast<std::size_t>(i)]);
      }
      Eigen::FullPivLU<Mat> lu(K);
      if (lu.rank() < n + k) return;
      const Vec sol = lu.solve(rhs);
      const Vec x = sol.head(n);
      if (k > 0 && sol.tail(k).minCoeff() < -1e-12) return;
      if ((A * x - r).maxCoeff() > 1e-10) return;
      const double val = 0.5 * x.dot(Q * x) + b.dot(x);
      if (val < best.value) {
        best.value = val;
        best.x = x;
        best.feasible = true;
      }
    });
  }
  return best;
}

inline std::vector<Expr> variables(int n) {
  std::vector<Expr> v;
  for (int i = 0; i < n; ++i) v.push_back(Expr::variable(i));
  return v;
}

inline Mat random_spd(std::mt19937_64& rng, int n, double floor = 0.2) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) B(i, j) = g(rng);
  }
  return B * B.transpose() / n + floor * Mat::Identity(n, n);
}

// Random convex quadratic CVOP: objectives (x - a_i)'Q_i(x - a_i) + b_i'x,
// a ball constraint and, half of the time, a box.
inline benson::CvopProblem random_quadratic_cvop(std::mt19937_64& rng, int q, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Expr> obj;
  for (int i = 0; i < q; ++i) {
    const Mat Q = random_spd(rng, n);
    std::vector<Expr> shifted;
    for (int j = 0; j < n; ++j) shifted.push_back(Expr::affine(Vec::Unit(n, j), -u(rng)));
    Vec lin(n);
    for (int j = 0; j < n; ++j) lin(j) = 0.3 * u(rng);
    obj.push_back(Expr::quad_form(Q, shifted) + Expr::affine(lin, 0.0));
  }
  std::vector<Expr> ball;
  for (int j = 0; j < n; ++j) ball.push_back(Expr::square(Expr::affine(Vec::Unit(n, j), -0.2 * u(rng))));
  ball.push_back(Expr::constant(-1.0));
  benson::Box box = benson::Box::unbounded(n);
  if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
    box.lower = Vec::Constant(n, -0.7);
    box.upper = Vec::Constant(n, 0.8);
  }
  benson::CvopProblem p("random", n, std::move(obj), {Expr::sum(ball)}, box, benson::OrderingCone::orthant(q));
  benson::attach_witness(p);
  return p;
}

// Feasible points: rejection sampling in the bounding box of the unit-ish
// feasible region.
inline std::vector<Vec> sample_feasible(const benson::CvopProblem& p, std::mt19937_64& rng, int count,
                                        double radius = 1.5) {
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Vec> out;
  for (int tries = 0; tries < 10000 * count && static_cast<int>(out.size()) < count; ++tries) {
    Vec x(p.n);
    for (int j = 0; j < p.n; ++j) {
      const double lo = std::max(-radius, p.box.lower(j));
      const double hi = std::min(radius, p.box.upper(j));
      x(j) = lo + (hi - lo) * (0.5 + 0.5 * u(rng) / radius);
    }
    if (p.feasible(x, 0.0)) out.push_back(x);
  }
  return out;
}

}  // namespace testing
