#include "benson/errors.hpp"
#include "benson/expr.hpp"
#include "benson/problem.hpp"

#include "doctest.h"
#include "support.hpp"

using namespace benson;

namespace {

Vec central_difference(const Expr& e, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x;
    Vec b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (e.eval(a) - e.eval(b)) / (2 * h);
  }
  return g;
}

// Random convex trees built from the whitelist.
Expr random_convex(std::mt19937_64& rng, int n, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto affine = [&]() {
    Vec a(n);
    for (int i = 0; i < n; ++i) a(i) = u(rng);
    return Expr::affine(a, u(rng));
  };
  switch (pick(rng)) {
    case 0:
      return affine();
    case 1:
      return Expr::square(affine());
    case 2:
      return Expr::sum({random_convex(rng, n, depth - 1), random_convex(rng, n, depth - 1)});
    case 3:
      return Expr::scaled(0.5 + 0.5 * (u(rng) + 1.0), random_convex(rng, n, depth - 1));
    case 4:
      return Expr::exp(affine());
    case 5:
      return Expr::abs(affine());
    case 6:
      return Expr::max({random_convex(rng, n, depth - 1), affine()});
    default:
      return Expr::quad_form(testing::random_spd(rng, 2), {affine(), affine()});
  }
}

}  // namespace

TEST_CASE("curvature of the whitelist") {
  const Expr x = Expr::variable(0);
  CHECK(Expr::constant(2).curvature() == Curvature::Constant);
  CHECK(x.curvature() == Curvature::Affine);
  CHECK(Expr::square(x).curvature() == Curvature::Convex);
  CHECK(Expr::scaled(-1, Expr::square(x)).curvature() == Curvature::Concave);
  CHECK(Expr::exp(x).is_convex());
  CHECK(Expr::abs(x).is_convex());
  CHECK(Expr::exp(Expr::square(x)).is_convex());
  CHECK(Expr::square(Expr::square(x)).curvature() == Curvature::Unknown);
  CHECK_FALSE(Expr::abs(x).smooth());
  CHECK(Expr::exp(x).smooth());
}

TEST_CASE("odd powers and asymmetric forms are rejected") {
  CHECK_THROWS_AS(Expr::power(Expr::variable(0), 3), ConvexityError);
  Mat q(2, 2);
  q << 1, 2, 0, 1;
  CHECK_THROWS_AS(Expr::quad_form(q, testing::variables(2)), ConvexityError);
}

TEST_CASE("evaluation of a small tree") {
  Vec a(2);
  a << 1, 0;
  const Expr e = Expr::sum({Expr::square(Expr::affine(a, -1)), Expr::scaled(2, Expr::abs(Expr::variable(1)))});
  Vec x(2);
  x << 3, -0.5;
  CHECK(e.eval(x) == doctest::Approx(5.0));
  CHECK(e.arity() == 2);
}

TEST_CASE("subgradients match finite differences at smooth points") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    const Expr e = random_convex(rng, n, 3);
    REQUIRE(e.is_convex());
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = u(rng);
    const Vec g = e.subgradient(x);
    const Vec fd = central_difference(e, x);
    // At a kink the two one-sided slopes differ; skip those points.
    const Vec fd_coarse = central_difference(e, x, 1e-3);
    if ((fd - fd_coarse).lpNorm<Eigen::Infinity>() > 1e-3) continue;
    ++checked;
    CHECK((g - fd).lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(1.0, g.lpNorm<Eigen::Infinity>()));
  }
  CHECK(checked > 150);
}

TEST_CASE("hessians match finite differences of the gradient") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    Vec a(n);
    for (int i = 0; i < n; ++i) a(i) = u(rng);
    const Expr e = Expr::sum({Expr::exp(Expr::affine(a, 0.1)), Expr::quad_form(testing::random_spd(rng, n), testing::variables(n)),
                              Expr::power(Expr::affine(a, -0.2), 4)});
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = u(rng);
    const Mat H = e.hessian(x);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      Vec p = x;
      Vec m = x;
      p(i) += h;
      m(i) -= h;
      const Vec col = (e.subgradient(p) - e.subgradient(m)) / (2 * h);
      CHECK((H.col(i) - col).lpNorm<Eigen::Infinity>() <= 1e-5 * std::max(1.0, H.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("accumulate agrees with eval, subgradient and hessian") {
  std::mt19937_64 rng(13);
  const Expr e = Expr::sum({Expr::exp(Expr::variable(0)), Expr::square(Expr::variable(1))});
  Vec x(2);
  x << 0.3, -0.7;
  double value = 0.0;
  Vec g = Vec::Zero(2);
  Mat H = Mat::Zero(2, 2);
  e.accumulate(x, 2.0, value, &g, &H);
  CHECK(value == doctest::Approx(2.0 * e.eval(x)));
  CHECK((g - 2.0 * e.subgradient(x)).norm() < 1e-12);
  CHECK((H - 2.0 * e.hessian(x)).norm() < 1e-12);
}

TEST_CASE("weighted_sum skips zero weights and keeps convexity for w >= 0") {
  Vec w(3);
  w << 1, 0, 2;
  const std::vector<Expr> es{Expr::square(Expr::variable(0)), Expr::scaled(-1, Expr::exp(Expr::variable(0))),
                             Expr::exp(Expr::variable(1))};
  CHECK(weighted_sum(w, es).is_convex());
  w(1) = 1;
  CHECK_FALSE(weighted_sum(w, es).is_convex());
}

TEST_CASE("orthant cone data") {
  const OrderingCone c = OrderingCone::orthant(3);
  CHECK(c.generators().isApprox(Mat::Identity(3, 3)));
  CHECK(c.num_dual_generators() == 3);
  Vec y(3);
  y << 1, 0, 2;
  CHECK(c.contains(y, 0.0));
  CHECK(c.on_dual_boundary(y, 1e-12));
  Vec w(3);
  w << 0.2, 0.3, 0.5;
  CHECK(c.dual_contains(w, 0.0));
  CHECK_FALSE(c.on_dual_boundary(w, 1e-12));
}

TEST_CASE("dual generators are scaled to c'z = 1") {
  Vec c(2);
  c << 1, 2;
  const OrderingCone cone = OrderingCone::orthant(2, c);
  const Vec s = cone.dual_generators().transpose() * c;
  CHECK(s(0) == doctest::Approx(1.0));
  CHECK(s(1) == doctest::Approx(1.0));
}

TEST_CASE("a cone from its dual generators") {
  // C = {y : y1 + y2 >= 0, y1 - y2/2 >= 0}.
  Mat Z(2, 2);
  Z << 1, 1, 1, -0.5;
  Vec c(2);
  c << 1, 0.5;
  const OrderingCone cone = OrderingCone::from_dual(Z, c);
  const Mat zy = cone.dual_generators().transpose() * cone.generators();
  CHECK(zy.minCoeff() >= -1e-12);
  CHECK(cone.contains(c, 0.0));
  const OrderingCone back = OrderingCone::from_generators(cone.generators(), c);
  CHECK(back.num_dual_generators() == 2);
}

TEST_CASE("cone validation errors") {
  Vec c(2);
  c << 1, 1;
  Mat flat(2, 2);
  flat << 1, 1, 0, 0;
  CHECK_THROWS_AS(OrderingCone(flat, Mat::Identity(2, 2), c), ConeError);
  Vec outside(2);
  outside << -1, 1;
  CHECK_THROWS_AS(OrderingCone::orthant(2, outside), ConeError);
  CHECK_THROWS_AS(OrderingCone::orthant(1), ConeError);
}

TEST_CASE("problem validation") {
  const std::vector<Expr> obj{Expr::variable(0), Expr::variable(1)};
  CHECK_THROWS_AS(CvopProblem("p", 2, obj, {Expr::scaled(-1, Expr::square(Expr::variable(0)))}, Box::unbounded(2),
                              OrderingCone::orthant(2)),
                  ConvexityError);
  CHECK_THROWS_AS(CvopProblem("p", 2, {Expr::variable(0), Expr::scaled(-1, Expr::exp(Expr::variable(1)))}, {},
                              Box::unbounded(2), OrderingCone::orthant(2)),
                  ConvexityError);
  CHECK_THROWS_AS(CvopProblem("p", 2, obj, {}, Box::unbounded(2), OrderingCone::orthant(3)), ConeError);
}

TEST_CASE("a C-convex but not componentwise convex objective is accepted for a larger cone") {
  // Gamma = (x^2, -x^2/2): z'Gamma is convex for both generators (1,0) and
  // (1,1) of C+, although the second component is concave.
  Mat Z(2, 2);
  Z << 1, 1, 0, 1;
  Vec c(2);
  c << 1, 0.1;
  const OrderingCone cone = OrderingCone::from_dual(Z, c);
  const Expr x = Expr::variable(0);
  CHECK_NOTHROW(CvopProblem("p", 1, {Expr::square(x), Expr::scaled(-0.5, Expr::square(x))}, {}, Box::unbounded(1), cone));
}

TEST_CASE("domain errors outside the box") {
  Box b = Box::unbounded(2);
  b.lower(0) = 0.0;
  CvopProblem p("p", 2, testing::variables(2), {}, b, OrderingCone::orthant(2));
  Vec x(2);
  x << -1, 0;
  CHECK_THROWS_AS((void)p.objective_values(x), DomainError);
  CHECK_THROWS_AS((void)p.objective_values(Vec::Zero(3)), DomainError);
  CHECK_FALSE(p.feasible(x, 0.0));
}

TEST_CASE("D-cone reduction") {
  const std::vector<Expr> g{Expr::variable(0), Expr::scaled(-1, Expr::variable(0)), Expr::square(Expr::variable(1))};
  Mat D(3, 2);
  D << 1, 0, 1, 0, 0, 1;
  const auto h = reduce_D_cone(g, D);
  REQUIRE(h.size() == 2);
  Vec x(2);
  x << 0.7, 2;
  CHECK(h[0].eval(x) == doctest::Approx(0.0));
  CHECK(h[1].eval(x) == doctest::Approx(4.0));
  Mat bad(3, 1);
  bad << 0, 0, -1;
  CHECK_THROWS_AS(reduce_D_cone(g, bad), ConvexityError);
}
