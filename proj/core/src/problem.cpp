#include "benson/problem.hpp"

#include "benson/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace benson {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat columns_of(const std::vector<Vec>& vs, int rows) {
  Mat m(rows, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = vs[j];
  return m;
}

}  // namespace

Box Box::unbounded(int n) { return Box{Vec::Constant(n, -kInf), Vec::Constant(n, kInf)}; }

bool Box::contains(const Vec& x, double tol) const {
  for (int i = 0; i < size(); ++i) {
    if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
  }
  return true;
}

bool Box::bounded_below(int i) const { return std::isfinite(lower(i)); }
bool Box::bounded_above(int i) const { return std::isfinite(upper(i)); }

int numerical_rank(const Mat& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > tol * s(0) ? 1 : 0;
  return r;
}

OrderingCone::OrderingCone(Mat generators, Mat dual_generators, Vec interior)
    : y_(std::move(generators)), z_(std::move(dual_generators)), c_(std::move(interior)) {
  const auto q = c_.size();
  if (q < 2) throw ConeError("ordering cone needs dimension at least 2");
  if (y_.rows() != q || z_.rows() != q) throw ConeError("cone generator matrices must have q rows");
  if (numerical_rank(y_) != q) throw ConeError("cone C is not solid (rank of generators < q)");
  if (numerical_rank(z_) != q) throw ConeError("cone C is not pointed (rank of dual generators < q)");
  for (Eigen::Index j = 0; j < z_.cols(); ++j) {
    const double zc = z_.col(j).dot(c_);
    if (!(zc > 0.0)) {
      std::ostringstream os;
      os << "interior point c is not in int C: z^" << j + 1 << "'c = " << zc;
      throw ConeError(os.str());
    }
    z_.col(j) /= zc;
  }
  for (Eigen::Index j = 0; j < y_.cols(); ++j) {
    const double n = y_.col(j).norm();
    if (n <= 1e-12) throw ConeError("zero generator in cone C");
    y_.col(j) /= n;
  }
  const Mat zy = z_.transpose() * y_;
  if (zy.size() > 0 && zy.minCoeff() < -1e-12) {
    throw ConeError("dual generators are not in the dual cone: min z'y = " + std::to_string(zy.minCoeff()));
  }
}

OrderingCone OrderingCone::orthant(int q, const Vec& interior) {
  return OrderingCone(Mat::Identity(q, q), Mat::Identity(q, q), interior);
}

OrderingCone OrderingCone::from_dual(Mat dual_generators, Vec interior) {
  const int q = static_cast<int>(dual_generators.rows());
  HRep h;
  for (Eigen::Index j = 0; j < dual_generators.cols(); ++j) {
    h.halfspaces.push_back(make_halfspace(dual_generators.col(j), 0.0));
  }
  VRep v;
  try {
    v = enumerate_vertices(h, q);
  } catch (const LineError&) {
    throw ConeError("cone C given by its dual generators is not pointed");
  }
  if (v.rays.empty()) throw ConeError("cone C given by its dual generators is {0}");
  return OrderingCone(columns_of(v.rays, q), std::move(dual_generators), std::move(interior));
}

OrderingCone OrderingCone::from_generators(Mat generators, Vec interior) {
  const int q = static_cast<int>(generators.rows());
  VRep v;
  v.vertices.push_back(Vec::Zero(q));
  for (Eigen::Index j = 0; j < generators.cols(); ++j) {
    const double n = generators.col(j).norm();
    if (n <= 1e-12) throw ConeError("zero generator in cone C");
    v.rays.push_back(generators.col(j) / n);
  }
  const HRep h = hull(v, q);
  std::vector<Vec> normals;
  for (const auto& hs : h.halfspaces) {
    // An implicit equality shows up as a pair; C would not be solid.
    normals.push_back(hs.normal);
  }
  return OrderingCone(std::move(generators), columns_of(normals, q), std::move(interior));
}

bool OrderingCone::contains(const Vec& y, double tol) const {
  return (z_.transpose() * y).minCoeff() >= -tol;
}

bool OrderingCone::dual_contains(const Vec& w, double tol) const {
  return (y_.transpose() * w).minCoeff() >= -tol;
}

bool OrderingCone::on_dual_boundary(const Vec& w, double tol) const {
  return std::abs((y_.transpose() * w).minCoeff()) <= tol;
}

CvopProblem::CvopProblem(std::string name_, int n_, std::vector<Expr> objectives_, std::vector<Expr> constraints_,
                         Box box_, OrderingCone cone_)
    : name(std::move(name_)),
      n(n_),
      objectives(std::move(objectives_)),
      constraints(std::move(constraints_)),
      box(std::move(box_)),
      cone(std::move(cone_)) {
  if (n < 1) throw std::invalid_argument("problem needs at least one variable");
  if (q() < 2) throw ConeError("vector optimization needs q >= 2 objectives");
  if (cone.dim() != q()) throw ConeError("ordering cone dimension differs from the number of objectives");
  if (box.size() != n) throw std::invalid_argument("box size differs from the variable count");
  for (int i = 0; i < n; ++i) {
    if (box.lower(i) > box.upper(i)) throw std::invalid_argument("empty box on variable " + std::to_string(i));
  }
  auto check_arity = [&](const Expr& e, const std::string& what) {
    if (e.arity() > n) throw std::invalid_argument(what + " references a variable beyond n");
  };
  for (int i = 0; i < m(); ++i) {
    check_arity(constraints[i], "constraints[" + std::to_string(i) + "]");
    if (!constraints[i].is_convex()) {
      throw ConvexityError("constraints[" + std::to_string(i) + "] is not convex (curvature " +
                           to_string(constraints[i].curvature()) + ")");
    }
  }
  for (int i = 0; i < q(); ++i) check_arity(objectives[i], "objectives[" + std::to_string(i) + "]");
  for (int j = 0; j < cone.num_dual_generators(); ++j) {
    const Expr s = weighted_sum(cone.dual_generators().col(j), objectives);
    if (!s.is_convex()) {
      throw ConvexityError("objective is not C-convex: z^" + std::to_string(j + 1) + "'Gamma has curvature " +
                           to_string(s.curvature()));
    }
  }
}

void CvopProblem::check_domain(const Vec& x) const {
  if (x.size() != n) throw DomainError("point has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(n));
  if (!box.contains(x)) throw DomainError("point lies outside the variable box");
}

Vec CvopProblem::objective_values(const Vec& x) const {
  check_domain(x);
  Vec y(q());
  for (int i = 0; i < q(); ++i) y(i) = objectives[i].eval(x);
  return y;
}

Vec CvopProblem::constraint_values(const Vec& x) const {
  check_domain(x);
  Vec g(m());
  for (int i = 0; i < m(); ++i) g(i) = constraints[i].eval(x);
  return g;
}

bool CvopProblem::feasible(const Vec& x, double tol) const {
  if (x.size() != n || !box.contains(x, tol)) return false;
  for (const auto& g : constraints) {
    if (g.eval(x) > tol) return false;
  }
  return true;
}

bool CvopProblem::smooth() const {
  for (const auto& e : objectives) {
    if (!e.smooth()) return false;
  }
  for (const auto& e : constraints) {
    if (!e.smooth()) return false;
  }
  return true;
}

std::vector<Expr> reduce_D_cone(const std::vector<Expr>& g, const Mat& dual_generators) {
  if (dual_generators.rows() != static_cast<Eigen::Index>(g.size())) {
    throw std::invalid_argument("D dual generators must have one row per constraint");
  }
  const auto m = dual_generators.rows();
  if (dual_generators.cols() == m && dual_generators.isIdentity(0.0)) return g;
  std::vector<Expr> h;
  for (Eigen::Index i = 0; i < dual_generators.cols(); ++i) {
    Expr e = weighted_sum(dual_generators.col(i), g);
    if (!e.is_convex()) {
      throw ConvexityError("reduced constraint h_" + std::to_string(i + 1) + " = d_" + std::to_string(i + 1) +
                           "'g is not convex (curvature " + to_string(e.curvature()) + ")");
    }
    h.push_back(std::move(e));
  }
  return h;
}

}  // namespace benson
