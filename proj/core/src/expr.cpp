#include "benson/expr.hpp"

#include "benson/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace benson {

struct Expr::Node {
  Kind kind = Kind::Constant;
  double scalar = 0.0;  // constant, scale factor, affine offset
  int index = 0;        // variable index, power exponent
  Vec coef;             // affine coefficients
  Mat matrix;           // quadratic form
  std::vector<Expr> children;
  Curvature curvature = Curvature::Constant;
  bool smooth = true;
  int arity = 0;
};

namespace {

Curvature add_curvature(Curvature a, Curvature b) {
  using C = Curvature;
  if (a == C::Unknown || b == C::Unknown) return C::Unknown;
  if (a == C::Constant) return b;
  if (b == C::Constant) return a;
  if (a == C::Affine) return b;
  if (b == C::Affine) return a;
  return a == b ? a : C::Unknown;
}

Curvature negate(Curvature c) {
  switch (c) {
    case Curvature::Convex: return Curvature::Concave;
    case Curvature::Concave: return Curvature::Convex;
    default: return c;
  }
}

bool affine_like(Curvature c) { return c == Curvature::Constant || c == Curvature::Affine; }
bool convex_like(Curvature c) { return affine_like(c) || c == Curvature::Convex; }

int max_arity(const std::vector<Expr>& xs) {
  int a = 0;
  for (const auto& x : xs) a = std::max(a, x.arity());
  return a;
}

bool all_smooth(const std::vector<Expr>& xs) {
  return std::all_of(xs.begin(), xs.end(), [](const Expr& e) { return e.smooth(); });
}

struct Local {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

Local local_eval(const Expr& e, const Vec& x, bool want_grad, bool want_hess) {
  Local l;
  const auto n = x.size();
  if (want_grad) l.grad = Vec::Zero(n);
  if (want_hess) l.hess = Mat::Zero(n, n);
  e.accumulate(x, 1.0, l.value, want_grad ? &l.grad : nullptr, want_hess ? &l.hess : nullptr);
  return l;
}

}  // namespace

const char* to_string(Curvature c) {
  switch (c) {
    case Curvature::Constant: return "constant";
    case Curvature::Affine: return "affine";
    case Curvature::Convex: return "convex";
    case Curvature::Concave: return "concave";
    case Curvature::Unknown: return "unknown";
  }
  return "unknown";
}

Expr::Expr() : Expr(constant(0.0)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->scalar = value;
  return Expr(std::move(n));
}

Expr Expr::variable(int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->index = index;
  n->curvature = Curvature::Affine;
  n->arity = index + 1;
  return Expr(std::move(n));
}

Expr Expr::sum(std::vector<Expr> terms) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sum;
  n->curvature = Curvature::Constant;
  for (const auto& t : terms) n->curvature = add_curvature(n->curvature, t.curvature());
  n->smooth = all_smooth(terms);
  n->arity = max_arity(terms);
  n->children = std::move(terms);
  return Expr(std::move(n));
}

Expr Expr::scaled(double coef, Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Scaled;
  n->scalar = coef;
  n->curvature = coef == 0.0 ? Curvature::Constant : (coef > 0 ? arg.curvature() : negate(arg.curvature()));
  n->smooth = arg.smooth();
  n->arity = arg.arity();
  n->children.push_back(std::move(arg));
  return Expr(std::move(n));
}

Expr Expr::affine(Vec coef, double offset) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Affine;
  n->scalar = offset;
  n->curvature = coef.isZero(0.0) ? Curvature::Constant : Curvature::Affine;
  n->arity = static_cast<int>(coef.size());
  n->coef = std::move(coef);
  return Expr(std::move(n));
}

Expr Expr::power(Expr arg, int p) {
  if (p < 2 || p % 2 != 0) throw ConvexityError("power exponent must be an even integer >= 2, got " + std::to_string(p));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Power;
  n->index = p;
  const Curvature c = arg.curvature();
  n->curvature = c == Curvature::Constant ? Curvature::Constant : (c == Curvature::Affine ? Curvature::Convex : Curvature::Unknown);
  n->smooth = arg.smooth();
  n->arity = arg.arity();
  n->children.push_back(std::move(arg));
  return Expr(std::move(n));
}

Expr Expr::exp(Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Exp;
  const Curvature c = arg.curvature();
  n->curvature = c == Curvature::Constant ? Curvature::Constant : (convex_like(c) ? Curvature::Convex : Curvature::Unknown);
  n->smooth = arg.smooth();
  n->arity = arg.arity();
  n->children.push_back(std::move(arg));
  return Expr(std::move(n));
}

Expr Expr::abs(Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Abs;
  const Curvature c = arg.curvature();
  n->curvature = c == Curvature::Constant ? Curvature::Constant : (c == Curvature::Affine ? Curvature::Convex : Curvature::Unknown);
  n->smooth = false;
  n->arity = arg.arity();
  n->children.push_back(std::move(arg));
  return Expr(std::move(n));
}

Expr Expr::quad_form(Mat q, std::vector<Expr> args) {
  if (q.rows() != q.cols() || q.rows() != static_cast<Eigen::Index>(args.size())) {
    throw std::invalid_argument("quadratic form needs a square matrix matching the argument count");
  }
  if (!q.isApprox(q.transpose(), 1e-12) && !(q - q.transpose()).isZero(1e-12)) {
    throw ConvexityError("quadratic form matrix is not symmetric");
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::QuadForm;
  bool args_affine = std::all_of(args.begin(), args.end(), [](const Expr& e) { return affine_like(e.curvature()); });
  bool psd = true;
  if (q.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (q + q.transpose()));
    psd = eig.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  n->curvature = (args_affine && psd) ? Curvature::Convex : Curvature::Unknown;
  n->smooth = all_smooth(args);
  n->arity = max_arity(args);
  n->matrix = 0.5 * (q + q.transpose());
  n->children = std::move(args);
  return Expr(std::move(n));
}

Expr Expr::max(std::vector<Expr> args) {
  if (args.empty()) throw std::invalid_argument("max of an empty list");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Max;
  bool all_const = true;
  bool all_convex = true;
  for (const auto& a : args) {
    all_const = all_const && a.curvature() == Curvature::Constant;
    all_convex = all_convex && convex_like(a.curvature());
  }
  n->curvature = all_const ? Curvature::Constant : (all_convex ? Curvature::Convex : Curvature::Unknown);
  n->smooth = false;
  n->arity = max_arity(args);
  n->children = std::move(args);
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
Curvature Expr::curvature() const { return node_->curvature; }
bool Expr::is_convex() const { return convex_like(node_->curvature); }
bool Expr::smooth() const { return node_->smooth; }
int Expr::arity() const { return node_->arity; }
const std::vector<Expr>& Expr::children() const { return node_->children; }
double Expr::scalar() const { return node_->scalar; }
int Expr::index() const { return node_->index; }
const Vec& Expr::coef() const { return node_->coef; }
const Mat& Expr::matrix() const { return node_->matrix; }

double Expr::eval(const Vec& x) const {
  double v = 0.0;
  accumulate(x, 1.0, v, nullptr, nullptr);
  return v;
}

Vec Expr::subgradient(const Vec& x) const {
  double v = 0.0;
  Vec g = Vec::Zero(x.size());
  accumulate(x, 1.0, v, &g, nullptr);
  return g;
}

Mat Expr::hessian(const Vec& x) const {
  double v = 0.0;
  Mat h = Mat::Zero(x.size(), x.size());
  accumulate(x, 1.0, v, nullptr, &h);
  return h;
}

void Expr::accumulate(const Vec& x, double w, double& value, Vec* grad, Mat* hess) const {
  const Node& n = *node_;
  if (n.arity > x.size()) {
    throw std::out_of_range("expression references variable " + std::to_string(n.arity - 1) + " but point has size " +
                            std::to_string(x.size()));
  }
  switch (n.kind) {
    case Kind::Constant:
      value += w * n.scalar;
      return;
    case Kind::Variable:
      value += w * x(n.index);
      if (grad) (*grad)(n.index) += w;
      return;
    case Kind::Affine: {
      const auto k = n.coef.size();
      value += w * (n.coef.dot(x.head(k)) + n.scalar);
      if (grad) grad->head(k) += w * n.coef;
      return;
    }
    case Kind::Sum:
      for (const auto& c : n.children) c.accumulate(x, w, value, grad, hess);
      return;
    case Kind::Scaled:
      if (n.scalar != 0.0) n.children.front().accumulate(x, w * n.scalar, value, grad, hess);
      return;
    case Kind::Power: {
      const Local u = local_eval(n.children.front(), x, grad || hess, hess != nullptr);
      const int p = n.index;
      value += w * std::pow(u.value, p);
      if (grad) *grad += (w * p * std::pow(u.value, p - 1)) * u.grad;
      if (hess) {
        *hess += (w * p * (p - 1) * std::pow(u.value, p - 2)) * (u.grad * u.grad.transpose());
        *hess += (w * p * std::pow(u.value, p - 1)) * u.hess;
      }
      return;
    }
    case Kind::Exp: {
      const Local u = local_eval(n.children.front(), x, grad || hess, hess != nullptr);
      const double e = std::exp(u.value);
      value += w * e;
      if (grad) *grad += (w * e) * u.grad;
      if (hess) *hess += (w * e) * (u.grad * u.grad.transpose() + u.hess);
      return;
    }
    case Kind::Abs: {
      const Local u = local_eval(n.children.front(), x, grad != nullptr, hess != nullptr);
      const double s = u.value > 0 ? 1.0 : (u.value < 0 ? -1.0 : 0.0);
      value += w * std::abs(u.value);
      if (grad) *grad += (w * s) * u.grad;
      if (hess) *hess += (w * s) * u.hess;
      return;
    }
    case Kind::QuadForm: {
      const auto k = static_cast<Eigen::Index>(n.children.size());
      Vec u(k);
      Mat jac(k, x.size());
      for (Eigen::Index i = 0; i < k; ++i) {
        const Local li = local_eval(n.children[static_cast<std::size_t>(i)], x, grad || hess, false);
        u(i) = li.value;
        if (grad || hess) jac.row(i) = li.grad.transpose();
      }
      const Vec qu = n.matrix * u;
      value += w * u.dot(qu);
      if (grad) *grad += (2.0 * w) * (jac.transpose() * qu);
      if (hess) *hess += (2.0 * w) * (jac.transpose() * n.matrix * jac);
      return;
    }
    case Kind::Max: {
      std::vector<Local> branches;
      branches.reserve(n.children.size());
      double m = -std::numeric_limits<double>::infinity();
      for (const auto& c : n.children) {
        branches.push_back(local_eval(c, x, grad != nullptr, hess != nullptr));
        m = std::max(m, branches.back().value);
      }
      value += w * m;
      if (grad || hess) {
        const double tie = 1e-12 * (1.0 + std::abs(m));
        int count = 0;
        for (const auto& b : branches) count += (b.value >= m - tie) ? 1 : 0;
        for (const auto& b : branches) {
          if (b.value < m - tie) continue;
          if (grad) *grad += (w / count) * b.grad;
          if (hess) *hess += (w / count) * b.hess;
        }
      }
      return;
    }
  }
}

std::string Expr::str() const {
  const Node& n = *node_;
  std::ostringstream os;
  auto list = [&](const char* name) {
    os << name << '(';
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) os << ", ";
      os << n.children[i].str();
    }
    os << ')';
  };
  switch (n.kind) {
    case Kind::Constant: os << n.scalar; break;
    case Kind::Variable: os << "x" << n.index; break;
    case Kind::Affine: os << "aff[" << n.coef.transpose() << "; " << n.scalar << "]"; break;
    case Kind::Sum: list("sum"); break;
    case Kind::Scaled: os << n.scalar << "*" << n.children.front().str(); break;
    case Kind::Power: os << "pow(" << n.children.front().str() << ", " << n.index << ")"; break;
    case Kind::Exp: list("exp"); break;
    case Kind::Abs: list("abs"); break;
    case Kind::QuadForm: list("quadform"); break;
    case Kind::Max: list("max"); break;
  }
  return os.str();
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator*(double coef, const Expr& e) { return Expr::scaled(coef, e); }

namespace {

// Exact structural key of a nonlinear atom.
void write_key(const Expr& e, std::ostringstream& os) {
  os << static_cast<int>(e.kind()) << '{';
  switch (e.kind()) {
    case Expr::Kind::Constant:
    case Expr::Kind::Scaled:
      os << e.scalar();
      break;
    case Expr::Kind::Variable:
    case Expr::Kind::Power:
      os << e.index();
      break;
    case Expr::Kind::Affine:
      for (Eigen::Index i = 0; i < e.coef().size(); ++i) os << e.coef()(i) << ',';
      os << e.scalar();
      break;
    case Expr::Kind::QuadForm:
      for (Eigen::Index i = 0; i < e.matrix().size(); ++i) os << e.matrix().data()[i] << ',';
      break;
    default:
      break;
  }
  for (const auto& c : e.children()) write_key(c, os);
  os << '}';
}

struct LinearForm {
  Vec linear;
  double constant = 0.0;
  std::vector<std::pair<std::string, std::pair<double, Expr>>> atoms;  // key -> (coef, atom)

  void add_atom(double w, const Expr& e) {
    std::ostringstream os;
    os.precision(17);
    write_key(e, os);
    const std::string key = os.str();
    for (auto& [k, entry] : atoms) {
      if (k == key) {
        entry.first += w;
        return;
      }
    }
    atoms.push_back({key, {w, e}});
  }

  void add(double w, const Expr& e) {
    switch (e.kind()) {
      case Expr::Kind::Constant:
        constant += w * e.scalar();
        break;
      case Expr::Kind::Variable:
        linear(e.index()) += w;
        break;
      case Expr::Kind::Affine:
        linear.head(e.coef().size()) += w * e.coef();
        constant += w * e.scalar();
        break;
      case Expr::Kind::Sum:
        for (const auto& c : e.children()) add(w, c);
        break;
      case Expr::Kind::Scaled:
        add(w * e.scalar(), e.children().front());
        break;
      default:
        add_atom(w, e);
    }
  }
};

// sum_i w_i e_i with equal atoms merged, so that cancellations such as
// x^2 - x^2/2 are visible to the curvature rules.
Expr canonical_sum(const Vec& weights, const std::vector<Expr>& exprs) {
  int n = 0;
  for (const auto& e : exprs) n = std::max(n, e.arity());
  LinearForm f;
  f.linear = Vec::Zero(n);
  for (std::size_t i = 0; i < exprs.size(); ++i) f.add(weights(static_cast<Eigen::Index>(i)), exprs[i]);
  double scale = 0.0;
  for (const auto& a : f.atoms) scale = std::max(scale, std::abs(a.second.first));
  std::vector<Expr> terms;
  for (const auto& a : f.atoms) {
    const double w = a.second.first;
    if (std::abs(w) <= 1e-12 * scale) continue;
    terms.push_back(w == 1.0 ? a.second.second : Expr::scaled(w, a.second.second));
  }
  if (n > 0) terms.push_back(Expr::affine(f.linear, f.constant));
  else terms.push_back(Expr::constant(f.constant));
  if (terms.size() == 1) return terms.front();
  return Expr::sum(std::move(terms));
}

}  // namespace

Expr weighted_sum(const Vec& weights, const std::vector<Expr>& exprs) {
  if (weights.size() != static_cast<Eigen::Index>(exprs.size())) {
    throw std::invalid_argument("weighted_sum: size mismatch");
  }
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    const double wi = weights(static_cast<Eigen::Index>(i));
    if (wi == 0.0) continue;
    terms.push_back(wi == 1.0 ? exprs[i] : Expr::scaled(wi, exprs[i]));
  }
  if (terms.empty()) return Expr::constant(0.0);
  Expr naive = terms.size() == 1 ? terms.front() : Expr::sum(std::move(terms));
  if (naive.curvature() != Curvature::Unknown) return naive;
  Expr merged = canonical_sum(weights, exprs);
  return merged.curvature() != Curvature::Unknown ? merged : naive;
}

}  // namespace benson
