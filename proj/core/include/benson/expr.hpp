#pragma once

// Expression trees for objective and constraint functions. Nodes are
// immutable and shared; an Expr is a cheap handle.

#include "benson/polyhedron.hpp"

#include <memory>
#include <string>
#include <vector>

namespace benson {

enum class Curvature { Constant, Affine, Convex, Concave, Unknown };

const char* to_string(Curvature c);

class Expr {
 public:
  enum class Kind { Constant, Variable, Sum, Scaled, Affine, Power, Exp, Abs, QuadForm, Max };

  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr variable(int index);
  static Expr sum(std::vector<Expr> terms);
  static Expr scaled(double coef, Expr arg);
  /// coef' x + offset over the first coef.size() variables.
  static Expr affine(Vec coef, double offset);
  static Expr square(Expr arg) { return power(std::move(arg), 2); }
  /// arg^p for an even p >= 2.
  static Expr power(Expr arg, int p);
  static Expr exp(Expr arg);
  static Expr abs(Expr arg);
  /// u' Q u with u = (args[0], ..., args[k-1]); Q must be symmetric PSD.
  static Expr quad_form(Mat q, std::vector<Expr> args);
  static Expr max(std::vector<Expr> args);

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] Curvature curvature() const;
  [[nodiscard]] bool is_convex() const;
  /// False when the tree contains abs or max nodes.
  [[nodiscard]] bool smooth() const;
  /// One past the largest variable index referenced.
  [[nodiscard]] int arity() const;

  [[nodiscard]] double eval(const Vec& x) const;
  /// Gradient where differentiable. At kinks: abs(0) contributes 0 and tied
  /// max branches are averaged.
  [[nodiscard]] Vec subgradient(const Vec& x) const;
  /// Hessian of a smooth expression (nonsmooth nodes contribute 0).
  [[nodiscard]] Mat hessian(const Vec& x) const;

  /// Accumulates value, gradient and Hessian into caller-owned buffers of
  /// size n; `weight` scales the contribution.
  void accumulate(const Vec& x, double weight, double& value, Vec* grad, Mat* hess) const;

  [[nodiscard]] const std::vector<Expr>& children() const;
  [[nodiscard]] double scalar() const;  // constant value, scale coef, affine offset
  [[nodiscard]] int index() const;      // variable index or power exponent
  [[nodiscard]] const Vec& coef() const;
  [[nodiscard]] const Mat& matrix() const;

  /// Compact prefix rendering, e.g. "sum(square(aff), var(1))".
  [[nodiscard]] std::string str() const;

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator*(double coef, const Expr& e);

/// Sum_i weights[i] * exprs[i], skipping zero weights.
Expr weighted_sum(const Vec& weights, const std::vector<Expr>& exprs);

}  // namespace benson
