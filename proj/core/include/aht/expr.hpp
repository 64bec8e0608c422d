#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "aht/jet.hpp"

namespace aht {

class ExprSyntaxError : public std::runtime_error {
 public:
  ExprSyntaxError(std::size_t offset, const std::string& message)
      : std::runtime_error("offset " + std::to_string(offset) + ": " + message), offset_(offset), message_(message) {}
  std::size_t offset() const { return offset_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t offset_;
  std::string message_;
};

/// Evaluation failure carrying the byte range of the failing subexpression.
class ExprEvalError : public std::runtime_error {
 public:
  ExprEvalError(std::size_t begin, std::size_t end, const std::string& what)
      : std::runtime_error(what), begin_(begin), end_(end) {}
  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }

 private:
  std::size_t begin_, end_;
};

enum class ExprKind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt };

struct ExprNode {
  ExprKind kind;
  double number = 0.0;  // Number
  int index = 0;        // Variable: 1-based coordinate; Pow: integer exponent
  std::shared_ptr<const ExprNode> lhs, rhs;
  std::size_t begin = 0, end = 0;  // source byte range
};

class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> root, std::string source = {})
      : root_(std::move(root)), source_(std::move(source)) {}

  const ExprNode& root() const { return *root_; }
  const std::string& source() const { return source_; }
  bool empty() const { return !root_; }

  /// Largest variable index referenced (0 when none).
  int max_variable() const;

  /// Fully parenthesized text that parses back to the same tree.
  std::string to_string() const;

  template <class Scalar>
  Scalar eval(std::span<const Scalar> x) const;

  double eval_double(std::span<const double> x) const { return eval<double>(x); }

 private:
  std::shared_ptr<const ExprNode> root_;
  std::string source_;
};

Expr parse_expr(std::string_view src);

/// Structural equality of two trees (source ranges ignored).
bool same_tree(const ExprNode& a, const ExprNode& b);

/// Jet of e at the point with the given degree.
Jet eval_expr(const Expr& e, std::span<const double> point, int degree);

namespace detail {

template <class Scalar>
Scalar eval_node(const ExprNode& n, std::span<const Scalar> x) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  auto fail = [&](const std::string& why) -> ExprEvalError {
    return ExprEvalError(n.begin, n.end,
                         "bytes [" + std::to_string(n.begin) + "," + std::to_string(n.end) + "): " + why);
  };
  switch (n.kind) {
    case ExprKind::Number:
      return scalar_like(x[0], n.number);
    case ExprKind::Variable:
      if (n.index < 1 || static_cast<std::size_t>(n.index) > x.size())
        throw fail("variable x" + std::to_string(n.index) + " exceeds the chart dimension " +
                   std::to_string(x.size()));
      return x[static_cast<std::size_t>(n.index - 1)];
    case ExprKind::Neg:
      return -eval_node(*n.lhs, x);
    case ExprKind::Add:
      return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
    case ExprKind::Sub:
      return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
    case ExprKind::Mul:
      return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
    case ExprKind::Div: {
      Scalar num = eval_node(*n.lhs, x);
      Scalar den = eval_node(*n.rhs, x);
      double d0;
      d0 = value_of(den);
      if (d0 == 0.0) throw fail("division by zero");
      return num / den;
    }
    case ExprKind::Pow: {
      Scalar base = eval_node(*n.lhs, x);
      int k = n.index;
      Scalar result = scalar_like(base, 1.0);
      for (int i = 0; i < (k < 0 ? -k : k); ++i) result = result * base;
      if (k < 0) {
        double r0;
        r0 = value_of(result);
        if (r0 == 0.0) throw fail("division by zero");
        return scalar_like(base, 1.0) / result;
      }
      return result;
    }
    case ExprKind::Sin:
      return sin(eval_node(*n.lhs, x));
    case ExprKind::Cos:
      return cos(eval_node(*n.lhs, x));
    case ExprKind::Exp:
      return exp(eval_node(*n.lhs, x));
    case ExprKind::Log:
    case ExprKind::Sqrt: {
      Scalar arg = eval_node(*n.lhs, x);
      double a0;
      a0 = value_of(arg);
      if (n.kind == ExprKind::Log) {
        if (!(a0 > 0.0)) throw fail("log of non-positive value " + std::to_string(a0));
        return log(arg);
      }
      if (a0 < 0.0 || (a0 == 0.0 && !std::is_same_v<Scalar, double>))
        throw fail("sqrt of non-positive value " + std::to_string(a0));
      return sqrt(arg);
    }
  }
  throw fail("unknown node");
}

}  // namespace detail

template <class Scalar>
Scalar Expr::eval(std::span<const Scalar> x) const {
  if (!root_) throw std::logic_error("evaluating an empty expression");
  if (x.empty()) throw std::invalid_argument("expression evaluated on an empty point");
  return detail::eval_node<Scalar>(*root_, x);
}

}  // namespace aht
