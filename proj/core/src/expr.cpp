#include "aht/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <numbers>

namespace aht {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(ExprKind kind, std::size_t begin, std::size_t end, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->begin = begin;
  n->end = end;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr root = expression();
    skip_ws();
    if (pos_ != src_.size()) throw ExprSyntaxError(pos_, "expected operator or end of input");
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(ExprKind::Add, lhs->begin, 0, lhs, term());
      } else if (accept('-')) {
        lhs = make(ExprKind::Sub, lhs->begin, 0, lhs, term());
      } else {
        return lhs;
      }
      const_cast<ExprNode&>(*lhs).end = lhs->rhs->end;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(ExprKind::Mul, lhs->begin, 0, lhs, unary());
      } else if (accept('/')) {
        lhs = make(ExprKind::Div, lhs->begin, 0, lhs, unary());
      } else {
        return lhs;
      }
      const_cast<ExprNode&>(*lhs).end = lhs->rhs->end;
    }
  }

  NodePtr unary() {
    skip_ws();
    const std::size_t begin = pos_;
    if (accept('-')) {
      NodePtr arg = unary();
      return make(ExprKind::Neg, begin, arg->end, arg);
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t at = pos_;
    bool negative = false;
    if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) {
      negative = src_[pos_] == '-';
      ++pos_;
    }
    std::size_t digits = pos_;
    while (digits < src_.size() && std::isdigit(static_cast<unsigned char>(src_[digits]))) ++digits;
    if (digits == pos_) throw ExprSyntaxError(at, "expected integer exponent");
    if (digits < src_.size() && (src_[digits] == '.' || src_[digits] == 'e' || src_[digits] == 'E'))
      throw ExprSyntaxError(at, "expected integer exponent");
    int k = 0;
    auto res = std::from_chars(src_.data() + pos_, src_.data() + digits, k);
    if (res.ec != std::errc() || k > 64) throw ExprSyntaxError(at, "exponent out of range");
    pos_ = digits;
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Pow;
    n->index = negative ? -k : k;
    n->lhs = base;
    n->begin = base->begin;
    n->end = pos_;
    return n;
  }

  NodePtr primary() {
    skip_ws();
    const std::size_t begin = pos_;
    if (pos_ >= src_.size()) throw ExprSyntaxError(pos_, "expected expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expression();
      if (!accept(')')) {
        skip_ws();
        throw ExprSyntaxError(pos_, "expected ')'");
      }
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ExprSyntaxError(begin, "expected expression");
  }

  NodePtr number() {
    const std::size_t begin = pos_;
    std::size_t end = pos_;
    while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t q = end + 1;
      if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
      if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
        end = q;
        while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(src_.data() + begin, src_.data() + end, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + end) throw ExprSyntaxError(begin, "malformed number");
    pos_ = end;
    auto n = make(ExprKind::Number, begin, end);
    const_cast<ExprNode&>(*n).number = value;
    return n;
  }

  NodePtr identifier() {
    const std::size_t begin = pos_;
    std::size_t end = pos_;
    while (end < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
      ++end;
    const std::string_view name = src_.substr(begin, end - begin);
    pos_ = end;

    struct Fn {
      std::string_view name;
      ExprKind kind;
    };
    static constexpr Fn functions[] = {{"sin", ExprKind::Sin}, {"cos", ExprKind::Cos}, {"exp", ExprKind::Exp},
                                       {"log", ExprKind::Log}, {"sqrt", ExprKind::Sqrt}};
    for (const auto& fn : functions) {
      if (name != fn.name) continue;
      if (!accept('(')) {
        skip_ws();
        throw ExprSyntaxError(pos_, "expected '(' after " + std::string(name));
      }
      NodePtr arg = expression();
      if (!accept(')')) {
        skip_ws();
        throw ExprSyntaxError(pos_, "expected ')'");
      }
      return make(fn.kind, begin, pos_, arg);
    }
    if (name == "pi" || name == "e") {
      auto n = make(ExprKind::Number, begin, end);
      const_cast<ExprNode&>(*n).number = name == "pi" ? std::numbers::pi : std::numbers::e;
      return n;
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int idx = 0;
      auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size() && idx >= 1 && name[1] != '0') {
        auto n = make(ExprKind::Variable, begin, end);
        const_cast<ExprNode&>(*n).index = idx;
        return n;
      }
    }
    throw ExprSyntaxError(begin, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

int max_var(const ExprNode& n) {
  int m = n.kind == ExprKind::Variable ? n.index : 0;
  if (n.lhs) m = std::max(m, max_var(*n.lhs));
  if (n.rhs) m = std::max(m, max_var(*n.rhs));
  return m;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void print(const ExprNode& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print(*n.lhs, out);
    out += op;
    print(*n.rhs, out);
    out += ')';
  };
  auto call = [&](const char* name) {
    out += name;
    out += '(';
    print(*n.lhs, out);
    out += ')';
  };
  switch (n.kind) {
    case ExprKind::Number:
      out += format_number(n.number);
      return;
    case ExprKind::Variable:
      out += 'x' + std::to_string(n.index);
      return;
    case ExprKind::Neg:
      out += "(-";
      print(*n.lhs, out);
      out += ')';
      return;
    case ExprKind::Add: binary(" + "); return;
    case ExprKind::Sub: binary(" - "); return;
    case ExprKind::Mul: binary(" * "); return;
    case ExprKind::Div: binary(" / "); return;
    case ExprKind::Pow:
      out += '(';
      print(*n.lhs, out);
      out += ")^" + std::to_string(n.index);
      return;
    case ExprKind::Sin: call("sin"); return;
    case ExprKind::Cos: call("cos"); return;
    case ExprKind::Exp: call("exp"); return;
    case ExprKind::Log: call("log"); return;
    case ExprKind::Sqrt: call("sqrt"); return;
  }
}

}  // namespace

Expr parse_expr(std::string_view src) { return Expr(Parser(src).parse(), std::string(src)); }

int Expr::max_variable() const { return root_ ? max_var(*root_) : 0; }

std::string Expr::to_string() const {
  std::string out;
  if (root_) print(*root_, out);
  return out;
}

bool same_tree(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == ExprKind::Number && a.number != b.number) return false;
  if ((a.kind == ExprKind::Variable || a.kind == ExprKind::Pow) && a.index != b.index) return false;
  if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
  if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
  if (a.lhs && !same_tree(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !same_tree(*a.rhs, *b.rhs)) return false;
  return true;
}

Jet eval_expr(const Expr& e, std::span<const double> point, int degree) {
  const auto xs = coordinate_jets(point, degree);
  return e.eval<Jet>(std::span<const Jet>(xs));
}

}  // namespace aht
