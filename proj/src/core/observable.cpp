#include "core/observable.h"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace bernkoop {

namespace {

// Forward-mode dual number carrying a dense gradient.
struct Dual {
  double v;
  Vec g;

  static Dual constant(double c, int m) { return {c, Vec(m, 0.0)}; }
  static Dual variable(double c, int m, int i) {
    Dual d{c, Vec(m, 0.0)};
    d.g[i] = 1.0;
    return d;
  }
};

Dual operator+(const Dual& a, const Dual& b) {
  Dual r{a.v + b.v, a.g};
  for (std::size_t i = 0; i < r.g.size(); ++i) r.g[i] += b.g[i];
  return r;
}

Dual operator-(const Dual& a, const Dual& b) {
  Dual r{a.v - b.v, a.g};
  for (std::size_t i = 0; i < r.g.size(); ++i) r.g[i] -= b.g[i];
  return r;
}

Dual operator*(const Dual& a, const Dual& b) {
  Dual r{a.v * b.v, Vec(a.g.size())};
  for (std::size_t i = 0; i < r.g.size(); ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  return r;
}

Dual operator/(const Dual& a, const Dual& b) {
  Dual r{a.v / b.v, Vec(a.g.size())};
  for (std::size_t i = 0; i < r.g.size(); ++i)
    r.g[i] = (a.g[i] * b.v - a.v * b.g[i]) / (b.v * b.v);
  return r;
}

Dual pow_dual(const Dual& a, const Dual& b) {
  const bool integer_exp = b.g == Vec(b.g.size(), 0.0) && b.v == std::floor(b.v);
  if (integer_exp) {
    int p = static_cast<int>(b.v);
    const bool inv = p < 0;
    if (inv) p = -p;
    Dual acc = Dual::constant(1.0, static_cast<int>(a.g.size()));
    Dual base = a;
    while (p > 0) {
      if (p & 1) acc = acc * base;
      base = base * base;
      p >>= 1;
    }
    if (inv) acc = Dual::constant(1.0, static_cast<int>(a.g.size())) / acc;
    return acc;
  }
  const double val = std::pow(a.v, b.v);
  Dual r{val, Vec(a.g.size())};
  for (std::size_t i = 0; i < r.g.size(); ++i)
    r.g[i] = val * (b.g[i] * std::log(a.v) + b.v * a.g[i] / a.v);
  return r;
}

struct ExprNode {
  enum Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg } kind;
  double value = 0.0;
  int var = 0;
  std::unique_ptr<ExprNode> a, b;
};

using NodePtr = std::unique_ptr<ExprNode>;

Dual eval_node(const ExprNode& n, const Vec& x) {
  const int m = static_cast<int>(x.size());
  switch (n.kind) {
    case ExprNode::Const: return Dual::constant(n.value, m);
    case ExprNode::Var: return Dual::variable(x[n.var], m, n.var);
    case ExprNode::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case ExprNode::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case ExprNode::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case ExprNode::Div: return eval_node(*n.a, x) / eval_node(*n.b, x);
    case ExprNode::Pow: return pow_dual(eval_node(*n.a, x), eval_node(*n.b, x));
    case ExprNode::Neg: {
      Dual r = eval_node(*n.a, x);
      r.v = -r.v;
      for (double& gi : r.g) gi = -gi;
      return r;
    }
  }
  throw Error(Status::ConfigError, "unreachable expression node");
}

class Parser {
 public:
  Parser(const std::string& src, int m) : src_(src), m_(m) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    require(pos_ == src_.size(), Status::ConfigError,
            "trailing characters in expression at position " + std::to_string(pos_));
    return e;
  }

 private:
  const std::string& src_;
  int m_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr left = term();
    for (;;) {
      if (consume('+')) {
        NodePtr n = std::make_unique<ExprNode>();
        n->kind = ExprNode::Add;
        n->a = std::move(left);
        n->b = term();
        left = std::move(n);
      } else if (consume('-')) {
        NodePtr n = std::make_unique<ExprNode>();
        n->kind = ExprNode::Sub;
        n->a = std::move(left);
        n->b = term();
        left = std::move(n);
      } else {
        return left;
      }
    }
  }

  NodePtr term() {
    NodePtr left = unary();
    for (;;) {
      if (consume('*')) {
        NodePtr n = std::make_unique<ExprNode>();
        n->kind = ExprNode::Mul;
        n->a = std::move(left);
        n->b = unary();
        left = std::move(n);
      } else if (consume('/')) {
        NodePtr n = std::make_unique<ExprNode>();
        n->kind = ExprNode::Div;
        n->a = std::move(left);
        n->b = unary();
        left = std::move(n);
      } else {
        return left;
      }
    }
  }

  NodePtr unary() {
    if (consume('-')) {
      NodePtr n = std::make_unique<ExprNode>();
      n->kind = ExprNode::Neg;
      n->a = unary();
      return n;
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (consume('^')) {
      NodePtr n = std::make_unique<ExprNode>();
      n->kind = ExprNode::Pow;
      n->a = std::move(base);
      n->b = unary();  // right-associative, allows negative exponents
      return n;
    }
    return base;
  }

  NodePtr primary() {
    skip_ws();
    require(pos_ < src_.size(), Status::ConfigError, "unexpected end of expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      require(consume(')'), Status::ConfigError, "missing closing parenthesis");
      return e;
    }
    if (c == 'x') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      require(pos_ > start, Status::ConfigError, "variable must be x1..x" + std::to_string(m_));
      const int idx = std::atoi(src_.substr(start, pos_ - start).c_str());
      require(idx >= 1 && idx <= m_, Status::ConfigError,
              "variable x" + std::to_string(idx) + " outside x1..x" + std::to_string(m_));
      NodePtr n = std::make_unique<ExprNode>();
      n->kind = ExprNode::Var;
      n->var = idx - 1;
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(src_.c_str() + pos_, &end);
      require(end != src_.c_str() + pos_, Status::ConfigError, "bad numeric literal");
      pos_ = static_cast<std::size_t>(end - src_.c_str());
      NodePtr n = std::make_unique<ExprNode>();
      n->kind = ExprNode::Const;
      n->value = v;
      return n;
    }
    throw Error(Status::ConfigError,
                std::string("unexpected character '") + c + "' in expression");
  }
};

}  // namespace

Observable make_observable(std::string label, int m,
                           std::function<double(const Vec&)> eval,
                           std::function<Vec(const Vec&)> gradient) {
  Observable o;
  o.label = std::move(label);
  o.m = m;
  o.eval = std::move(eval);
  o.gradient = std::move(gradient);
  return o;
}

Observable parse_observable(const std::string& expr, int m) {
  require(m >= 1, Status::ShapeError, "dimension must be >= 1");
  auto root = std::make_shared<NodePtr>(Parser(expr, m).parse());
  Observable o;
  o.label = expr;
  o.m = m;
  o.eval = [root](const Vec& x) { return eval_node(**root, x).v; };
  o.gradient = [root](const Vec& x) { return eval_node(**root, x).g; };
  return o;
}

}  // namespace bernkoop
