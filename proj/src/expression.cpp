#include "cflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cflow/types.hpp"

namespace cflow {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Ln, Sin, Cos, Sqrt };

struct Expression::Node {
  Op op = Op::Const;
  double value = 0.0;
  std::size_t var = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double value) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Const;
  n->value = value;
  return n;
}

NodePtr make_var(std::size_t index) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Var;
  n->var = index;
  return n;
}

bool is_const(const NodePtr& n, double value) { return n->op == Op::Const && n->value == value; }

// Builders fold constants and drop neutral elements so that derivative trees
// stay small.
NodePtr make_unary(Op op, NodePtr a) {
  if (a->op == Op::Const) {
    double x = a->value;
    switch (op) {
      case Op::Neg: return make_const(-x);
      case Op::Exp: return make_const(std::exp(x));
      case Op::Ln: return make_const(std::log(x));
      case Op::Sin: return make_const(std::sin(x));
      case Op::Cos: return make_const(std::cos(x));
      case Op::Sqrt: return make_const(std::sqrt(x));
      default: break;
    }
  }
  if (op == Op::Neg && a->op == Op::Neg) return a->a;
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  if (a->op == Op::Const && b->op == Op::Const) {
    double x = a->value, y = b->value;
    switch (op) {
      case Op::Add: return make_const(x + y);
      case Op::Sub: return make_const(x - y);
      case Op::Mul: return make_const(x * y);
      case Op::Div: return make_const(x / y);
      case Op::Pow: return make_const(std::pow(x, y));
      default: break;
    }
  }
  switch (op) {
    case Op::Add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::Sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make_unary(Op::Neg, b);
      break;
    case Op::Mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case Op::Div:
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case Op::Pow:
      if (is_const(b, 0.0)) return make_const(1.0);
      if (is_const(b, 1.0)) return a;
      break;
    default: break;
  }
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "expression \"" << src_ << "\" at column " << pos_ + 1 << ": " << msg;
    throw ConfigError("", os.str());
  }

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

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) n = make_binary(Op::Add, n, term());
      else if (accept('-')) n = make_binary(Op::Sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make_binary(Op::Mul, n, unary());
      else if (accept('/')) n = make_binary(Op::Div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_unary(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_binary(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size()) {
      pos_ = start;
      fail("malformed number '" + text + "'");
    }
    return make_const(value);
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return make_var(i);

    static const std::pair<const char*, Op> functions[] = {
        {"exp", Op::Exp}, {"ln", Op::Ln},   {"log", Op::Ln},
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"sqrt", Op::Sqrt}};
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        if (!accept('(')) fail("expected '(' after " + name);
        NodePtr arg = expr();
        if (!accept(')')) fail("expected ')'");
        return make_unary(op, arg);
      }
    }
    if (name == "pi") return make_const(std::numbers::pi);
    if (name == "e") return make_const(std::numbers::e);
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

double eval(const Expression::Node& n, std::span<const double> x) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x[n.var];
    case Op::Add: return eval(*n.a, x) + eval(*n.b, x);
    case Op::Sub: return eval(*n.a, x) - eval(*n.b, x);
    case Op::Mul: return eval(*n.a, x) * eval(*n.b, x);
    case Op::Div: return eval(*n.a, x) / eval(*n.b, x);
    case Op::Pow: {
      // Integer exponents go through repeated multiplication so negative
      // bases behave (e.g. q1^2 with q1 < 0).
      double base = eval(*n.a, x);
      if (n.b->op == Op::Const) {
        double e = n.b->value;
        if (e == 2.0) return base * base;
        if (e == 3.0) return base * base * base;
      }
      return std::pow(base, eval(*n.b, x));
    }
    case Op::Neg: return -eval(*n.a, x);
    case Op::Exp: return std::exp(eval(*n.a, x));
    case Op::Ln: return std::log(eval(*n.a, x));
    case Op::Sin: return std::sin(eval(*n.a, x));
    case Op::Cos: return std::cos(eval(*n.a, x));
    case Op::Sqrt: return std::sqrt(eval(*n.a, x));
  }
  return 0.0;
}

bool depends(const Expression::Node& n, std::size_t var) {
  if (n.op == Op::Var) return n.var == var;
  if (n.op == Op::Const) return false;
  return (n.a && depends(*n.a, var)) || (n.b && depends(*n.b, var));
}

NodePtr diff(const NodePtr& n, std::size_t var) {
  if (!depends(*n, var)) return make_const(0.0);
  const NodePtr& a = n->a;
  const NodePtr& b = n->b;
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(1.0);
    case Op::Add: return make_binary(Op::Add, diff(a, var), diff(b, var));
    case Op::Sub: return make_binary(Op::Sub, diff(a, var), diff(b, var));
    case Op::Mul:
      return make_binary(Op::Add, make_binary(Op::Mul, diff(a, var), b),
                         make_binary(Op::Mul, a, diff(b, var)));
    case Op::Div:
      return make_binary(
          Op::Div,
          make_binary(Op::Sub, make_binary(Op::Mul, diff(a, var), b),
                      make_binary(Op::Mul, a, diff(b, var))),
          make_binary(Op::Pow, b, make_const(2.0)));
    case Op::Pow:
      if (!depends(*b, var)) {
        // d(a^c) = c a^(c-1) a'
        NodePtr exponent = make_binary(Op::Sub, b, make_const(1.0));
        return make_binary(Op::Mul, make_binary(Op::Mul, b, make_binary(Op::Pow, a, exponent)),
                           diff(a, var));
      }
      // d(a^b) = a^b (b' ln a + b a'/a)
      return make_binary(
          Op::Mul, n,
          make_binary(Op::Add, make_binary(Op::Mul, diff(b, var), make_unary(Op::Ln, a)),
                      make_binary(Op::Div, make_binary(Op::Mul, b, diff(a, var)), a)));
    case Op::Neg: return make_unary(Op::Neg, diff(a, var));
    case Op::Exp: return make_binary(Op::Mul, n, diff(a, var));
    case Op::Ln: return make_binary(Op::Div, diff(a, var), a);
    case Op::Sin: return make_binary(Op::Mul, make_unary(Op::Cos, a), diff(a, var));
    case Op::Cos:
      return make_unary(Op::Neg, make_binary(Op::Mul, make_unary(Op::Sin, a), diff(a, var)));
    case Op::Sqrt:
      return make_binary(Op::Div, diff(a, var), make_binary(Op::Mul, make_const(2.0), n));
  }
  return make_const(0.0);
}

void print(const Expression::Node& n, const std::vector<std::string>& vars, std::ostream& os) {
  auto fn = [&](const char* name) {
    os << name << '(';
    print(*n.a, vars, os);
    os << ')';
  };
  auto bin = [&](const char* sym) {
    os << '(';
    print(*n.a, vars, os);
    os << sym;
    print(*n.b, vars, os);
    os << ')';
  };
  switch (n.op) {
    case Op::Const: os << n.value; break;
    case Op::Var: os << vars[n.var]; break;
    case Op::Add: bin("+"); break;
    case Op::Sub: bin("-"); break;
    case Op::Mul: bin("*"); break;
    case Op::Div: bin("/"); break;
    case Op::Pow: bin("^"); break;
    case Op::Neg:
      os << "(-";
      print(*n.a, vars, os);
      os << ')';
      break;
    case Op::Exp: fn("exp"); break;
    case Op::Ln: fn("ln"); break;
    case Op::Sin: fn("sin"); break;
    case Op::Cos: fn("cos"); break;
    case Op::Sqrt: fn("sqrt"); break;
  }
}

}  // namespace

Expression::Expression() : root_(make_const(0.0)) {}

Expression::Expression(std::shared_ptr<const Node> root, std::vector<std::string> variables)
    : root_(std::move(root)), variables_(std::move(variables)) {}

Expression Expression::parse(std::string_view source, std::vector<std::string> variables) {
  Parser parser(source, variables);
  NodePtr root = parser.parse();
  return Expression(std::move(root), std::move(variables));
}

Expression Expression::constant(double value, std::vector<std::string> variables) {
  return Expression(make_const(value), std::move(variables));
}

double Expression::evaluate(std::span<const double> values) const {
  if (values.size() < variables_.size())
    throw EvaluationError("expression expects " + std::to_string(variables_.size()) +
                          " variables, got " + std::to_string(values.size()));
  return eval(*root_, values);
}

Expression Expression::derivative(std::size_t index) const {
  return Expression(diff(root_, index), variables_);
}

bool Expression::depends_on(std::size_t index) const { return depends(*root_, index); }

bool Expression::is_constant() const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (depends_on(i)) return false;
  return true;
}

std::string Expression::to_string() const {
  std::ostringstream os;
  os.precision(17);
  print(*root_, variables_, os);
  return os.str();
}

std::vector<std::string> position_variables(int dimension) {
  std::vector<std::string> vars{"t"};
  for (int i = 1; i <= dimension; ++i) vars.push_back("q" + std::to_string(i));
  return vars;
}

std::vector<std::string> phase_variables(int dimension) {
  auto vars = position_variables(dimension);
  for (int i = 1; i <= dimension; ++i) vars.push_back("v" + std::to_string(i));
  return vars;
}

}  // namespace cflow
