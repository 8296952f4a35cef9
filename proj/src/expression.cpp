#include "bergman/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include "bergman/error.hpp"

namespace bergman {

struct Expression::Node {
  enum class Op { Const, Var, ConjVar, Neg, Add, Sub, Mul, Div, Pow, Log, Exp, Sqrt, Conj, Abs2, Re, Im };
  Op op = Op::Const;
  double value = 0.0;
  int var = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr leaf(double v) {
  auto p = std::make_shared<Node>();
  p->value = v;
  return p;
}

NodePtr unary(Node::Op op, NodePtr a) {
  auto p = std::make_shared<Node>();
  p->op = op;
  p->a = std::move(a);
  return p;
}

NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
  auto p = std::make_shared<Node>();
  p->op = op;
  p->a = std::move(a);
  p->b = std::move(b);
  return p;
}

NodePtr variable(int j, bool conjugated) {
  auto p = std::make_shared<Node>();
  p->op = conjugated ? Node::Op::ConjVar : Node::Op::Var;
  p->var = j;
  return p;
}

class Parser {
 public:
  Parser(std::string_view s, int n, const std::map<std::string, double>& constants)
      : s_(s), n_(n), constants_(constants) {}

  NodePtr parse() {
    auto e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::ParseError, "column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Node::Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = binary(Node::Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Node::Op::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = binary(Node::Op::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    if (accept('-')) return unary(Node::Op::Neg, factor());
    if (accept('+')) return factor();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return binary(Node::Op::Pow, base, factor());
    return base;
  }

  std::string identifier() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  NodePtr number() {
    skip();
    std::string buf(s_.substr(pos_));
    char* end = nullptr;
    double v = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str()) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - buf.c_str());
    return leaf(v);
  }

  int var_index(const std::string& id) {
    if (id == "z") {
      if (n_ != 1) fail("bare 'z' is only allowed when n = 1");
      return 0;
    }
    if (id.size() > 2 && id.rfind("z_", 0) == 0) {
      int j = 0;
      for (std::size_t i = 2; i < id.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) return -1;
        j = j * 10 + (id[i] - '0');
      }
      if (j < 1 || j > n_) fail("variable " + id + " out of range 1.." + std::to_string(n_));
      return j - 1;
    }
    return -1;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (!std::isalpha(static_cast<unsigned char>(c))) fail(std::string("unexpected character '") + c + "'");

    const std::size_t id_pos = pos_;
    std::string id = identifier();
    if (int j = var_index(id); j >= 0) return variable(j, false);

    static const std::map<std::string, Node::Op> funcs{
        {"log", Node::Op::Log},   {"exp", Node::Op::Exp},   {"sqrt", Node::Op::Sqrt}, {"conj", Node::Op::Conj},
        {"abs2", Node::Op::Abs2}, {"re", Node::Op::Re},     {"im", Node::Op::Im}};
    if (auto f = funcs.find(id); f != funcs.end()) {
      expect('(');
      auto arg = expr();
      expect(')');
      if (f->second == Node::Op::Conj && arg->op == Node::Op::Var) return variable(arg->var, true);
      return unary(f->second, arg);
    }
    if (id == "pi") return leaf(std::numbers::pi);
    if (id == "e") return leaf(std::numbers::e);
    if (auto k = constants_.find(id); k != constants_.end()) return leaf(k->second);
    pos_ = id_pos;
    fail("unknown identifier '" + id + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int n_;
  const std::map<std::string, double>& constants_;
};

bool depends(const Node& node) {
  switch (node.op) {
    case Node::Op::Const: return false;
    case Node::Op::Var:
    case Node::Op::ConjVar: return true;
    default: return (node.a && depends(*node.a)) || (node.b && depends(*node.b));
  }
}

cplx conj_of(const cplx& x) { return std::conj(x); }
WirtingerJet conj_of(const WirtingerJet& x) { return x.conjugate(); }

cplx pow_const(const cplx& a, double p) {
  if (p == std::round(p) && std::abs(p) <= 64.0) {
    int ip = static_cast<int>(p);
    cplx r = 1.0, b = a;
    bool neg = ip < 0;
    unsigned e = static_cast<unsigned>(neg ? -ip : ip);
    while (e) {
      if (e & 1u) r *= b;
      b *= b;
      e >>= 1u;
    }
    return neg ? 1.0 / r : r;
  }
  return std::pow(a, p);
}
WirtingerJet pow_const(const WirtingerJet& a, double p) { return pow(a, p); }

struct ConstOnly {
  cplx constant(double v) const { return v; }
  cplx z(int) const { throw Error(ErrorKind::InvalidArgument, "variable in constant context"); }
  cplx zbar(int) const { throw Error(ErrorKind::InvalidArgument, "variable in constant context"); }
};

template <class T, class Leaf>
T evaluate(const Node& node, const Leaf& make) {
  using Op = Node::Op;
  switch (node.op) {
    case Op::Const: return make.constant(node.value);
    case Op::Var: return make.z(node.var);
    case Op::ConjVar: return make.zbar(node.var);
    case Op::Neg: return -evaluate<T>(*node.a, make);
    case Op::Add: return evaluate<T>(*node.a, make) + evaluate<T>(*node.b, make);
    case Op::Sub: return evaluate<T>(*node.a, make) - evaluate<T>(*node.b, make);
    case Op::Mul: return evaluate<T>(*node.a, make) * evaluate<T>(*node.b, make);
    case Op::Div: return evaluate<T>(*node.a, make) / evaluate<T>(*node.b, make);
    case Op::Pow: {
      T base = evaluate<T>(*node.a, make);
      if (!depends(*node.b)) {
        cplx p = evaluate<cplx>(*node.b, ConstOnly{});
        if (p.imag() != 0.0) throw Error(ErrorKind::InvalidArgument, "complex exponent");
        return pow_const(base, p.real());
      }
      return exp(evaluate<T>(*node.b, make) * log(base));
    }
    case Op::Log: return log(evaluate<T>(*node.a, make));
    case Op::Exp: return exp(evaluate<T>(*node.a, make));
    case Op::Sqrt: return sqrt(evaluate<T>(*node.a, make));
    case Op::Conj: return conj_of(evaluate<T>(*node.a, make));
    case Op::Abs2: {
      T x = evaluate<T>(*node.a, make);
      return x * conj_of(x);
    }
    case Op::Re: {
      T x = evaluate<T>(*node.a, make);
      return (x + conj_of(x)) * 0.5;
    }
    case Op::Im: {
      T x = evaluate<T>(*node.a, make);
      return (x - conj_of(x)) * cplx(0.0, -0.5);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "bad expression node");
}

struct PointLeaf {
  std::span<const cplx> z0;
  cplx constant(double v) const { return v; }
  cplx z(int j) const { return z0[static_cast<std::size_t>(j)]; }
  cplx zbar(int j) const { return std::conj(z0[static_cast<std::size_t>(j)]); }
};

struct JetLeaf {
  std::span<const cplx> z0;
  int n, order;
  WirtingerJet constant(double v) const { return WirtingerJet(n, order, v); }
  WirtingerJet z(int j) const { return WirtingerJet::z(n, order, j, z0[static_cast<std::size_t>(j)]); }
  WirtingerJet zbar(int j) const {
    return WirtingerJet::zbar(n, order, j, std::conj(z0[static_cast<std::size_t>(j)]));
  }
};

}  // namespace

Expression Expression::parse(std::string_view source, int n, const std::map<std::string, double>& constants) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "expression dimension must be positive");
  Expression e;
  e.n_ = n;
  e.source_ = std::string(source);
  e.root_ = Parser(source, n, constants).parse();
  return e;
}

bool Expression::depends_on_z() const { return root_ && depends(*root_); }

cplx Expression::eval(std::span<const cplx> z) const {
  if (!root_) throw Error(ErrorKind::InvalidArgument, "empty expression");
  if (static_cast<int>(z.size()) != n_) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
  return evaluate<cplx>(*root_, PointLeaf{z});
}

WirtingerJet Expression::eval_jet(std::span<const cplx> z0, int order) const {
  if (!root_) throw Error(ErrorKind::InvalidArgument, "empty expression");
  if (static_cast<int>(z0.size()) != n_) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
  return evaluate<WirtingerJet>(*root_, JetLeaf{z0, n_, order}).truncated(order);
}

}  // namespace bergman
