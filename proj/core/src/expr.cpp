#include "eqloop/expr.hpp"

#include <cmath>
#include <utility>

namespace eqloop {

namespace detail {

enum class Op { Const, Coord, Add, Mul, Neg, Div, Sin, Cos, Exp, Pow, Opaque, OpaqueDiff };

struct ExprNode {
  Op op;
  double value = 0.0;  // Const
  int index = 0;       // Coord, Pow exponent, OpaqueDiff direction
  std::shared_ptr<const ExprNode> a, b;
  std::shared_ptr<const std::function<double(const Ambient&)>> fn;
  double step = 1e-4;

  double eval(const Ambient& y) const {
    switch (op) {
      case Op::Const: return value;
      case Op::Coord: return y[index];
      case Op::Add: return a->eval(y) + b->eval(y);
      case Op::Mul: return a->eval(y) * b->eval(y);
      case Op::Neg: return -a->eval(y);
      case Op::Div: return a->eval(y) / b->eval(y);
      case Op::Sin: return std::sin(a->eval(y));
      case Op::Cos: return std::cos(a->eval(y));
      case Op::Exp: return std::exp(a->eval(y));
      case Op::Pow: return std::pow(a->eval(y), index);
      case Op::Opaque: return (*fn)(y);
      case Op::OpaqueDiff: {
        // a is the function being differentiated in direction `index`
        Ambient z = y;
        const double h = step;
        auto at = [&](double off) {
          z[index] = y[index] + off;
          return a->eval(z);
        };
        return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      }
    }
    return 0.0;
  }
};

}  // namespace detail

using detail::ExprNode;
using detail::Op;
using NodePtr = std::shared_ptr<const ExprNode>;

ScalarField make_field(NodePtr n) { return ScalarField(std::move(n)); }

namespace {

NodePtr leaf_const(double c) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Const;
  n->value = c;
  return n;
}

NodePtr unary(Op op, NodePtr a, int index = 0) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->index = index;
  return n;
}

NodePtr binary(Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

}  // namespace

ScalarField::ScalarField() : node_(leaf_const(0.0)) {}
ScalarField::ScalarField(double c) : node_(leaf_const(c)) {}
ScalarField::ScalarField(NodePtr node) : node_(std::move(node)) {}

ScalarField ScalarField::constant(double c) { return ScalarField(c); }

ScalarField ScalarField::coordinate(int i) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Coord;
  n->index = i;
  return ScalarField(NodePtr(n));
}

ScalarField ScalarField::from_function(std::function<double(const Ambient&)> f, std::string,
                                       double fd_step) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Opaque;
  n->fn = std::make_shared<const std::function<double(const Ambient&)>>(std::move(f));
  n->step = fd_step;
  return ScalarField(NodePtr(n));
}

double ScalarField::operator()(const Ambient& y) const { return node_->eval(y); }

bool ScalarField::is_constant() const { return node_->op == Op::Const; }
bool ScalarField::is_zero() const { return is_constant() && node_->value == 0.0; }
double ScalarField::constant_value() const { return is_constant() ? node_->value : 0.0; }

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_constant() && b.is_constant()) return ScalarField(a.constant_value() + b.constant_value());
  return ScalarField(binary(Op::Add, a.node_, b.node_));
}

ScalarField operator-(const ScalarField& a) {
  if (a.is_constant()) return ScalarField(-a.constant_value());
  if (a.node_->op == Op::Neg) return ScalarField(a.node_->a);
  return ScalarField(unary(Op::Neg, a.node_));
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  if (b.is_zero()) return a;
  return a + (-b);
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero() || b.is_zero()) return ScalarField(0.0);
  if (a.is_constant() && b.is_constant()) return ScalarField(a.constant_value() * b.constant_value());
  if (a.is_constant() && a.constant_value() == 1.0) return b;
  if (b.is_constant() && b.constant_value() == 1.0) return a;
  if (a.is_constant() && a.constant_value() == -1.0) return -b;
  if (b.is_constant() && b.constant_value() == -1.0) return -a;
  return ScalarField(binary(Op::Mul, a.node_, b.node_));
}

ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero()) return ScalarField(0.0);
  if (b.is_constant()) return a * ScalarField(1.0 / b.constant_value());
  return ScalarField(binary(Op::Div, a.node_, b.node_));
}

ScalarField sin(const ScalarField& a) {
  if (a.is_constant()) return ScalarField(std::sin(a.constant_value()));
  return ScalarField(unary(Op::Sin, a.node_));
}

ScalarField cos(const ScalarField& a) {
  if (a.is_constant()) return ScalarField(std::cos(a.constant_value()));
  return ScalarField(unary(Op::Cos, a.node_));
}

ScalarField exp(const ScalarField& a) {
  if (a.is_constant()) return ScalarField(std::exp(a.constant_value()));
  return ScalarField(unary(Op::Exp, a.node_));
}

ScalarField pow(const ScalarField& a, int n) {
  if (n == 0) return ScalarField(1.0);
  if (n == 1) return a;
  if (a.is_constant()) return ScalarField(std::pow(a.constant_value(), n));
  return ScalarField(unary(Op::Pow, a.node_, n));
}

ScalarField ScalarField::derivative(int i) const {
  const ExprNode& n = *node_;
  auto wrap = [](const NodePtr& p) { return ScalarField(p); };
  switch (n.op) {
    case Op::Const: return ScalarField(0.0);
    case Op::Coord: return ScalarField(n.index == i ? 1.0 : 0.0);
    case Op::Add: return wrap(n.a).derivative(i) + wrap(n.b).derivative(i);
    case Op::Mul:
      return wrap(n.a).derivative(i) * wrap(n.b) + wrap(n.a) * wrap(n.b).derivative(i);
    case Op::Neg: return -wrap(n.a).derivative(i);
    case Op::Div: {
      ScalarField num = wrap(n.a), den = wrap(n.b);
      return num.derivative(i) / den - num * den.derivative(i) / pow(den, 2);
    }
    case Op::Sin: return cos(wrap(n.a)) * wrap(n.a).derivative(i);
    case Op::Cos: return -(sin(wrap(n.a)) * wrap(n.a).derivative(i));
    case Op::Exp: return *this * wrap(n.a).derivative(i);
    case Op::Pow:
      return ScalarField(static_cast<double>(n.index)) * pow(wrap(n.a), n.index - 1) *
             wrap(n.a).derivative(i);
    case Op::Opaque:
    case Op::OpaqueDiff: {
      auto d = std::make_shared<ExprNode>();
      d->op = Op::OpaqueDiff;
      d->a = node_;
      d->index = i;
      d->step = n.step;
      return ScalarField(NodePtr(d));
    }
  }
  return ScalarField(0.0);
}

}  // namespace eqloop
