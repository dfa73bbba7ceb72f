#pragma once

#include <functional>
#include <memory>
#include <string>

#include "eqloop/types.hpp"

namespace eqloop {

namespace detail {
struct ExprNode;
}

/// Smooth scalar function on the ambient space, stored as an expression DAG.
///
/// Derivatives are symbolic, so exterior derivatives of forms built from
/// ScalarFields commute exactly (d∘d vanishes to rounding). Opaque functions
/// wrapped with `from_function` fall back to central finite differences.
class ScalarField {
 public:
  ScalarField();  // identically zero
  ScalarField(double c);  // NOLINT: implicit constants read naturally in formulas

  static ScalarField constant(double c);
  static ScalarField coordinate(int i);
  /// Wrap an arbitrary smooth function; partial derivatives use a 4th-order
  /// central stencil with step `fd_step`.
  static ScalarField from_function(std::function<double(const Ambient&)> f,
                                   std::string name = "opaque", double fd_step = 1e-4);

  double operator()(const Ambient& y) const;
  ScalarField derivative(int i) const;

  bool is_zero() const;
  bool is_constant() const;
  /// Value of a constant field; only meaningful when is_constant().
  double constant_value() const;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a);

  friend ScalarField sin(const ScalarField& a);
  friend ScalarField cos(const ScalarField& a);
  friend ScalarField exp(const ScalarField& a);
  friend ScalarField pow(const ScalarField& a, int n);

 private:
  explicit ScalarField(std::shared_ptr<const detail::ExprNode> node);
  std::shared_ptr<const detail::ExprNode> node_;

  friend struct detail::ExprNode;
  friend ScalarField make_field(std::shared_ptr<const detail::ExprNode>);
};

}  // namespace eqloop
