#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace eqloop {

/// Element of the exterior algebra of R^D (D ≤ 8), stored densely by
/// bitmask of increasing basis indices. Used for forms pulled back to a
/// plot's parameter domain, possibly of mixed degree.
class UForm {
 public:
  UForm() = default;
  explicit UForm(int dim) : dim_(dim), c_(static_cast<std::size_t>(1) << dim, 0.0) {}
  static UForm scalar(int dim, double v);

  int dim() const { return dim_; }
  double& operator[](unsigned mask) { return c_[mask]; }
  double operator[](unsigned mask) const { return c_[mask]; }
  std::size_t size() const { return c_.size(); }

  UForm& operator+=(const UForm& o);
  UForm& operator-=(const UForm& o);
  UForm& operator*=(double s);
  friend UForm operator+(UForm a, const UForm& b) { return a += b; }
  friend UForm operator-(UForm a, const UForm& b) { return a -= b; }
  friend UForm operator*(double s, UForm a) { return a *= s; }

  /// Homogeneous part of the given degree.
  UForm part(int degree) const;
  /// Drop components containing basis index i.
  UForm without(int i) const;
  double max_abs() const;

 private:
  int dim_ = 0;
  std::vector<double> c_;
};

UForm wedge(const UForm& a, const UForm& b);
/// i_{e_i}: interior product with the i-th basis vector.
UForm interior(int i, const UForm& a);

/// Exterior derivative in the first `m` coordinates of a UForm-valued
/// function, by 5-point central differences with step h.
UForm fd_exterior_derivative(const std::function<UForm(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& u, int m, double h);

}  // namespace eqloop
