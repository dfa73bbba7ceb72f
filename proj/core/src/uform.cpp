#include "eqloop/uform.hpp"

#include <bit>
#include <cmath>

#include "eqloop/forms.hpp"

namespace eqloop {

UForm UForm::scalar(int dim, double v) {
  UForm r(dim);
  r.c_[0] = v;
  return r;
}

UForm& UForm::operator+=(const UForm& o) {
  if (c_.empty()) *this = UForm(o.dim_);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

UForm& UForm::operator-=(const UForm& o) {
  if (c_.empty()) *this = UForm(o.dim_);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

UForm& UForm::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

UForm UForm::part(int degree) const {
  UForm r(dim_);
  for (unsigned m = 0; m < c_.size(); ++m)
    if (std::popcount(m) == degree) r.c_[m] = c_[m];
  return r;
}

UForm UForm::without(int i) const {
  UForm r(dim_);
  for (unsigned m = 0; m < c_.size(); ++m)
    if (!(m & (1u << i))) r.c_[m] = c_[m];
  return r;
}

double UForm::max_abs() const {
  double s = 0.0;
  for (double v : c_) s = std::max(s, std::abs(v));
  return s;
}

UForm wedge(const UForm& a, const UForm& b) {
  UForm r(a.dim());
  for (unsigned ma = 0; ma < a.size(); ++ma) {
    if (a[ma] == 0.0) continue;
    for (unsigned mb = 0; mb < b.size(); ++mb) {
      if ((ma & mb) || b[mb] == 0.0) continue;
      r[ma | mb] += merge_sign(ma, mb) * a[ma] * b[mb];
    }
  }
  return r;
}

UForm interior(int i, const UForm& a) {
  UForm r(a.dim());
  const unsigned bit = 1u << i;
  for (unsigned m = 0; m < a.size(); ++m) {
    if (!(m & bit) || a[m] == 0.0) continue;
    const int before = std::popcount(m & (bit - 1));
    r[m & ~bit] += (before % 2 ? -1.0 : 1.0) * a[m];
  }
  return r;
}

UForm fd_exterior_derivative(const std::function<UForm(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& u, int m, double h) {
  UForm out;
  for (int j = 0; j < m; ++j) {
    auto at = [&](double off) {
      Eigen::VectorXd v = u;
      v[j] += off;
      return f(v);
    };
    const UForm p1 = at(h), m1 = at(-h), p2 = at(2 * h), m2 = at(-2 * h);
    UForm deriv = (8.0 / (12.0 * h)) * (p1 - m1) - (1.0 / (12.0 * h)) * (p2 - m2);
    UForm ej(deriv.dim());
    ej[1u << j] = 1.0;
    if (out.size() == 0) out = UForm(deriv.dim());
    out += wedge(ej, deriv);
  }
  return out;
}

}  // namespace eqloop
