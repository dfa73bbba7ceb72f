#include "eqloop/quadrature.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

namespace eqloop {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double beta = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = jac(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    r.nodes[i] = mid + half * es.eigenvalues()[i];
    r.weights[i] = 2.0 * v0 * v0 * half;
  }
  return r;
}

QuadratureRule composite_simpson(int nodes, double a, double b) {
  if (nodes < 3 || nodes % 2 == 0) throw std::invalid_argument("composite_simpson: need an odd node count >= 3");
  QuadratureRule r;
  const double h = (b - a) / (nodes - 1);
  for (int i = 0; i < nodes; ++i) {
    r.nodes.push_back(a + i * h);
    const double w = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    r.weights.push_back(w * h / 3.0);
  }
  return r;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol);
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace eqloop
