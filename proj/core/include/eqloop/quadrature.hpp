#pragma once

#include <functional>
#include <vector>

namespace eqloop {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss–Legendre rule on [a, b] (Golub–Welsch).
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite Simpson rule with `nodes` points (odd, >= 3) on [a, b].
QuadratureRule composite_simpson(int nodes, double a, double b);

/// Adaptive Gauss–Kronrod integration of a smooth function on [a, b].
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-13);

/// Pairwise summation; result depends only on the order of `v`.
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace eqloop
