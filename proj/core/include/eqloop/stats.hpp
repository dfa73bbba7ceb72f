#pragma once

#include <functional>
#include <vector>

namespace eqloop {

double mean(const std::vector<double>& v);
/// Standard error of the mean (sample standard deviation / sqrt(n)).
double standard_error(const std::vector<double>& v);
double median(std::vector<double> v);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov distribution tail Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
double kolmogorov_tail(double lambda);

/// One-sample test against a continuous CDF (Stephens' small-sample correction).
KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace eqloop
