#pragma once

#include <vector>

namespace coulomb {

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double stderr_mean = 0.0;
  double stderr_variance = 0.0;  // from the fourth central moment
  double stderr_skewness = 0.0;
};

Moments moments(const std::vector<double>& x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
// distribution and the small-sample correction of Stephens.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares, optionally weighted by 1/sigma^2.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<double>& sigma = {});

// Every k-th element starting at 0.
std::vector<double> thin(const std::vector<double>& x, std::size_t k);

}  // namespace coulomb
