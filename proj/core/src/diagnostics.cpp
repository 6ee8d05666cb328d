#include "coulomb/sampler.hpp"

#include "coulomb/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace coulomb {

double integrated_autocorrelation_time(const std::vector<double>& x) {
  const std::size_t M = x.size();
  if (M < 100) throw std::invalid_argument("diagnostics: at least 100 samples required");
  const double mean = tree_sum(x) / double(M);
  std::vector<double> c(M);
  for (std::size_t i = 0; i < M; ++i) c[i] = (x[i] - mean) * (x[i] - mean);
  const double c0 = tree_sum(c) / double(M);
  if (!(c0 > 0.0)) return 0.5 * double(M);  // constant stream: one effective sample
  auto gamma = [&](std::size_t lag) {
    std::vector<double> t(M - lag);
    for (std::size_t i = 0; i + lag < M; ++i) t[i] = (x[i] - mean) * (x[i + lag] - mean);
    return tree_sum(t) / double(M) / c0;
  };
  // Geyer: sum of consecutive pairs Gamma_k = rho_2k + rho_2k+1 while positive,
  // made monotone non-increasing.
  double tau = -0.5;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < M; ++k) {
    double G = gamma(2 * k) + gamma(2 * k + 1);
    if (G <= 0.0) break;
    G = std::min(G, prev);
    prev = G;
    tau += G;
  }
  return std::max(tau, 0.5 * 1e-3);
}

ChainDiagnostics diagnostics(const std::vector<double>& x) {
  ChainDiagnostics d;
  d.tau_int = integrated_autocorrelation_time(x);
  const double M = double(x.size());
  d.mean = tree_sum(x) / M;
  std::vector<double> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = (x[i] - d.mean) * (x[i] - d.mean);
  d.sd = std::sqrt(tree_sum(c) / (M - 1.0));
  d.ess = std::min(M, M / (2.0 * d.tau_int));
  d.stderr_mean = d.sd * std::sqrt(2.0 * d.tau_int / M);
  return d;
}

}  // namespace coulomb
