#include "coulomb/stats.hpp"

#include "coulomb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coulomb {

Moments moments(const std::vector<double>& x) {
  Moments m;
  m.n = x.size();
  if (m.n < 3) throw std::invalid_argument("moments: at least 3 samples required");
  const double n = double(m.n);
  m.mean = tree_sum(x) / n;
  std::vector<double> c2(x.size()), c3(x.size()), c4(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - m.mean;
    c2[i] = d * d;
    c3[i] = d * d * d;
    c4[i] = d * d * d * d;
  }
  const double m2 = tree_sum(c2) / n, m3 = tree_sum(c3) / n, m4 = tree_sum(c4) / n;
  m.variance = m2 * n / (n - 1.0);
  m.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  m.stderr_mean = std::sqrt(m.variance / n);
  m.stderr_variance = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  m.stderr_skewness = std::sqrt(6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0)));
  return m;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    D = std::max(D, std::abs(double(i) / na - double(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  KsResult r;
  r.statistic = D;
  r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * D);
  return r;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& sigma) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || (!sigma.empty() && sigma.size() != n))
    throw std::invalid_argument("fit_line: need matching inputs with at least two points");
  double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    S += w;
    Sx += w * x[i];
    Sy += w * y[i];
    Sxx += w * x[i] * x[i];
    Sxy += w * x[i] * y[i];
  }
  const double det = S * Sxx - Sx * Sx;
  if (det == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LinearFit f;
  f.slope = (S * Sxy - Sx * Sy) / det;
  f.intercept = (Sxx * Sy - Sx * Sxy) / det;
  if (!sigma.empty()) {
    f.slope_stderr = std::sqrt(S / det);
  } else if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_stderr = std::sqrt(rss / double(n - 2) * S / det);
  }
  return f;
}

std::vector<double> thin(const std::vector<double>& x, std::size_t k) {
  if (k == 0) throw std::invalid_argument("thin: step must be positive");
  std::vector<double> out;
  for (std::size_t i = 0; i < x.size(); i += k) out.push_back(x[i]);
  return out;
}

}  // namespace coulomb
