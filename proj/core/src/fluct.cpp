#include "coulomb/fluct.hpp"

#include "coulomb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coulomb {

double mu_average(const ScalarField& xi, const GridDensity& mu) {
  const GridSpec& g = mu.grid();
  std::vector<double> terms(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (mu[i] > 0.0) terms[i] = xi.value(g.center(i)) * mu[i];
  return tree_sum(terms) * g.cell_volume();
}

double fluct(const ScalarField& xi, const std::vector<Vec>& x, const GridDensity& mu) {
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = xi.value(x[i]);
  return tree_sum(v) - double(x.size()) * mu_average(xi, mu);
}

double fluct(const ScalarField& xi, const PointConfiguration& X, const GridDensity& mu) {
  return fluct(xi, X.points(), mu);
}

double dirichlet_energy(const ScalarField& xi, const GridSpec& grid) {
  std::vector<double> terms(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) terms[i] = xi.gradient(grid.center(i)).squaredNorm();
  return tree_sum(terms) * grid.cell_volume() / (2.0 * coulomb_cd(grid.dim));
}

VarianceTerms predicted_variance_v(const TransportBundle& b) {
  const GridDensity& mu = *b.mu;
  const GridSpec& g = mu.grid();
  const int d = g.dim;
  const double cd = coulomb_cd(d);
  const GridFunction f = b.f_t(1.0);
  std::vector<double> grad(g.size()), cross(g.size()), dens(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec G = Vec::Zero();
    for (int a = 0; a < d; ++a) G[a] = -cd * mu[i] * b.psi_grid[a][i];
    const Vec gx = b.xi->gradient(g.center(i));
    grad[i] = G.squaredNorm();
    cross[i] = gx.dot(G);
    dens[i] = mu[i] * f[i] * f[i];
  }
  const double vol = g.cell_volume();
  VarianceTerms v;
  v.gradient = -tree_sum(grad) * vol / (2.0 * cd);
  v.cross = tree_sum(cross) * vol / cd;
  v.density = -tree_sum(dens) * vol / (2.0 * b.theta);
  return v;
}

FdModel FdModel::tabulated(std::vector<double> beta, std::vector<double> f, std::vector<double> fprime,
                           double C) {
  if (beta.size() < 2 || f.size() != beta.size() || fprime.size() != beta.size())
    throw std::invalid_argument("FdModel: table needs at least two rows of equal length");
  if (!std::is_sorted(beta.begin(), beta.end()))
    throw std::invalid_argument("FdModel: beta column must be increasing");
  auto interp = [beta](std::vector<double> y) {
    return [beta, y](double x) {
      if (x <= beta.front()) return y.front();
      if (x >= beta.back()) return y.back();
      const auto it = std::upper_bound(beta.begin(), beta.end(), x);
      const std::size_t j = std::size_t(it - beta.begin());
      const double s = (x - beta[j - 1]) / (beta[j] - beta[j - 1]);
      return (1.0 - s) * y[j - 1] + s * y[j];
    };
  };
  FdModel m;
  m.f = interp(std::move(f));
  m.fprime = interp(std::move(fprime));
  m.C = C;
  return m;
}

FdModel FdModel::zero() {
  FdModel m;
  m.f = [](double) { return 0.0; };
  m.fprime = [](double) { return 0.0; };
  return m;
}

void FdModel::validate(const std::vector<double>& betas, int d) const {
  if (!f || !fprime) throw std::invalid_argument("FdModel: f and f' are required");
  for (double b : betas) {
    const double v = f(b);
    const double hi = C * chi_beta(b, d);
    if (v < -C || v > hi) {
      Admissibility a;
      a.ok = false;
      a.inequality = "-C <= f_d(beta) <= C chi(beta) at beta = " + std::to_string(b);
      a.lhs = v;
      a.rhs = v < -C ? -C : hi;
      throw AdmissibilityError(a);
    }
  }
}

double predicted_mean_m(const TransportBundle& b, double beta) {
  const GridDensity& mu = *b.mu;
  if (mu.dim() != 2) throw std::invalid_argument("predicted_mean_m: d >= 3 needs an f_d model");
  const GridFunction s = b.minus_div_psi_mu();
  std::vector<double> terms(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] != 0.0) terms[i] = s[i] * std::log(mu[i]);
  return -std::sqrt(beta) / 4.0 * tree_sum(terms) * mu.grid().cell_volume();
}

double predicted_mean_m(const TransportBundle& b, double beta, const FdModel& fd, int N, double ell) {
  const GridDensity& mu = *b.mu;
  const int d = mu.dim();
  if (d == 2) return predicted_mean_m(b, beta);
  if (!fd.f || !fd.fprime) throw std::invalid_argument("predicted_mean_m: f_d model is incomplete");
  const GridFunction s = b.minus_div_psi_mu();
  std::vector<double> terms(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0.0) continue;
    const double be = beta * std::pow(mu[i], 1.0 - 2.0 / d);
    terms[i] = s[i] * (fd.f(be) + be * fd.fprime(be));
  }
  const double Nl = std::pow(double(N), 1.0 / d) * ell;
  const double pre = -double(N) * ell * ell * std::sqrt(beta) * std::pow(Nl, -1.0 - d / 2.0) * (1.0 - 2.0 / d);
  return pre * tree_sum(terms) * mu.grid().cell_volume();
}

double log_mean_exp(const std::vector<double>& x, double s) {
  if (x.empty()) throw std::invalid_argument("log_mean_exp: no samples");
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, -s * v);
  std::vector<double> e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) e[i] = std::exp(-s * x[i] - mx);
  return mx + std::log(tree_sum(e) / double(x.size()));
}

Admissibility support_in_bulk(const TransportBundle& b, const Mask& bulk, double d0) {
  if (bulk.size() != b.mu->size()) throw std::invalid_argument("support_in_bulk: bulk mask size mismatch");
  int outside = 0;
  for (std::size_t i = 0; i < bulk.size(); ++i)
    if (b.L_iterates[0][i] != 0.0 && !bulk[i]) ++outside;
  Admissibility a;
  a.ok = outside == 0;
  a.inequality = "supp xi inside the bulk (margin d0 = " + std::to_string(d0) + "), cells outside";
  a.lhs = outside;
  a.rhs = 0.0;
  return a;
}

FluctuationReport clt_harness(const std::vector<double>& fluct_samples, const TransportBundle& b,
                              const ScaleParameters& p, double ell, const CltOptions& opt) {
  if (fluct_samples.size() < 2) throw std::invalid_argument("clt_harness: need at least two samples");
  if (opt.check_ell) {
    const Admissibility a = ell_admissible(p, ell);
    if (!a.ok) throw AdmissibilityError(a);
  }
  if (opt.bulk) {
    const Admissibility a = support_in_bulk(b, *opt.bulk, p.d0);
    if (!a.ok) throw AdmissibilityError(a);
  }

  FluctuationReport r;
  r.d = p.d;
  r.N = p.N;
  r.beta = p.beta;
  r.theta = b.theta;
  r.ell = ell;
  r.q = b.q;
  r.normalizer = std::sqrt(p.beta) * std::pow(std::pow(double(p.N), 1.0 / p.d) * ell, 1.0 - p.d / 2.0);
  r.samples = fluct_samples;
  r.raw = moments(fluct_samples);
  std::vector<double> X(fluct_samples.size());
  for (std::size_t i = 0; i < X.size(); ++i) X[i] = r.normalizer * fluct_samples[i];
  r.normalized = moments(X);

  r.v = predicted_variance_v(b);
  r.v_scaled = r.v.value() * (p.d >= 3 ? std::pow(ell, 2.0 - p.d) : 1.0);
  if (p.d == 2)
    r.m = predicted_mean_m(b, p.beta);
  else if (opt.fd)
    r.m = predicted_mean_m(b, p.beta, *opt.fd, p.N, ell);
  if (r.m && r.normalized.stderr_mean > 0.0) r.z_mean = (r.normalized.mean - *r.m) / r.normalized.stderr_mean;
  if (r.normalized.stderr_variance > 0.0)
    r.z_variance = (r.normalized.variance - 2.0 * r.v_scaled) / r.normalized.stderr_variance;

  for (double tau : opt.tau_grid) {
    LaplacePoint lp;
    lp.tau = tau;
    lp.empirical = log_mean_exp(X, tau);
    std::vector<double> w(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) w[i] = std::exp(-tau * X[i] - lp.empirical);
    lp.stderr = std::sqrt(moments(w).variance / double(X.size()));
    if (r.m) {
      lp.predicted = -tau * *r.m + tau * tau * r.v_scaled;
      lp.has_prediction = true;
    }
    r.laplace.push_back(lp);
  }
  return r;
}

ConcentrationReport concentration_check(const std::vector<double>& fluct_samples, double beta, double M,
                                        std::vector<double> t_grid) {
  const std::size_t n = fluct_samples.size();
  if (n < 4) throw std::invalid_argument("concentration_check: need at least four samples");
  const double scale = std::min(1.0, beta);
  std::vector<double> cal, val;
  for (std::size_t i = 0; i < n; ++i) (i < n / 2 ? cal : val).push_back(scale * std::abs(fluct_samples[i]));
  if (t_grid.empty()) {
    const double top = std::max(*std::max_element(cal.begin(), cal.end()), *std::max_element(val.begin(), val.end()));
    for (int k = 0; k < 40; ++k) t_grid.push_back(top * k / 39.0);
  }
  auto tail = [](const std::vector<double>& s, double t) {
    std::size_t c = 0;
    for (double v : s) c += v > t;
    return c;
  };
  const double M4 = 1.0 + std::pow(M, 4);
  const double z = 3.0;
  double c = -std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    const std::size_t k = tail(cal, t);
    if (k == 0) continue;
    const double m = double(cal.size());
    const double ph = double(k) / m;
    const double upper =
        (ph + z * z / (2 * m) + z * std::sqrt(ph * (1 - ph) / m + z * z / (4 * m * m))) / (1 + z * z / m);
    c = std::max(c, (std::log(std::min(1.0, upper)) + t) / M4);
  }
  ConcentrationReport r;
  r.M = M;
  r.C = std::isfinite(c) ? c : 0.0;
  r.calibration = int(cal.size());
  r.validation = int(val.size());
  for (double t : t_grid) {
    ConcentrationRow row;
    row.t = t;
    row.tail = double(tail(val, t)) / double(val.size());
    row.bound = std::exp(-t + r.C * M4);
    row.constrained = row.bound < 1.0;
    row.violated = row.tail > row.bound;
    r.violations += row.violated;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace coulomb
