#include "coulomb/energy.hpp"

#include "coulomb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace coulomb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_spacing(int N, int d) { return std::pow(double(N), -1.0 / d); }

}  // namespace

bool Box::contains(const Vec& x, int d) const {
  for (int a = 0; a < d; ++a)
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  return true;
}

double Box::distance_to_boundary(const Vec& x, int d) const {
  if (!contains(x, d)) return 0.0;
  double m = kInf;
  for (int a = 0; a < d; ++a) m = std::min({m, x[a] - lo[a], hi[a] - x[a]});
  return m;
}

// ---------------------------------------------------------------------------
// Nearest neighbours

std::vector<double> nearest_distance_bruteforce(const std::vector<Vec>& x) {
  const std::size_t n = x.size();
  std::vector<double> nn(n, kInf);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = (x[i] - x[j]).norm();
      nn[i] = std::min(nn[i], r);
      nn[j] = std::min(nn[j], r);
    }
  return nn;
}

std::vector<double> nearest_distance_cells(const std::vector<Vec>& x, int d) {
  const std::size_t n = x.size();
  std::vector<double> nn(n, kInf);
  if (n < 2) return nn;
  Vec lo = x[0], hi = x[0];
  for (const Vec& p : x) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double vol = 1.0;
  for (int a = 0; a < d; ++a) vol *= std::max(hi[a] - lo[a], 1e-12);
  const double s = std::max(std::pow(vol / double(n), 1.0 / d), 1e-12);
  std::array<long, 3> dims{1, 1, 1};
  for (int a = 0; a < d; ++a) dims[a] = std::max(1L, long((hi[a] - lo[a]) / s) + 1);

  auto cell_of = [&](const Vec& p) {
    std::array<long, 3> c{0, 0, 0};
    for (int a = 0; a < d; ++a) c[a] = std::min(dims[a] - 1, long((p[a] - lo[a]) / s));
    return c;
  };
  auto key = [&](long i, long j, long k) { return i + dims[0] * (j + dims[1] * k); };

  std::unordered_map<long, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = cell_of(x[i]);
    cells[key(c[0], c[1], c[2])].push_back(i);
  }
  const long maxring = std::max({dims[0], dims[1], dims[2]});
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = cell_of(x[i]);
    double best = kInf;
    for (long ring = 0; ring <= maxring; ++ring) {
      // Points in ring `ring` and beyond are at least (ring - 1) * s away.
      if (ring > 0 && best <= (ring - 1) * s) break;
      const long kz = (d == 3) ? ring : 0;
      for (long dk = -kz; dk <= kz; ++dk)
        for (long dj = -ring; dj <= ring; ++dj)
          for (long di = -ring; di <= ring; ++di) {
            if (std::max({std::abs(di), std::abs(dj), std::abs(dk)}) != ring) continue;
            const long ci = c[0] + di, cj = c[1] + dj, ck = c[2] + dk;
            if (ci < 0 || cj < 0 || ck < 0 || ci >= dims[0] || cj >= dims[1] || ck >= dims[2]) continue;
            auto it = cells.find(key(ci, cj, ck));
            if (it == cells.end()) continue;
            for (std::size_t j : it->second)
              if (j != i) best = std::min(best, (x[i] - x[j]).norm());
          }
    }
    nn[i] = best;
  }
  return nn;
}

// ---------------------------------------------------------------------------
// PointConfiguration

PointConfiguration::PointConfiguration(int d, std::vector<Vec> points) : d_(d), x_(std::move(points)) {
  if (d != 2 && d != 3) throw std::invalid_argument("PointConfiguration: dimension must be 2 or 3");
  if (x_.empty()) throw std::invalid_argument("PointConfiguration: no points");
  for (Vec& p : x_) {
    if (!p.allFinite()) throw std::invalid_argument("PointConfiguration: non-finite coordinate");
    if (d == 2) p[2] = 0.0;
  }
  nn_ = (x_.size() > 512) ? nearest_distance_cells(x_, d) : nearest_distance_bruteforce(x_);
  for (std::size_t i = 0; i < nn_.size(); ++i)
    if (nn_[i] == 0.0)
      throw std::invalid_argument("PointConfiguration: coincident points at index " + std::to_string(i));
  const double cap = mean_spacing(size(), d);
  r_.resize(nn_.size());
  for (std::size_t i = 0; i < nn_.size(); ++i) r_[i] = 0.25 * std::min(nn_[i], cap);
}

double PointConfiguration::min_separation() const { return *std::min_element(nn_.begin(), nn_.end()); }

std::vector<int> PointConfiguration::indices_in(const Box& window) const {
  std::vector<int> idx;
  for (int i = 0; i < size(); ++i)
    if (window.contains(x_[std::size_t(i)], d_)) idx.push_back(i);
  return idx;
}

std::vector<double> PointConfiguration::tilde_radii(const Box& window) const {
  const std::vector<int> idx = indices_in(window);
  const double ell = mean_spacing(size(), d_);
  std::vector<double> eta(idx.size(), 0.25 * ell);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const Vec& p = x_[std::size_t(idx[a])];
    if (window.distance_to_boundary(p, d_) < 0.5 * ell) continue;
    double m = kInf;
    for (std::size_t b = 0; b < idx.size(); ++b)
      if (b != a) m = std::min(m, (p - x_[std::size_t(idx[b])]).norm());
    if (std::isfinite(m)) eta[a] = 0.25 * m;
  }
  return eta;
}

PointConfiguration PointConfiguration::with_point(int i, const Vec& x) const {
  std::vector<Vec> y = x_;
  y.at(std::size_t(i)) = x;
  return PointConfiguration(d_, std::move(y));
}

// ---------------------------------------------------------------------------
// Energies

std::vector<double> pair_potentials(const PointConfiguration& X) {
  const int N = X.size(), d = X.dim();
  std::vector<double> phi(std::size_t(N), 0.0);
  std::vector<double> row(std::size_t(N), 0.0);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) row[std::size_t(j)] = (j == i) ? 0.0 : coulomb_g((X[i] - X[j]).norm(), d);
    phi[std::size_t(i)] = tree_sum(row);
  }
  return phi;
}

double hamiltonian(const PointConfiguration& X, const ScalarField& V) {
  const int N = X.size();
  std::vector<double> v(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) v[std::size_t(i)] = V.value(X[i]);
  return 0.5 * tree_sum(pair_potentials(X)) + double(N) * tree_sum(v);
}

double next_order_energy(const PointConfiguration& X, const CoulombPotential& pot) {
  const GridSpec& g = pot.density().grid();
  if (g.dim != X.dim()) throw std::invalid_argument("next_order_energy: dimension mismatch");
  const int N = X.size();
  std::vector<double> u(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    if (!g.contains(X[i]))
      throw std::domain_error("next_order_energy: point " + std::to_string(i) + " lies outside the grid");
    u[std::size_t(i)] = pot.value(X[i]);
  }
  const double n = N;
  return 0.5 * tree_sum(pair_potentials(X)) - n * tree_sum(u) + 0.5 * n * n * pot.self_energy();
}

double next_order_energy(const PointConfiguration& X, const GridDensity& mu) {
  return next_order_energy(X, CoulombPotential(mu));
}

double splitting_rhs(const PointConfiguration& X, const CoulombPotential& pot, const ScalarField& V,
                     double theta, const std::vector<double>& log_mu_at_points) {
  if (int(log_mu_at_points.size()) != X.size()) throw std::invalid_argument("splitting_rhs: size mismatch");
  const GridDensity& mu = pot.density();
  const double e = 0.5 * pot.self_energy() + integrate_product(sample(V, mu.grid()), mu) +
                   entropy_integral(mu) / theta;
  const double n = X.size();
  return n * n * e - n / theta * tree_sum(log_mu_at_points) + next_order_energy(X, pot);
}

// ---------------------------------------------------------------------------
// Localized energy

double smeared_interaction(const Vec& x, double a, const Vec& y, double b, int d) {
  const double r = (x - y).norm();
  if (r >= a + b) return coulomb_g(r, d);
  static const SphereRule rule2 = SphereRule::make(2, 1024);
  static const SphereRule rule3 = SphereRule::make(3, 64);
  const SphereRule& rule = (d == 2) ? rule2 : rule3;
  return sphere_average([&](const Vec& z) { return g_eta(z - x, a, d); }, y, b, rule);
}

double f_eta_integral(const GridDensity& mu, const Vec& p, double eta, const Box* exclude) {
  const GridSpec& g = mu.grid();
  const int d = g.dim;
  const int sub = 8;
  std::vector<double> terms;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const double m = mu[idx];
    if (m == 0.0) continue;
    Vec lo, hi;
    g.cell_box(idx, lo, hi);
    bool far = false;
    for (int a = 0; a < d; ++a)
      if (p[a] < lo[a] - eta || p[a] > hi[a] + eta) far = true;
    if (far) continue;
    if (exclude && exclude->contains(g.center(idx), d)) continue;
    const Vec hs = (hi - lo) / sub;
    const int kz = (d == 3) ? sub : 1;
    double s = 0.0;
    for (int k = 0; k < kz; ++k)
      for (int j = 0; j < sub; ++j)
        for (int i = 0; i < sub; ++i) {
          Vec z = lo + Vec((i + 0.5) * hs[0], (j + 0.5) * hs[1], d == 3 ? (k + 0.5) * hs[2] : 0.0);
          if (d == 2) z[2] = 0.0;
          const double r = (z - p).norm();
          if (r < eta) s += coulomb_g(r, d) - coulomb_g(eta, d);
        }
    double sv = 1.0;
    for (int a = 0; a < d; ++a) sv *= hs[a];
    terms.push_back(m * s * sv);
  }
  return tree_sum(terms);
}

double localized_energy(const PointConfiguration& X, const GridDensity& mu, const Box& window,
                        const std::vector<double>& eta) {
  const int d = X.dim();
  const std::vector<int> idx = X.indices_in(window);
  if (eta.size() != idx.size()) throw std::invalid_argument("localized_energy: one radius per window point");
  const GridSpec& g = mu.grid();
  std::vector<double> masked(mu.size(), 0.0);
  for (std::size_t c = 0; c < g.size(); ++c)
    if (window.contains(g.center(c), d)) masked[c] = mu[c];
  const CoulombPotential pot(GridDensity(g, masked));
  const double n = X.size();

  std::vector<double> pair(idx.size(), 0.0), one(idx.size(), 0.0);
  std::vector<double> row(idx.size(), 0.0);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const Vec& p = X[idx[a]];
    for (std::size_t b = 0; b < idx.size(); ++b)
      row[b] = (a == b) ? 0.0 : smeared_interaction(p, eta[a], X[idx[b]], eta[b], d);
    pair[a] = tree_sum(row);
    // int_window g_eta + int f_eta = int_window g + int_{outside} f_eta
    one[a] = pot.value(p) + f_eta_integral(mu, p, eta[a], &window);
  }
  return 0.5 * tree_sum(pair) - n * tree_sum(one) + 0.5 * n * n * pot.self_energy();
}

double localized_energy(const PointConfiguration& X, const GridDensity& mu, const Box& window) {
  return localized_energy(X, mu, window, X.tilde_radii(window));
}

// ---------------------------------------------------------------------------
// Pair sums

double multiscale_sum(const PointConfiguration& X, const Box& window, double s, double ell) {
  const int d = X.dim();
  const double lo = mean_spacing(X.size(), d);
  const std::vector<int> idx = X.indices_in(window);
  std::vector<double> rows;
  std::vector<double> row;
  for (int i : idx) {
    if (window.distance_to_boundary(X[i], d) < 4.0 * ell) continue;
    row.clear();
    for (int j : idx) {
      if (j == i) continue;
      const double r = (X[i] - X[j]).norm();
      if (r >= lo && r <= ell) row.push_back(std::pow(r, -(d - 2 + s)));
    }
    rows.push_back(tree_sum(row));
  }
  return tree_sum(rows);
}

double short_range_sum(const PointConfiguration& X, const Box& window) {
  const int d = X.dim();
  const double ell = mean_spacing(X.size(), d);
  const std::vector<int> idx = X.indices_in(window);
  std::vector<double> rows;
  std::vector<double> row;
  for (int i : idx) {
    if (window.distance_to_boundary(X[i], d) < ell) continue;
    row.clear();
    for (int j : idx) {
      if (j == i) continue;
      const double r = (X[i] - X[j]).norm();
      if (r > ell) continue;
      row.push_back(d == 2 ? coulomb_g(2.0 * r / ell, 2) : coulomb_g(r, d));
    }
    rows.push_back(tree_sum(row));
  }
  return tree_sum(rows);
}

double multiscale_bound_terms(double F_window, int count, int N, int d, double s, double ell) {
  const double n = N, k = count;
  double t = std::pow(n, s / d) * (F_window + (d == 2 ? 0.25 * k * std::log(n) : 0.0));
  t += k * std::pow(n, 1.0 - 2.0 / d + s / d);
  if (std::abs(s - 2.0) > 1e-12)
    t += k * n * std::pow(ell, 2.0 - s);
  else
    t += k * n * std::log(ell * std::pow(n, 1.0 / d));
  return t;
}

}  // namespace coulomb
