#pragma once

#include "coulomb/fields.hpp"

#include <vector>

namespace coulomb {

struct Box {
  Vec lo = Vec::Zero();
  Vec hi = Vec::Zero();
  bool contains(const Vec& x, int d) const;
  // Distance from an interior point to the boundary (0 outside).
  double distance_to_boundary(const Vec& x, int d) const;
};

class PointConfiguration {
 public:
  PointConfiguration() = default;
  // Rejects coincident points.
  PointConfiguration(int d, std::vector<Vec> points);

  int dim() const { return d_; }
  int size() const { return int(x_.size()); }
  const Vec& operator[](int i) const { return x_[std::size_t(i)]; }
  const std::vector<Vec>& points() const { return x_; }

  // min_{j != i} |x_i - x_j| (infinite for N = 1); cell lists above 512 points.
  const std::vector<double>& nearest_distance() const { return nn_; }
  // r_i = (1/4) min(nearest distance, N^{-1/d}).
  const std::vector<double>& radii() const { return r_; }
  double min_separation() const;

  // Window radii for U = R^d: (1/4) of the nearest in-window distance when
  // x_i is at least N^{-1/d}/2 from the window boundary, (1/4) N^{-1/d} otherwise.
  std::vector<double> tilde_radii(const Box& window) const;
  std::vector<int> indices_in(const Box& window) const;

  PointConfiguration with_point(int i, const Vec& x) const;

 private:
  int d_ = 2;
  std::vector<Vec> x_;
  std::vector<double> nn_;
  std::vector<double> r_;
};

// Nearest-neighbour distances by exhaustive search (reference path).
std::vector<double> nearest_distance_bruteforce(const std::vector<Vec>& x);
// Same by a uniform cell list.
std::vector<double> nearest_distance_cells(const std::vector<Vec>& x, int d);

// phi_i = sum_{j != i} g(x_i - x_j).
std::vector<double> pair_potentials(const PointConfiguration& X);

// H_N = (1/2) sum_{i != j} g(x_i - x_j) + N sum_i V(x_i).
double hamiltonian(const PointConfiguration& X, const ScalarField& V);

// F_N = (1/2) sum_{i != j} g - N sum_i (g*mu)(x_i) + (N^2/2) iint g dmu dmu, with g*mu the
// direct cell sum and the double integral from the same quadrature as the grid energies.
// Throws if a point lies outside the grid of mu.
double next_order_energy(const PointConfiguration& X, const CoulombPotential& pot);
double next_order_energy(const PointConfiguration& X, const GridDensity& mu);

// N^2 E_theta^V(mu) - (N/theta) sum log mu(x_i) + F_N, the right-hand side of the
// splitting of H_N, given log mu at the points.
double splitting_rhs(const PointConfiguration& X, const CoulombPotential& pot, const ScalarField& V,
                     double theta, const std::vector<double>& log_mu_at_points);

// Localized next-order energy of the charges in a window for U = R^d with
// truncation radii eta (one per point in the window, in the order of indices_in):
//   1/2 sum_{i != j in window} S_ij - N sum_i [ int_window g_{eta_i}(x - x_i) dmu
//   + int f_{eta_i}(x - x_i) dmu ] + N^2/2 iint_{window^2} g dmu dmu
// where S_ij is the interaction of the smeared charges (g(x_i - x_j) when the
// spheres do not overlap).
double localized_energy(const PointConfiguration& X, const GridDensity& mu, const Box& window,
                        const std::vector<double>& eta);
// Same with eta = tilde radii.
double localized_energy(const PointConfiguration& X, const GridDensity& mu, const Box& window);

// Interaction of the uniform unit measures on the spheres dB(x, a) and dB(y, b).
double smeared_interaction(const Vec& x, double a, const Vec& y, double b, int d);
// int f_eta(x - p) mu(x) dx over the cells of mu (optionally only outside `window`).
double f_eta_integral(const GridDensity& mu, const Vec& p, double eta, const Box* exclude = nullptr);

// Ordered pairs in the window with N^{-1/d} <= |x_i - x_j| <= ell and x_i at
// distance >= 4 ell from the window boundary, weighted by |x_i - x_j|^{-(d - 2 + s)}.
double multiscale_sum(const PointConfiguration& X, const Box& window, double s, double ell);
// Ordered pairs with |x_i - x_j| <= N^{-1/d}, x_i at distance >= N^{-1/d} from the
// window boundary: weight g(|x_i - x_j|) for d >= 3, g(2 |x_i - x_j| N^{1/d}) for d = 2.
double short_range_sum(const PointConfiguration& X, const Box& window);

// Right-hand side of the multiscale bound with unit constant:
//   N^{s/d} (F + [d = 2] #I log(N) / 4) + #I N^{1 - 2/d + s/d} + #I N l^{2-s} (s != 2)
//   or #I N log(l N^{1/d}) (s = 2).
double multiscale_bound_terms(double F_window, int count, int N, int d, double s, double ell);

// Electric form of F_N (d = 2): (1/2c_d)(int |grad h_eta|^2 - c_d sum g(eta_i))
// - N sum int f_{eta_i}(x - x_i) dmu, with h_eta the potential of the smeared
// charges minus N mu. The field is split into singular patches around each
// point (radius 2 r_i, handled radially) and a regular remainder sampled on
// `field_grid` (same box as the grid of mu, refined by an integer factor); the
// exterior of the grid is closed by a boundary integral.
struct ElectricEnergy {
  double value = 0.0;
  double grid_part = 0.0;   // int over the grid hull of |grad B|^2
  double tail_part = 0.0;   // exterior contribution
  double patch_part = 0.0;  // sum of patch terms
};
ElectricEnergy electric_energy_oracle(const PointConfiguration& X, const GridDensity& mu,
                                      const std::vector<double>& eta, const GridSpec& field_grid);

// int f_eta(x - p) mu(x) dx for piecewise-constant mu, integrated along rays
// with exact radial segments through the cells (d = 2).
double f_eta_integral_rays(const GridDensity& mu, const Vec& p, double eta, int rays = 4096);
// Average of g*mu over the circle |x - p| = radius (d = 2); cells with centres
// within `exact_radius` of p use exact cell integrals.
double circle_average_potential(const GridDensity& mu, const Vec& p, double radius, double exact_radius);

}  // namespace coulomb
