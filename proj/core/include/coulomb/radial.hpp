#pragma once

#include "coulomb/fields.hpp"

#include <vector>

namespace coulomb {

// Thermal equilibrium measure of a radial potential, solved on a radial grid
// r_i = i h, i = 0..n, as a nonlinear Poisson problem
//   -Delta_h u = c_d exp(theta (C - u - V)),   u(r_n) = g(r_n),   mass = 1,
// with the conservative finite-volume radial Laplacian. The unknown is
// lambda = log mu = theta (C - u - V), which keeps second differences of the
// nearly constant u + V out of floating-point cancellation.
struct RadialOptions {
  int nodes = 200000;
  double r_max = 0.0;  // 0: support radius + 1.5
  double tol = 1e-14;  // on the Newton increment
  int max_iter = 100;
  double theta_start = 1.0;
  double theta_factor = 2.0;
};

struct RadialSolution {
  double theta = 0.0;
  double h = 0.0;
  double C = 0.0;
  std::vector<double> r;
  std::vector<double> u;     // g * mu
  std::vector<double> mu;
  std::vector<double> shell; // volume of the control volume around r_i
  int iterations = 0;
  double residual = 0.0;

  double mass() const;
  // Mass of mu beyond radius R.
  double mass_outside(double R) const;
};

class RadialEquilibrium {
 public:
  RadialEquilibrium(const RadialPolynomial& V, RadialOptions opt = {});

  RadialSolution solve(double theta) const;
  // Continuation through increasing theta values; returns one solution per entry.
  std::vector<RadialSolution> solve_ladder(const std::vector<double>& thetas) const;

  // -Delta_h of nodal values (interior nodes; last entry unused).
  std::vector<double> laplacian(const std::vector<double>& f) const;
  // Delta V / c_d and f_1 = f_0 + Delta log f_0 / (theta c_d) at the nodes.
  std::vector<double> f0() const;
  std::vector<double> f1(double theta) const;

  double support_radius() const { return R_; }
  const std::vector<double>& radii() const { return r_; }

 private:
  void newton(RadialSolution& s, double theta) const;

  RadialPolynomial V_;
  int d_;
  double cd_;
  double R_;
  double h_;
  std::vector<double> r_, v_, dv_, lapv_, shell_, ap_, am_;
  RadialOptions opt_;
};

}  // namespace coulomb
