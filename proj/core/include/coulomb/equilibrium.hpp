#pragma once

#include "coulomb/fields.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace coulomb {

// ---------------------------------------------------------------------------
// Temperature and scale parameters

double chi_beta(double beta, int d);

struct ScaleParameters {
  double beta = 1.0;
  int N = 1;
  int d = 2;
  double theta = 1.0;
  double chi = 1.0;
  double rho_beta = 1.0;
  double d0 = 0.0;
  double C_rho = 1.0;
  double C_d0 = 1.0;

  static ScaleParameters make(double beta, int N, int d, double C_rho = 1.0, double C_d0 = 1.0);
  // Lower bound C_d0 * theta^{-1/3}.
  double d0_floor() const;
};

// Result of an inequality predicate; `lhs`/`rhs` carry the two sides.
struct Admissibility {
  bool ok = true;
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string message() const;
};

class AdmissibilityError : public std::runtime_error {
 public:
  explicit AdmissibilityError(const Admissibility& a) : std::runtime_error(a.message()), info(a) {}
  Admissibility info;
};

// rho_beta N^{-1/d} < ell <= ell_max.
Admissibility ell_admissible(const ScaleParameters& p, double ell, double ell_max = 1.0);

// ---------------------------------------------------------------------------
// Equilibrium measures

struct MuInfinity {
  double radius = 0.0;
  double density_at_center = 0.0;
  std::shared_ptr<const ScalarField> density;  // Delta V / c_d inside the ball, 0 outside
};

// V = a|x|^2: density 2ad/c_d on the ball of unit mass.
MuInfinity mu_infinity_quadratic(double a, int d);
// Radial V with r^{d-1} V'(r) increasing: support radius solves R^{d-1} V'(R) = c_d/|S^{d-1}|.
MuInfinity mu_infinity_radial(const RadialPolynomial& V);

// Cube grid covering the support of mu_infinity inflated by `inflate` theta^{-1/2}.
GridSpec default_box(const RadialPolynomial& V, double theta, int cells, double inflate = 6.0);

enum class SolverMethod { newton_krylov, picard };

struct EquilibriumOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double damping = 0.5;
  SolverMethod method = SolverMethod::newton_krylov;
  bool nested = true;       // solve on coarser grids first
  int nested_min_cells = 64;
  double theta_start = 4.0;  // continuation start on the coarsest grid
  double theta_factor = 4.0;
  int gmres_restart = 40;
  int gmres_max_iter = 400;
  double density_floor = 1e-300;
};

struct EquilibriumSolution {
  GridDensity mu;
  GridFunction potential;  // g * mu at the cell centres
  double theta = 0.0;
  double C = 0.0;
  double residual = 0.0;  // sup over the residual region of |g*mu + V + log(mu)/theta - C|
  Mask residual_region;
  int iterations = 0;
  double mass() const { return mu.mass(); }
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double last_residual)
      : std::runtime_error(what), residual(last_residual) {}
  double residual;
};

// Fixed point g*mu + V + (1/theta) log mu = C. The residual is measured on
// `region` (all cells with mu above half its maximum when null).
EquilibriumSolution solve_mu_theta(const ScalarField& V, double theta, const GridSpec& grid,
                                   const EquilibriumOptions& opt = {}, const Mask* region = nullptr);

// Same fixed point, evaluated at an arbitrary point: the continuous extension
// mu(x) = exp(theta (C - V(x) - g*mu(x))) with g*mu by the direct cell sum.
double log_mu_theta_at(const EquilibriumSolution& s, const CoulombPotential& pot, const ScalarField& V,
                       const Vec& x);

// Sup over the region of |g*mu + V + log(mu)/theta - C| for a given density.
double fixed_point_residual(const GridDensity& mu, const ScalarField& V, double theta, double C,
                            const Mask& region);

// f_0 = Delta V / c_d, f_{j+1} = f_0 + Delta log f_j / (theta c_d). f_1 uses
// analytic derivatives, later rungs the five-point stencil. Values outside
// `bulk` are zero.
GridFunction f_k_ladder(const RadialPolynomial& V, double theta, int k, const GridSpec& grid,
                        const Mask& bulk);
// Closed form of f_1 for a radial polynomial potential.
double f1_value(const RadialPolynomial& V, double theta, const Vec& x);

// ---------------------------------------------------------------------------
// Bulk region

// Cells with |x| <= radius - d0.
Mask bulk_mask(const GridSpec& grid, double support_radius, double d0);
// Support radius from the radial potential when available, else the level set
// mu >= max(mu)/2 of the solution.
Mask bulk_mask(const EquilibriumSolution& s, const ScaleParameters& p,
               const RadialPolynomial* V = nullptr);
double estimated_support_radius(const GridDensity& mu);

}  // namespace coulomb
