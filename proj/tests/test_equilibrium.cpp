#include "coulomb/equilibrium.hpp"
#include "coulomb/radial.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace coulomb;

TEST(Scales, ThetaChiAndRigidity) {
  const auto p = ScaleParameters::make(2.0, 256, 2);
  EXPECT_DOUBLE_EQ(p.theta, 512.0);
  EXPECT_DOUBLE_EQ(p.chi, 1.0);
  EXPECT_DOUBLE_EQ(chi_beta(0.5, 2), 1.0 + std::log(2.0));
  EXPECT_DOUBLE_EQ(chi_beta(0.5, 3), 1.0);
  const auto q = ScaleParameters::make(2.0, 64, 3);
  EXPECT_NEAR(q.theta, 2.0 * 16.0, 1e-12);
  EXPECT_NEAR(q.d0_floor(), std::pow(q.theta, -1.0 / 3.0), 1e-12);
  EXPECT_THROW(ScaleParameters::make(-1.0, 4, 2), std::invalid_argument);
}

TEST(Scales, EllAdmissibility) {
  const auto p = ScaleParameters::make(2.0, 64, 2);
  EXPECT_TRUE(ell_admissible(p, 0.3).ok);
  const auto low = ell_admissible(p, 0.1);
  EXPECT_FALSE(low.ok);
  EXPECT_NEAR(low.lhs, 0.125, 1e-14);
  EXPECT_FALSE(ell_admissible(p, 1.5).ok);
  EXPECT_FALSE(low.message().empty());
}

TEST(Equilibrium, MuInfinityRadialMatchesQuadratic) {
  for (int d : {2, 3}) {
    const auto V = quadratic_potential(d, 1.0);
    const MuInfinity a = mu_infinity_quadratic(1.0, d);
    const MuInfinity b = mu_infinity_radial(*V);
    EXPECT_NEAR(a.radius, b.radius, 1e-10);
    EXPECT_NEAR(a.density_at_center, b.density_at_center, 1e-12);
    const double vol = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1) * std::pow(a.radius, d);
    EXPECT_NEAR(vol * a.density_at_center, 1.0, 1e-12);
  }
}

TEST(Equilibrium, SolveQuadraticTwoDimensions) {
  const auto V = quadratic_potential(2, 1.0);
  const double theta = 64.0;
  const GridSpec grid = default_box(*V, theta, 128);
  const auto sol = solve_mu_theta(*V, theta, grid);
  EXPECT_NEAR(sol.mass(), 1.0, 1e-10);
  EXPECT_LT(sol.residual, 1e-9);
  for (double v : sol.mu.values()) EXPECT_GT(v, 0.0);
  EXPECT_NEAR(sol.mu.value_at(Vec::Zero()), 2.0 / std::numbers::pi, 2.0 / theta);
  Mask all(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) all[i] = sol.mu[i] > 0.5 * sol.mu.value_at(Vec::Zero());
  EXPECT_LT(fixed_point_residual(sol.mu, *V, theta, sol.C, all), 1e-8);
  EXPECT_NEAR(estimated_support_radius(sol.mu), 1.0 / std::sqrt(2.0), 0.05);
}

TEST(Equilibrium, PicardAgreesWithNewton) {
  const auto V = quadratic_potential(2, 1.0);
  const double theta = 16.0;
  const GridSpec grid = default_box(*V, theta, 64);
  EquilibriumOptions opt;
  opt.tol = 1e-9;
  const auto a = solve_mu_theta(*V, theta, grid, opt);
  opt.method = SolverMethod::picard;
  opt.max_iter = 5000;
  const auto b = solve_mu_theta(*V, theta, grid, opt);
  double diff = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) diff = std::max(diff, std::abs(a.mu[i] - b.mu[i]));
  EXPECT_LT(diff, 1e-6);
}

TEST(Equilibrium, RadialSolverMatchesGridSolve) {
  const auto V = quadratic_potential(2, 1.0);
  const double theta = 64.0;
  const auto grid_sol = solve_mu_theta(*V, theta, default_box(*V, theta, 256));
  RadialOptions ro;
  ro.nodes = 20000;
  const RadialEquilibrium radial(*V, ro);
  const RadialSolution rs = radial.solve(theta);
  EXPECT_NEAR(rs.mass(), 1.0, 1e-10);
  EXPECT_NEAR(rs.mu.front(), grid_sol.mu.value_at(Vec::Zero()), 2e-3);
  EXPECT_NEAR(radial.support_radius(), 1.0 / std::sqrt(2.0), 1e-10);
  EXPECT_GT(rs.mass_outside(radial.support_radius()), 0.0);
}

TEST(Equilibrium, FirstCorrectionClosedForm) {
  const auto V = quartic_potential(2, 1.0, 0.1);
  const double theta = 100.0;
  const Vec x(0.2, 0.1, 0.0);
  // f0 = Delta V / c_d, f1 = f0 + Delta log f0 / (theta c_d) with Delta log f0 by finite differences
  const double cd = 2.0 * std::numbers::pi;
  auto logf0 = [&](const Vec& y) { return std::log(V->laplacian(y) / cd); };
  const double h = 1e-3;
  double lap = 0.0;
  for (int a = 0; a < 2; ++a) {
    Vec e = Vec::Zero();
    e[a] = h;
    lap += (logf0(x + e) - 2 * logf0(x) + logf0(x - e)) / (h * h);
  }
  EXPECT_NEAR(f1_value(*V, theta, x), V->laplacian(x) / cd + lap / (theta * cd), 1e-8);
}

TEST(Equilibrium, BulkMaskErodesSupport) {
  const GridSpec g = GridSpec::cube(2, 1.0, 100);
  const Mask m = bulk_mask(g, 0.7, 0.2);
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    count += m[i];
    EXPECT_EQ(bool(m[i]), g.center(i).norm() <= 0.5);
  }
  EXPECT_NEAR(double(count) * g.cell_volume(), std::numbers::pi * 0.25, 0.02);
}
