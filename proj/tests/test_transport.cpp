#include "coulomb/transport.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

using namespace coulomb;

namespace {

struct Setup {
  double theta;
  std::shared_ptr<GridDensity> mu;
};

const Setup& equilibrium64() {
  static const Setup s = [] {
    const auto V = quadratic_potential(2, 1.0);
    const double theta = 128.0;
    auto sol = solve_mu_theta(*V, theta, default_box(*V, theta, 128));
    return Setup{theta, std::make_shared<GridDensity>(sol.mu)};
  }();
  return s;
}

}  // namespace

TEST(Transport, LOfQuadraticOnUniformDensity) {
  for (int d : {2, 3}) {
    const GridSpec g = GridSpec::cube(d, 1.0, d == 2 ? 16 : 8);
    const GridDensity mu(g, std::vector<double>(g.size(), 0.3));
    const GridFunction L = apply_L(*quadratic_potential(d, 1.0), mu);
    EXPECT_NEAR(L[g.size() / 2], 2.0 * d / (coulomb_cd(d) * 0.3), 1e-12);
  }
}

TEST(Transport, PsiSolvesTheDivergenceEquation) {
  const auto& s = equilibrium64();
  auto xi = std::make_shared<BumpFamily>(2, Vec(0.05, -0.1, 0.0), 0.3, 4);
  const auto b = TransportBundle::make(xi, 0, s.theta, s.mu);
  const GridSpec& g = s.mu->grid();
  std::array<GridFunction, 3> flux;
  for (int a = 0; a < 3; ++a) flux[a] = GridFunction(g);
  for (int a = 0; a < 2; ++a)
    for (std::size_t i = 0; i < g.size(); ++i) flux[a][i] = b.psi_grid[a][i] * (*s.mu)[i];
  const GridFunction div = stencil_divergence(flux);
  const GridFunction ref = b.minus_div_psi_mu();
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    err = std::max(err, std::abs(-div[i] - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  EXPECT_LT(err, 0.02 * scale);
  EXPECT_GT(b.alpha, 0.0);
}

TEST(Transport, RequiresEnoughDerivatives) {
  const auto& s = equilibrium64();
  auto xi = std::make_shared<BumpFamily>(2, Vec::Zero(), 0.3, 3);
  EXPECT_THROW(TransportBundle::make(xi, 1, s.theta, s.mu), std::invalid_argument);
}

TEST(Transport, PerturbedDensityKeepsMass) {
  const auto& s = equilibrium64();
  auto xi = std::make_shared<BumpFamily>(2, Vec::Zero(), 0.3, 6);
  const auto b = TransportBundle::make(xi, 1, s.theta, s.mu);
  const double t = 1e-3;
  EXPECT_NEAR(b.nu_t(t).mass(), s.mu->mass(), 1e-6);
  EXPECT_TRUE(nu_positivity(b, t).ok);
  EXPECT_FALSE(nu_positivity(b, 1e3).ok);
  EXPECT_TRUE(psi_smallness(b, t).ok);
  EXPECT_FALSE(psi_smallness(b, 1e3).ok);
}

TEST(Transport, PushForwardLinearizationIsSecondOrder) {
  const auto& s = equilibrium64();
  auto xi = std::make_shared<BumpFamily>(2, Vec::Zero(), 0.3, 4);
  const auto b = TransportBundle::make(xi, 0, s.theta, s.mu);
  const double t = 4e-3;
  const GapNorms g1 = linearization_gap(*s.mu, b.psi, t);
  const GapNorms g2 = linearization_gap(*s.mu, b.psi, t / 2);
  EXPECT_NEAR(std::log2(g1.sup / g2.sup), 2.0, 0.3);
  EXPECT_NEAR(push_forward(*s.mu, b.psi, t).mass(), s.mu->mass(), 1e-5);
}

TEST(Transport, AnisotropyMatchesFiniteDifferences) {
  const auto& s = equilibrium64();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 0.35);
  std::vector<Vec> pts;
  for (int i = 0; i < 64; ++i) pts.emplace_back(nd(rng), nd(rng), 0.0);
  const PointConfiguration X(2, pts);
  auto xi = std::make_shared<BumpFamily>(2, Vec(0.1, 0.05, 0.0), 0.3, 4);
  const auto b = TransportBundle::make(xi, 0, s.theta, s.mu);
  const TransportQuadrature Q(X, *s.mu);
  const double t = 1e-4;
  const double fp = Q.moving_energy(b.psi, t), fm = Q.moving_energy(b.psi, -t), f0 = Q.moving_energy(b.psi, 0.0);
  const double a1 = Q.anisotropy(b.psi, 1), a2 = Q.anisotropy(b.psi, 2);
  EXPECT_NEAR(a1, (fp - fm) / (2 * t), 1e-3 * std::abs(a1));
  EXPECT_NEAR(a2, (fp - 2 * f0 + fm) / (2 * t * t), 1e-2 * std::abs(a2));
  EXPECT_NEAR(anisotropy_A1(X, *s.mu, b.psi), a1, 1e-12 * std::abs(a1));
}

TEST(Transport, DivergencePreimageOneDimension) {
  const int n = 200;
  std::vector<double> f(n);
  const double h = 2.0 / n;
  for (int j = 0; j < n; ++j) f[j] = std::sin(std::numbers::pi * (-1.0 + (j + 0.5) * h));
  const auto u = divergence_preimage_1d(f, -1.0, 1.0);
  for (int j = 0; j + 1 < n; ++j) EXPECT_NEAR((u[j + 1] - u[j]) / h, 0.5 * (f[j] + f[j + 1]), 1e-10);
  std::vector<double> g(n, 1.0);
  EXPECT_THROW(divergence_preimage_1d(g, -1.0, 1.0), std::invalid_argument);
}

TEST(Transport, DivergencePreimageGrid) {
  const GridSpec g = GridSpec::cube(2, 1.0, 64);
  GridFunction f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec c = g.center(i);
    f[i] = c[0] * std::exp(-8.0 * c.squaredNorm());
  }
  const auto U = divergence_preimage_grid(f);
  const GridFunction div = stencil_divergence(U);
  double err = 0.0;
  for (int i = 2; i < 62; ++i)
    for (int j = 2; j < 62; ++j) err = std::max(err, std::abs(div[g.index(i, j)] - f[g.index(i, j)]));
  EXPECT_LT(err, 0.01 * f.max_abs());
}
