#include "coulomb/convolution.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/fields.hpp"
#include "coulomb/grid_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

using namespace coulomb;

TEST(Grid, IndexingRoundTrip) {
  const GridSpec g(3, {4, 5, 6}, Vec(-1, -1, -1), Vec(1, 2, 3));
  EXPECT_EQ(g.size(), 120u);
  for (std::size_t idx : {0ul, 17ul, 119ul}) {
    const auto ijk = g.unravel(idx);
    EXPECT_EQ(g.index(ijk[0], ijk[1], ijk[2]), idx);
    const auto loc = g.locate(g.center(idx));
    EXPECT_EQ(loc, ijk);
  }
  EXPECT_DOUBLE_EQ(g.cell_volume(), 0.5 * 0.6 * (4.0 / 6.0));
  const GridSpec r = g.refined(2);
  EXPECT_EQ(r.n[1], 10);
  EXPECT_TRUE(r.coarsened(2).same_geometry(g));
}

TEST(Grid, LinearInterpolationIsExactForAffine) {
  const GridSpec g = GridSpec::cube(2, 1.0, 16);
  GridFunction f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec c = g.center(i);
    f[i] = 1.0 + 2.0 * c[0] - 0.5 * c[1];
  }
  const Vec x(0.123, -0.456, 0.0);
  EXPECT_NEAR(f.interpolate(x), 1.0 + 2.0 * x[0] - 0.5 * x[1], 1e-13);
  EXPECT_NEAR(f.interpolate(x, Interp::cubic), 1.0 + 2.0 * x[0] - 0.5 * x[1], 1e-12);
}

TEST(Grid, DensityValidationAndNormalization) {
  const GridSpec g = GridSpec::cube(2, 1.0, 4);
  std::vector<double> bad(g.size(), 1.0);
  bad[3] = -1.0;
  EXPECT_THROW(GridDensity(g, bad), std::invalid_argument);
  GridDensity mu(g, std::vector<double>(g.size(), 3.0));
  EXPECT_NEAR(mu.normalized().mass(), 1.0, 1e-14);
  EXPECT_NEAR(mu.upsampled(3).mass(), mu.mass(), 1e-12);
}

TEST(Fields, BumpShapeAndDerivatives) {
  BumpFamily xi(2, Vec(0.1, -0.2, 0.0), 0.3, 4);
  EXPECT_DOUBLE_EQ(xi.value(Vec(0.1, -0.2, 0.0)), 1.0);
  EXPECT_DOUBLE_EQ(xi.value(Vec(0.5, -0.2, 0.0)), 0.0);
  EXPECT_EQ(xi.order(), 3);
  const Vec x(0.2, -0.1, 0.0);
  const double h = 1e-6;
  const Vec g = xi.gradient(x);
  for (int a = 0; a < 2; ++a) {
    Vec e = Vec::Zero();
    e[a] = h;
    EXPECT_NEAR(g[a], (xi.value(x + e) - xi.value(x - e)) / (2 * h), 1e-6);
  }
  EXPECT_NEAR(xi.laplacian(x), xi.hessian(x).trace(), 1e-10);
  const double M = xi.derivative_constant(3);
  for (int k = 0; k <= 3; ++k) EXPECT_LE(xi.sup_derivative(k) * std::pow(0.3, k), M * (1 + 1e-12));
}

TEST(Fields, PolynomialAlgebra) {
  const Polynomial p = Polynomial::binomial_bump(3);
  EXPECT_DOUBLE_EQ(p(0.5), 0.125);
  EXPECT_DOUBLE_EQ(p.derivative()(0.5), -3.0 * 0.25);
  EXPECT_DOUBLE_EQ((p * p)(0.5), 0.125 * 0.125);
  EXPECT_EQ((p * p).degree(), 6);
}

TEST(Fields, StencilLaplacianOfQuadratic) {
  for (int d : {2, 3}) {
    const GridSpec g = GridSpec::cube(d, 1.0, d == 2 ? 32 : 12);
    const auto V = quadratic_potential(d, 1.0);
    const GridFunction L = stencil_laplacian(sample(*V, g));
    const std::size_t mid = g.index(g.n[0] / 2, g.n[1] / 2, d == 3 ? g.n[2] / 2 : 0);
    EXPECT_NEAR(L[mid], 2.0 * d, 1e-9);
    EXPECT_NEAR(V->laplacian(Vec(0.3, 0.2, 0.0)), 2.0 * d, 1e-12);
  }
}

TEST(Fields, PotentialOfUniformDisk) {
  const double a = 0.5;
  const GridSpec g = GridSpec::cube(2, 1.0, 256);
  GridFunction f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = g.center(i).norm() < a ? 1.0 : 0.0;
  const GridDensity mu = GridDensity(f).normalized();
  const CoulombPotential pot(mu);
  for (double r : {0.0, 0.2, 0.8}) {
    const Vec x(r * 0.6, r * 0.8, 0.0);
    const double exact = r < a ? 0.5 - std::log(a) - r * r / (2 * a * a) : -std::log(r);
    EXPECT_NEAR(pot.value(x), exact, 5e-3) << "r=" << r;
  }
}

TEST(Fields, ConvolverMatchesDirectSum) {
  const GridSpec g = GridSpec::cube(2, 1.0, 12);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(double(i));
  CoulombConvolver conv(g);
  const auto out = conv.apply(f);
  const double vol = g.cell_volume();
  for (std::size_t i : {0ul, 50ul, 143ul}) {
    const auto a = g.unravel(i);
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      const auto b = g.unravel(j);
      const bool near = std::abs(a[0] - b[0]) <= 1 && std::abs(a[1] - b[1]) <= 1;
      Vec lo, hi;
      g.cell_box(j, lo, hi);
      s += f[j] * (near ? box_integral_g(g.center(i), lo, hi, 2)
                        : vol * coulomb_g((g.center(i) - g.center(j)).norm(), 2));
    }
    EXPECT_NEAR(out[i], s, 1e-10);
  }
}

TEST(Fields, EnergyOfCircularLaw) {
  const auto V = quadratic_potential(2, 1.0);
  const MuInfinity inf = mu_infinity_quadratic(1.0, 2);
  EXPECT_NEAR(inf.radius, 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(inf.density_at_center, 2.0 / std::numbers::pi, 1e-14);
  const GridSpec g = GridSpec::cube(2, 0.8, 256);
  const GridDensity mu = GridDensity(sample(*inf.density, g)).normalized();
  const double a = inf.radius;
  const double exact = 0.5 * (0.25 - std::log(a)) + a * a / 2;
  EXPECT_NEAR(energy_EV(mu, *V), exact, 5e-3);
}

TEST(GridIo, RoundTripBothEncodings) {
  const GridSpec g(2, {5, 3, 1}, Vec(-1, 0, 0), Vec(1, 0.6, 0));
  GridFunction f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 0.1 * double(i) - 0.3;
  const auto dir = std::filesystem::temp_directory_path();
  for (auto enc : {GridEncoding::binary, GridEncoding::csv}) {
    const auto path = (dir / (enc == GridEncoding::binary ? "coulomb_io.bin" : "coulomb_io.csv")).string();
    save_grid(f, path, enc);
    const GridFunction back = load_grid(path);
    EXPECT_TRUE(back.grid().same_geometry(g));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(back[i], f[i]);
    std::remove(path.c_str());
  }
}

TEST(Fields, PotentialParsing) {
  const auto q = parse_potential("quad", 2);
  EXPECT_DOUBLE_EQ(q->value(Vec(1, 1, 0)), 2.0);
  EXPECT_THROW(parse_potential("nonsense", 2), std::invalid_argument);
}
