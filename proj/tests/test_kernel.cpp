#include "coulomb/kernel.hpp"
#include "coulomb/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace coulomb;

TEST(Kernel, ValuesAndConstants) {
  EXPECT_DOUBLE_EQ(coulomb_g(2.0, 2), -std::log(2.0));
  EXPECT_DOUBLE_EQ(coulomb_g(2.0, 3), 0.5);
  EXPECT_DOUBLE_EQ(coulomb_cd(2), 2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(coulomb_cd(3), 4.0 * std::numbers::pi);
  EXPECT_THROW(coulomb_g(0.0, 2), std::domain_error);
  EXPECT_THROW(Kernel(1), std::invalid_argument);
}

TEST(Kernel, GradientMatchesFiniteDifference) {
  for (int d : {2, 3}) {
    Kernel k(d);
    const Vec x(0.3, -0.7, d == 3 ? 0.4 : 0.0);
    const Vec gr = k.grad(x);
    const double h = 1e-6;
    for (int a = 0; a < d; ++a) {
      Vec e = Vec::Zero();
      e[a] = h;
      const double fd = (k.g((x + e).norm()) - k.g((x - e).norm())) / (2 * h);
      EXPECT_NEAR(gr[a], fd, 1e-8) << "d=" << d << " axis " << a;
    }
  }
}

TEST(Kernel, HessianIsTraceFree) {
  for (int d : {2, 3}) {
    Kernel k(d);
    const Vec x(0.5, 0.2, d == 3 ? -0.3 : 0.0);
    EXPECT_NEAR(k.hessian(x).trace(), 0.0, 1e-12);
  }
}

TEST(Kernel, TruncationSplitsKernel) {
  for (int d : {2, 3}) {
    const double eta = 0.1;
    const Vec inside(0.05, 0.02, 0.0), outside(0.3, 0.0, 0.0);
    EXPECT_TRUE(f_eta(Vec::Zero(), eta, d).is_infinite());
    EXPECT_DOUBLE_EQ(f_eta(outside, eta, d).value(), 0.0);
    EXPECT_DOUBLE_EQ(g_eta(outside, eta, d), coulomb_g(0.3, d));
    const double r = inside.norm();
    EXPECT_GT(f_eta(inside, eta, d).value(), 0.0);
    EXPECT_NEAR(f_eta(inside, eta, d).value() + g_eta(inside, eta, d), coulomb_g(r, d), 1e-12);
    EXPECT_DOUBLE_EQ(g_eta(inside, eta, d), coulomb_g(eta, d));
  }
}

TEST(Kernel, BoxIntegralMatchesGaussRuleAwayFromBox) {
  const GaussRule gl = gauss_legendre(24, 0.0, 1.0);
  for (int d : {2, 3}) {
    const Vec lo(0.0, 0.0, 0.0), hi(1.0, 1.0, d == 3 ? 1.0 : 0.0);
    const Vec x(2.5, -1.0, d == 3 ? 0.5 : 0.0);
    double ref = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
      for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
        if (d == 2) {
          ref += gl.weights[i] * gl.weights[j] * coulomb_g((x - Vec(gl.nodes[i], gl.nodes[j], 0)).norm(), 2);
          continue;
        }
        for (std::size_t k = 0; k < gl.nodes.size(); ++k)
          ref += gl.weights[i] * gl.weights[j] * gl.weights[k] *
                 coulomb_g((x - Vec(gl.nodes[i], gl.nodes[j], gl.nodes[k])).norm(), 3);
      }
    EXPECT_NEAR(box_integral_g(x, lo, hi, d), ref, 1e-12) << "d=" << d;
  }
}

TEST(Kernel, BoxIntegralIsAdditiveAcrossSingularPoint) {
  for (int d : {2, 3}) {
    const double z = d == 3 ? 1.0 : 0.0;
    const Vec lo(-0.4, -0.3, -0.2 * z), hi(0.5, 0.6, 0.7 * z);
    const Vec x(0.1, 0.2, 0.1 * z);
    double parts = 0.0;
    for (int mask = 0; mask < (1 << d); ++mask) {
      Vec a = lo, b = hi;
      for (int ax = 0; ax < d; ++ax) {
        if (mask & (1 << ax)) a[ax] = x[ax];
        else b[ax] = x[ax];
      }
      parts += box_integral_g(x, a, b, d);
    }
    EXPECT_NEAR(box_integral_g(x, lo, hi, d), parts, 1e-12) << "d=" << d;
  }
}

TEST(Kernel, SphereAverageOfExteriorPotential) {
  const Vec src(1.0, 0.5, 0.0);
  for (int d : {2, 3}) {
    const auto rule = d == 2 ? SphereRule::make(2, 64) : SphereRule::make(3, 24);
    double w = 0.0;
    for (double v : rule.weights) w += v;
    EXPECT_NEAR(w, 1.0, 1e-14);
    auto f = [&](const Vec& y) { return coulomb_g((y - src).norm(), d); };
    EXPECT_NEAR(sphere_average(f, Vec::Zero(), 0.3, rule), coulomb_g(src.norm(), d), 1e-10) << "d=" << d;
  }
}

TEST(Kernel, LebedevRuleIntegratesHarmonicQuadratic) {
  const auto rule = SphereRule::make(3, 26);
  auto f = [](const Vec& y) { return y[0] * y[0] - y[1] * y[1] + 3 * y[2] * y[0]; };
  EXPECT_NEAR(sphere_average(f, Vec(0.2, 0.1, 0.0), 0.5, rule), f(Vec(0.2, 0.1, 0.0)), 1e-13);
}

TEST(Quadrature, GaussLegendreExactness) {
  const GaussRule gl = gauss_legendre(5, -1.0, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 9);
  EXPECT_NEAR(s, (std::pow(2.0, 10) - 1.0) / 10.0, 1e-11);
}

TEST(Quadrature, TreeSumMatchesSum) {
  std::vector<double> x(1001);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0 / double(i + 1);
  double s = 0.0;
  for (double v : x) s += v;
  EXPECT_NEAR(tree_sum(x), s, 1e-13);
  EXPECT_EQ(tree_sum(nullptr, 0), 0.0);
}
