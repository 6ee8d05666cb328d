#include "coulomb/fluct.hpp"
#include "coulomb/sampler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <memory>
#include <random>

using namespace coulomb;

namespace {

struct Setup {
  double theta;
  std::shared_ptr<GridDensity> mu;
};

const Setup& equilibrium(int N) {
  static std::map<int, Setup> cache;
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
  const auto V = quadratic_potential(2, 1.0);
  const double theta = 2.0 * N;
  auto sol = solve_mu_theta(*V, theta, default_box(*V, theta, 128));
  return cache[N] = Setup{theta, std::make_shared<GridDensity>(sol.mu)};
}

}  // namespace

TEST(Fluct, ConstantStatisticHasNoFluctuation) {
  const auto& s = equilibrium(64);
  const ConstantField one(2, 1.0);
  std::vector<Vec> x(64, Vec(0.1, 0.1, 0.0));
  EXPECT_NEAR(fluct(one, x, *s.mu), 0.0, 1e-9);
  EXPECT_NEAR(mu_average(one, *s.mu), 1.0, 1e-12);
}

TEST(Fluct, IndependentPointsVariance) {
  // i.i.d. points from mu: Var Fluct = N Var_mu(xi)
  const auto& s = equilibrium(64);
  const int N = 16, S = 4000;
  const BumpFamily xi(2, Vec::Zero(), 0.4, 4);
  TargetSpec t;
  t.N = N;
  t.d = 2;
  t.mu = s.mu;
  std::vector<double> F(S);
  for (int k = 0; k < S; ++k) {
    Rng rng = make_rng(21, k);
    F[k] = fluct(xi, initial_configuration(t, rng), *s.mu);
  }
  const double m1 = mu_average(xi, *s.mu);
  const BumpFamily xi2(2, Vec::Zero(), 0.4, 8);
  const double var_mu = mu_average(xi2, *s.mu) - m1 * m1;
  const Moments mo = moments(F);
  EXPECT_NEAR(mo.variance, N * var_mu, 4 * mo.stderr_variance);
  EXPECT_NEAR(mo.mean, 0.0, 4 * mo.stderr_mean);
}

TEST(Fluct, DirichletEnergyOfBump) {
  // (1/4 pi) int |grad (1 - r^2/l^2)^p|^2 = p / (2 (2p - 1)) in d = 2
  const GridSpec g = GridSpec::cube(2, 0.5, 400);
  for (int p : {3, 4, 6}) {
    const BumpFamily xi(2, Vec::Zero(), 0.3, p);
    EXPECT_NEAR(dirichlet_energy(xi, g), p / (2.0 * (2 * p - 1)), 1e-4) << "p=" << p;
  }
}

TEST(Fluct, VarianceTermsApproachDirichletEnergy) {
  const auto& s = equilibrium(256);
  auto xi = std::make_shared<BumpFamily>(2, Vec::Zero(), 0.3, 4);
  const auto b = TransportBundle::make(xi, 0, s.theta, s.mu);
  const VarianceTerms v = predicted_variance_v(b);
  const double D = dirichlet_energy(*xi, s.mu->grid());
  EXPECT_NEAR(v.gradient + v.cross, D, 2e-3 * D);
  EXPECT_LT(v.density, 0.0);
  EXPECT_LT(std::abs(v.density), 0.2 * D);
  EXPECT_NEAR(std::abs(predicted_mean_m(b, 2.0)), 0.0, 1e-4);
}

TEST(Fluct, LogMeanExp) {
  EXPECT_DOUBLE_EQ(log_mean_exp({1.0, 2.0, 3.0}, 0.0), 0.0);
  EXPECT_NEAR(log_mean_exp({2.0, 2.0}, 1.5), -3.0, 1e-14);
  EXPECT_NEAR(log_mean_exp({0.0, 1000.0}, -1.0), 1000.0 - std::log(2.0), 1e-9);
}

TEST(Fluct, ConcentrationOnGaussianSamples) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0.0, 0.5);
  std::vector<double> F(2000);
  for (double& f : F) f = nd(rng);
  const auto r = concentration_check(F, 2.0, 1.0);
  EXPECT_EQ(r.violations, 0);
  EXPECT_GE(r.C, 0.0);
  EXPECT_EQ(r.calibration + r.validation, 2000);
  EXPECT_FALSE(r.rows.empty());
}

TEST(Fluct, FdModelValidation) {
  const FdModel zero = FdModel::zero();
  EXPECT_NO_THROW(zero.validate({0.5, 1.0, 2.0}, 3));
  const FdModel big = FdModel::tabulated({1.0, 2.0}, {5.0, 5.0}, {0.0, 0.0}, 1.0);
  EXPECT_THROW(big.validate({1.0}, 3), AdmissibilityError);
  EXPECT_DOUBLE_EQ(big.f(10.0), 5.0);
}

TEST(Fluct, HarnessRejectsSupportOutsideBulk) {
  const auto& s = equilibrium(64);
  auto xi = std::make_shared<BumpFamily>(2, Vec(0.55, 0.0, 0.0), 0.3, 4);
  const auto b = TransportBundle::make(xi, 0, s.theta, s.mu);
  const auto p = ScaleParameters::make(2.0, 64, 2);
  const Mask bulk = bulk_mask(s.mu->grid(), 1.0 / std::sqrt(2.0), p.d0);
  EXPECT_FALSE(support_in_bulk(b, bulk, p.d0).ok);
  CltOptions opt;
  opt.bulk = &bulk;
  EXPECT_THROW(clt_harness(std::vector<double>(200, 0.0), b, p, 0.3, opt), AdmissibilityError);
}

TEST(Fluct, HarnessReportsGaussianPrediction) {
  const auto& s = equilibrium(64);
  auto xi = std::make_shared<BumpFamily>(2, Vec::Zero(), 0.3, 4);
  const auto b = TransportBundle::make(xi, 0, s.theta, s.mu);
  const auto p = ScaleParameters::make(2.0, 64, 2);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 0.5);
  std::vector<double> F(1000);
  for (double& f : F) f = nd(rng);
  const auto rep = clt_harness(F, b, p, 0.3);
  EXPECT_NEAR(rep.normalizer, std::sqrt(2.0), 1e-14);
  ASSERT_TRUE(rep.m.has_value());
  ASSERT_EQ(rep.laplace.size(), 6u);
  for (const auto& lp : rep.laplace) {
    EXPECT_TRUE(lp.has_prediction);
    EXPECT_NEAR(lp.predicted, -lp.tau * *rep.m + lp.tau * lp.tau * rep.v_scaled, 1e-12);
  }
}
