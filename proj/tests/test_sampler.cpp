#include "coulomb/sampler.hpp"
#include "coulomb/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace coulomb;

namespace {

TargetSpec quadratic_target(int N, int d, double beta) {
  TargetSpec t;
  t.kind = Target::gibbs_V;
  t.beta = beta;
  t.N = N;
  t.d = d;
  t.V = quadratic_potential(d, 1.0);
  return t;
}

}  // namespace

TEST(Sampler, StreamsAreReproducibleAndDistinct) {
  Rng a = make_rng(7, 0), b = make_rng(7, 0), c = make_rng(7, 1), e = make_rng(8, 0);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, e());
  EXPECT_EQ(parse_target("Q"), Target::gibbs_Q);
  EXPECT_THROW(parse_target("W"), std::invalid_argument);
}

TEST(Sampler, CachesStayConsistent) {
  const TargetSpec t = quadratic_target(40, 3, 2.0);
  Rng rng = make_rng(3, 0);
  auto init = initial_configuration(t, rng);
  ChainState s(t, init, make_rng(3, 1), 0.1);
  for (int k = 0; k < 50; ++k) s.sweep();
  EXPECT_NEAR(s.log_density_cached(), t.log_density(s.points()), 1e-9 * std::abs(t.log_density(s.points())));
  EXPECT_LT(s.refresh_caches(), 1e-10);
  EXPECT_GT(s.accepted(), 0u);
}

TEST(Sampler, AcceptanceRatioMatchesDensityDifference) {
  const TargetSpec t = quadratic_target(6, 2, 2.0);
  Rng rng = make_rng(1, 0);
  const auto init = initial_configuration(t, rng);
  ChainState s(t, init, make_rng(1, 1), 0.1);
  const Vec y(0.05, -0.12, 0.0);
  auto moved = init;
  moved[2] = y;
  EXPECT_NEAR(s.log_acceptance(2, y), t.log_density(moved) - t.log_density(init), 1e-10);
}

TEST(Sampler, DetailedBalance) {
  const TargetSpec t = quadratic_target(5, 2, 4.0);
  Rng rng = make_rng(2, 0);
  const auto x = initial_configuration(t, rng);
  auto y = x;
  y[3] += Vec(0.07, -0.03, 0.0);
  const double sigma = 0.08;
  const double lhs = std::exp(t.log_density(x)) * transition_density(t, x, y, sigma);
  const double rhs = std::exp(t.log_density(y)) * transition_density(t, y, x, sigma);
  EXPECT_NEAR(lhs / rhs, 1.0, 1e-10);
  auto z = y;
  z[0] += Vec(0.01, 0.0, 0.0);
  EXPECT_EQ(transition_density(t, x, z, sigma), 0.0);
}

TEST(Sampler, SingleParticleGaussianVariance) {
  // N = 1: density exp(-beta |x|^2), each coordinate has variance 1/(2 beta)
  const double beta = 2.0;
  const TargetSpec t = quadratic_target(1, 2, beta);
  SamplerOptions o;
  o.sweeps = 40000;
  o.burnin = 1000;
  o.thin = 1;
  o.sigma = 0.6;
  o.seed = 9;
  const SampleSet s = run_chain(t, o);
  std::vector<double> xs;
  for (const auto& c : s.configurations) xs.push_back(c[0][0]);
  const auto dg = diagnostics(xs);
  const double var = dg.sd * dg.sd;
  EXPECT_NEAR(var, 1.0 / (2 * beta), 0.03);
  EXPECT_NEAR(dg.mean, 0.0, 4 * dg.stderr_mean);
}

TEST(Sampler, RunsAreReproducible) {
  const TargetSpec t = quadratic_target(16, 2, 2.0);
  SamplerOptions o;
  o.sweeps = 50;
  o.burnin = 20;
  o.thin = 5;
  o.seed = 4;
  const SampleSet a = run_chain(t, o), b = run_chain(t, o);
  ASSERT_EQ(a.configurations.size(), 10u);
  EXPECT_EQ(a.configurations.back()[7], b.configurations.back()[7]);
  const auto many = run_chains(t, o, 2, 2);
  ASSERT_EQ(many.size(), 2u);
  EXPECT_EQ(many[0].configurations.back()[7], a.configurations.back()[7]);
  EXPECT_NE(many[1].configurations.back()[7], a.configurations.back()[7]);
}

TEST(Sampler, SampleCsvRoundTrip) {
  const TargetSpec t = quadratic_target(5, 3, 2.0);
  SamplerOptions o;
  o.sweeps = 6;
  o.burnin = 2;
  o.thin = 2;
  const SampleSet s = run_chain(t, o);
  std::stringstream ss;
  write_samples_csv(s, ss);
  const SampleSet back = read_samples_csv(ss, 3);
  ASSERT_EQ(back.configurations.size(), s.configurations.size());
  EXPECT_EQ(back.sweeps, s.sweeps);
  for (std::size_t k = 0; k < s.configurations.size(); ++k)
    for (int i = 0; i < 5; ++i) EXPECT_NEAR((back.configurations[k][i] - s.configurations[k][i]).norm(), 0.0, 1e-15);
}

TEST(Sampler, GinibreFillsDiskOfRadiusOneOverSqrtTwo) {
  const int N = 128;
  double mean_r2 = 0.0, max_r = 0.0;
  const int reps = 20;
  for (int k = 0; k < reps; ++k) {
    Rng rng = make_rng(5, k);
    const PointConfiguration X = ginibre_sample(N, rng);
    ASSERT_EQ(X.size(), N);
    for (const Vec& p : X.points()) {
      mean_r2 += p.squaredNorm() / (N * reps);
      max_r = std::max(max_r, p.norm());
    }
  }
  EXPECT_NEAR(mean_r2, 0.25, 0.01);
  EXPECT_LT(max_r, 1.0);
}

TEST(Diagnostics, AutoregressiveTauInt) {
  // AR(1) with coefficient phi: tau_int = (1 + phi) / (2 (1 - phi))
  const double phi = 0.5;
  Rng rng = make_rng(12, 0);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> x(100000);
  double v = 0.0;
  for (double& e : x) e = v = phi * v + nd(rng);
  EXPECT_NEAR(integrated_autocorrelation_time(x), 1.5, 0.12);
  const auto dg = diagnostics(x);
  EXPECT_NEAR(dg.ess, double(x.size()) / (2 * dg.tau_int), 1e-6 * dg.ess);
  EXPECT_THROW(diagnostics(std::vector<double>(10, 1.0)), std::invalid_argument);
}
