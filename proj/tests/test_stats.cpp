#include "coulomb/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace coulomb;

TEST(Stats, MomentsOfSmallSample) {
  const Moments m = moments({1.0, 2.0, 3.0, 4.0, 10.0});
  EXPECT_DOUBLE_EQ(m.mean, 4.0);
  EXPECT_DOUBLE_EQ(m.variance, 12.5);
  EXPECT_GT(m.skewness, 0.0);
  EXPECT_NEAR(m.stderr_mean, std::sqrt(12.5 / 5.0), 1e-14);
  EXPECT_THROW(moments({1.0, 2.0}), std::invalid_argument);
}

TEST(Stats, KolmogorovSurvival) {
  EXPECT_DOUBLE_EQ(kolmogorov_survival(0.0), 1.0);
  EXPECT_NEAR(kolmogorov_survival(1.358), 0.05, 1e-3);
  EXPECT_NEAR(kolmogorov_survival(1.628), 0.01, 1e-3);
}

TEST(Stats, TwoSampleKs) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> a(2000), b(2000), c(2000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = nd(rng);
    b[i] = nd(rng);
    c[i] = nd(rng) + 0.3;
  }
  EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
  EXPECT_LT(ks_two_sample(a, c).p_value, 1e-6);
  EXPECT_DOUBLE_EQ(ks_two_sample({1.0, 2.0}, {3.0, 4.0}).statistic, 1.0);
}

TEST(Stats, LineFit) {
  const LinearFit f = fit_line({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.slope_stderr, 0.0, 1e-12);
  const LinearFit w = fit_line({0.0, 1.0, 2.0}, {0.0, 1.0, 5.0}, {1.0, 1.0, 1e6});
  EXPECT_NEAR(w.slope, 1.0, 1e-6);
  EXPECT_THROW(fit_line({1.0}, {1.0}), std::invalid_argument);
}

TEST(Stats, Thinning) {
  const auto t = thin({0, 1, 2, 3, 4, 5, 6}, 3);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[2], 6.0);
}
