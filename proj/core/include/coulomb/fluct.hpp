#pragma once

#include "coulomb/energy.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/stats.hpp"
#include "coulomb/transport.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace coulomb {

// Fluct(xi) = sum_i xi(x_i) - N int xi dmu (midpoint rule on the grid of mu).
double fluct(const ScalarField& xi, const PointConfiguration& X, const GridDensity& mu);
double fluct(const ScalarField& xi, const std::vector<Vec>& x, const GridDensity& mu);
// int xi dmu
double mu_average(const ScalarField& xi, const GridDensity& mu);

struct VarianceTerms {
  double gradient = 0.0;  // -(1/2c_d) int |sum_k grad L^k xi / theta^k|^2
  double cross = 0.0;     // (1/c_d) int sum_k grad xi . grad L^k xi / theta^k
  double density = 0.0;   // -(1/2 theta) int mu |sum_k L^{k+1} xi / theta^k|^2
  double value() const { return gradient + cross + density; }
};

VarianceTerms predicted_variance_v(const TransportBundle& b);
// (1/2c_d) int |grad xi|^2 by cell quadrature with analytic gradients.
double dirichlet_energy(const ScalarField& xi, const GridSpec& grid);

// Free energy per unit volume of the infinite gas, supplied by the user.
struct FdModel {
  std::function<double(double)> f;
  std::function<double(double)> fprime;
  double C = 1.0;  // declared constant of -C <= f <= C chi(beta)

  // Linear interpolation of a table (beta increasing); constant outside.
  static FdModel tabulated(std::vector<double> beta, std::vector<double> f, std::vector<double> fprime,
                           double C);
  static FdModel zero();
  // Checks -C <= f <= C chi(beta) at the given betas; throws naming the first violation.
  void validate(const std::vector<double>& betas, int d) const;
};

// d = 2: -(beta^{1/2}/4) int (sum_k Delta L^k xi / (c_d theta^k)) log mu.
double predicted_mean_m(const TransportBundle& b, double beta);
// d >= 3: -N l^2 beta^{1/2} (N^{1/d} l)^{-1-d/2} (1 - 2/d) int (sum_k Delta L^k xi / (c_d theta^k))
//          (f_d(b mu^{1-2/d}) + b mu^{1-2/d} f_d'(b mu^{1-2/d})).
double predicted_mean_m(const TransportBundle& b, double beta, const FdModel& fd, int N, double ell);

struct LaplacePoint {
  double tau = 0.0;
  double empirical = 0.0;  // log of the mean of exp(-tau a Fluct)
  double stderr = 0.0;     // delta method
  double predicted = 0.0;  // -tau m + tau^2 v (v scaled by l^{2-d} in d >= 3)
  bool has_prediction = false;
};

struct FluctuationReport {
  int d = 2;
  int N = 0;
  double beta = 0.0;
  double theta = 0.0;
  double ell = 0.0;
  int q = 0;
  double normalizer = 1.0;  // a = beta^{1/2} (N^{1/d} l)^{1 - d/2}
  std::vector<double> samples;
  Moments raw;         // of Fluct
  Moments normalized;  // of a Fluct
  VarianceTerms v;
  double v_scaled = 0.0;     // v, times l^{2-d} in d >= 3
  std::optional<double> m;   // absent in d >= 3 without an FdModel
  double z_mean = 0.0;       // (mean - m) / stderr; zero without m
  double z_variance = 0.0;   // (variance - 2 v_scaled) / stderr
  std::vector<LaplacePoint> laplace;
};

struct CltOptions {
  std::vector<double> tau_grid{-1.0, -0.5, -0.25, 0.25, 0.5, 1.0};
  const FdModel* fd = nullptr;
  // When set, supp xi must lie in the flagged cells of the grid of mu.
  const Mask* bulk = nullptr;
  bool check_ell = true;  // rho_beta N^{-1/d} < l <= 1
};

// Cells of supp xi outside the bulk mask (ok when there are none).
Admissibility support_in_bulk(const TransportBundle& b, const Mask& bulk, double d0);

FluctuationReport clt_harness(const std::vector<double>& fluct_samples, const TransportBundle& b,
                              const ScaleParameters& p, double ell, const CltOptions& opt = {});

// log of the sample mean of exp(-s x_i), by log-sum-exp.
double log_mean_exp(const std::vector<double>& x, double s);

struct ConcentrationRow {
  double t = 0.0;
  double tail = 0.0;          // P(min(1, beta) |Fluct| > t) on the validation half
  double bound = 0.0;         // exp(-t + C (1 + M^4))
  bool constrained = false;   // bound < 1
  bool violated = false;
};

struct ConcentrationReport {
  double M = 0.0;
  double C = 0.0;  // fitted on the calibration half
  int calibration = 0;
  int validation = 0;
  int violations = 0;
  std::vector<ConcentrationRow> rows;
};

// The first half of the samples fits the smallest C whose bound dominates the
// upper 3-sigma Wilson limit of the empirical tail; the second half is checked
// against it. An empty t grid uses 40 points up to the largest |Fluct|.
ConcentrationReport concentration_check(const std::vector<double>& fluct_samples, double beta, double M,
                                        std::vector<double> t_grid = {});

}  // namespace coulomb
