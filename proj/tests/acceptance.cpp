// Acceptance checks: one PASS/FAIL line per criterion.
//   acceptance                 all criteria
//   acceptance --criterion 4   selected criteria (repeatable, or comma separated)

#include "coulomb/energy.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/fluct.hpp"
#include "coulomb/radial.hpp"
#include "coulomb/sampler.hpp"
#include "coulomb/stats.hpp"
#include "coulomb/transport.hpp"

#include <algorithm>
#include <atomic>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace coulomb;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

int worker_count() {
  if (const char* env = std::getenv("COULOMB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& body) {
  const int T = std::min(worker_count(), std::max(n, 1));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < T; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) body(i);
    });
  for (auto& t : pool) t.join();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<GridDensity> equilibrium(const RadialPolynomial& V, double theta, int cells) {
  return std::make_shared<GridDensity>(solve_mu_theta(V, theta, default_box(V, theta, cells)).mu);
}

std::vector<double> fluct_trace(const TargetSpec& t, SamplerOptions o, const ScalarField& xi,
                                const GridDensity& mu) {
  o.on_sweep = nullptr;
  const SampleSet s = run_chain(t, o);
  std::vector<double> F;
  F.reserve(s.configurations.size());
  for (const auto& x : s.configurations) F.push_back(fluct(xi, x, mu));
  return F;
}

// ---------------------------------------------------------------------------

Outcome splitting_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto V = quadratic_potential(2, 1.0);
  const int N = 64;
  const double theta = 512.0;
  double worst[2] = {0, 0}, mean[2] = {0, 0};
  const int cells[2] = {256, 512};
  for (int gi = 0; gi < 2; ++gi) {
    const auto sol = solve_mu_theta(*V, theta, default_box(*V, theta, cells[gi]));
    const CoulombPotential pot(sol.mu);
    GridFunction log_mu(sol.mu.grid());
    for (std::size_t i = 0; i < log_mu.size(); ++i) log_mu[i] = std::log(std::max(sol.mu[i], 1e-300));
    TargetSpec t;
    t.N = N;
    t.d = 2;
    t.mu = std::make_shared<GridDensity>(sol.mu);
    for (int k = 0; k < 50; ++k) {
      Rng rng = make_rng(3, k);
      const PointConfiguration X(2, initial_configuration(t, rng));
      std::vector<double> lm;
      for (const Vec& p : X.points()) lm.push_back(log_mu.interpolate(p, Interp::linear));
      const double H = hamiltonian(X, *V);
      const double rel = std::abs(H - splitting_rhs(X, pot, *V, theta, lm)) / std::abs(H);
      worst[gi] = std::max(worst[gi], rel);
      mean[gi] += rel / 50;
    }
  }
  const double order = std::log2(mean[0] / mean[1]);
  const double el = seconds_since(t0);
  return {worst[1] <= 1e-4 && order >= 1.5 && el < 60.0,
          fmt("worst rel 512^2 %.2e (<= 1e-4), mean 256^2 %.2e -> 512^2 %.2e, observed order %.2f (>= 1.5), %.1fs (< 60s)",
              worst[1], mean[0], mean[1], order, el)};
}

Outcome electric_form() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto V = quadratic_potential(2, 1.0);
  const int N = 8;
  const double theta = 32.0;
  const auto sol = solve_mu_theta(*V, theta, GridSpec::cube(2, 1.1, 300));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 0.35);
  std::vector<Vec> pts;
  while (int(pts.size()) < N) {
    const Vec p(nd(rng), nd(rng), 0.0);
    bool ok = p.norm() < 0.8;
    for (const Vec& q : pts) ok = ok && (p - q).norm() >= 0.25;
    if (ok) pts.push_back(p);
  }
  const PointConfiguration X(2, pts);
  const double pair = next_order_energy(X, sol.mu);
  const GridSpec coarse = sol.mu.grid().refined(2), fine = sol.mu.grid().refined(4);
  std::vector<double> vals;
  for (double f : {1.0, 0.5, 0.25}) {
    std::vector<double> eta = X.radii();
    for (double& e : eta) e *= f;
    vals.push_back(electric_energy_oracle(X, sol.mu, eta, coarse).value);
  }
  double spread = 0.0;
  for (double v : vals) spread = std::max(spread, std::abs(v - vals[0]) / std::abs(vals[0]));
  const double E_fine = electric_energy_oracle(X, sol.mu, X.radii(), fine).value;
  const double tol = std::abs(E_fine - vals[0]);
  const double gap = std::abs(E_fine - pair);
  const double el = seconds_since(t0);
  return {gap <= tol && spread <= 1e-6 && el < 120.0,
          fmt("pairwise %.8f, electric %d^2 %.8f, %d^2 %.8f: |diff| %.2e <= refinement estimate %.2e; "
              "eta spread %.2e (<= 1e-6), %.1fs (< 120s)",
              pair, coarse.n[0], vals[0], fine.n[0], E_fine, gap, tol, spread, el)};
}

Outcome transport_derivative() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto V = quadratic_potential(2, 1.0);
  const int N = 64;
  const double theta = 2.0 * N;
  const auto mu = equilibrium(*V, theta, 128);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 0.35);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  double worst1 = 0.0, worst2 = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    std::vector<Vec> pts;
    for (int i = 0; i < N; ++i) pts.emplace_back(nd(rng), nd(rng), 0.0);
    const PointConfiguration X(2, pts);
    auto xi = std::make_shared<BumpFamily>(2, Vec(u(rng), u(rng), 0.0), 0.3, 4);
    const auto b = TransportBundle::make(xi, 0, theta, mu);
    const TransportQuadrature Q(X, *mu);
    const double t = 1e-4;
    const double fp = Q.moving_energy(b.psi, t), fm = Q.moving_energy(b.psi, -t), f0 = Q.moving_energy(b.psi, 0.0);
    const double a1 = Q.anisotropy(b.psi, 1), a2 = Q.anisotropy(b.psi, 2);
    worst1 = std::max(worst1, std::abs(a1 - (fp - fm) / (2 * t)) / std::abs(a1));
    worst2 = std::max(worst2, std::abs(a2 - (fp - 2 * f0 + fm) / (2 * t * t)) / std::abs(a2));
  }
  const double el = seconds_since(t0);
  return {worst1 <= 1e-3 && worst2 <= 1e-2 && el < 120.0,
          fmt("10 instances: worst |A1 - FD| rel %.2e (<= 1e-3), worst |A2 - FD2/2| rel %.2e (<= 1e-2), %.1fs (< 120s)",
              worst1, worst2, el)};
}

// Ginibre run shared by criteria 4, 5 and 9.
struct GinibreRun {
  std::vector<double> F;
  VarianceTerms v;
  double m = 0.0;
  double M = 0.0;
  double seconds = 0.0;
};

const GinibreRun& ginibre_run() {
  static std::optional<GinibreRun> run;
  if (run) return *run;
  const auto t0 = std::chrono::steady_clock::now();
  const int N = 256, S = 2000;
  const double beta = 2.0, theta = beta * N;
  const auto V = quadratic_potential(2, 1.0);
  const auto mu = equilibrium(*V, theta, 256);
  auto xi = std::make_shared<BumpFamily>(2, Vec::Zero(), 0.3, 4);
  const auto b = TransportBundle::make(xi, 0, theta, mu);
  GinibreRun r;
  r.v = predicted_variance_v(b);
  r.m = predicted_mean_m(b, beta);
  r.M = xi->derivative_constant(3);
  r.F.resize(S);
  parallel_for(S, [&](int k) {
    Rng rng = make_rng(7, std::uint64_t(k));
    r.F[std::size_t(k)] = fluct(*xi, ginibre_sample(N, rng), *mu);
  });
  r.seconds = seconds_since(t0);
  run = std::move(r);
  return *run;
}

Outcome ginibre_variance() {
  const GinibreRun& r = ginibre_run();
  const Moments mo = moments(r.F);
  const double ratio = mo.variance / r.v.value();
  return {std::abs(ratio - 1.0) <= 0.15,
          fmt("N=256, 2000 samples: Var %.5f, v_pred %.5f (Dirichlet %.5f, density term %.5f), ratio %.4f +- %.4f, "
              "|ratio - 1| <= 0.15, %.0fs",
              mo.variance, r.v.value(), r.v.gradient + r.v.cross, r.v.density, ratio,
              mo.stderr_variance / r.v.value(), r.seconds)};
}

Outcome ginibre_mean() {
  const GinibreRun& r = ginibre_run();
  const Moments mo = moments(r.F);
  const double z = (mo.mean - r.m) / mo.stderr_mean;
  return {std::abs(z) <= 3.0,
          fmt("mean Fluct %.5f, stderr %.5f, predicted m %.2e, z %.2f (|z| <= 3)", mo.mean, mo.stderr_mean, r.m, z)};
}

Outcome sampler_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  const int N = 64;
  const double beta = 2.0, theta = beta * N;
  const auto V = quadratic_potential(2, 1.0);
  const auto mu = equilibrium(*V, theta, 256);
  const BumpFamily xi(2, Vec::Zero(), 0.3, 4);
  const int kept = 4000, thin = 20;

  SamplerOptions o;
  o.sweeps = kept * thin;
  o.burnin = 2000;
  o.thin = thin;
  TargetSpec tv;
  tv.kind = Target::gibbs_V;
  tv.beta = beta;
  tv.N = N;
  tv.d = 2;
  tv.V = V;
  TargetSpec tq = tv;
  tq.kind = Target::gibbs_Q;
  tq.V = nullptr;
  tq.mu = mu;

  const std::uint64_t seeds[3] = {101, 202, 303};
  std::vector<std::vector<double>> FV(3), FQ(3), FG(3);
  parallel_for(9, [&](int job) {
    const int s = job / 3, kind = job % 3;
    if (kind == 2) {
      std::vector<double> F(static_cast<std::size_t>(kept));
      for (int k = 0; k < kept; ++k) {
        Rng rng = make_rng(seeds[s] + 17, std::uint64_t(k));
        F[std::size_t(k)] = fluct(xi, ginibre_sample(N, rng), *mu);
      }
      FG[std::size_t(s)] = std::move(F);
      return;
    }
    SamplerOptions os = o;
    os.seed = seeds[s];
    os.chain = kind;
    (kind == 0 ? FV : FQ)[std::size_t(s)] = fluct_trace(kind == 0 ? tv : tq, os, xi, *mu);
  });

  bool pass = true;
  std::ostringstream detail;
  double worst_tau = 0.0;
  for (int s = 0; s < 3; ++s) {
    const KsResult vq = ks_two_sample(FV[std::size_t(s)], FQ[std::size_t(s)]);
    const KsResult vg = ks_two_sample(FV[std::size_t(s)], FG[std::size_t(s)]);
    worst_tau = std::max({worst_tau, integrated_autocorrelation_time(FV[std::size_t(s)]),
                          integrated_autocorrelation_time(FQ[std::size_t(s)])});
    pass = pass && vq.p_value > 0.01 && vg.p_value > 0.01;
    detail << fmt("seed %llu: V/Q p %.3f, V/Ginibre p %.3f; ", (unsigned long long)seeds[s], vq.p_value,
                  vg.p_value);
  }
  detail << fmt("%d samples each (thin %d, tau_int of thinned traces <= %.2f), %.0fs", kept, thin, worst_tau,
                seconds_since(t0));
  return {pass, detail.str()};
}

Outcome d3_variance_scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const int d = 3;
  const double beta = 2.0;
  const auto V = quadratic_potential(d, 1.0);
  const double R = mu_infinity_radial(*V).radius;
  // largest centred bump inside the bulk at the smallest N
  const double C_d0 = 0.25;
  const double ell = R - ScaleParameters::make(beta, 64, d, 1.0, C_d0).d0;
  const BumpFamily xi(d, Vec::Zero(), ell, 6);
  const int Ns[3] = {64, 128, 256};
  std::vector<double> lx(3), ly(3), ess(3), skew(3), skew_se(3), var(3);
  parallel_for(3, [&](int k) {
    TargetSpec t;
    t.kind = Target::gibbs_V;
    t.beta = beta;
    t.N = Ns[k];
    t.d = d;
    t.V = V;
    SamplerOptions o;
    o.sweeps = 50000;
    o.burnin = 5000;
    o.thin = 1;
    o.seed = 7;
    const SampleSet s = run_chain(t, o);
    std::vector<double> F;
    F.reserve(s.configurations.size());
    for (const auto& x : s.configurations) {
      double a = 0.0;
      for (const Vec& p : x) a += xi.value(p);
      F.push_back(a);
    }
    const auto dg = diagnostics(F);
    const Moments mo = moments(F);
    lx[std::size_t(k)] = std::log(double(Ns[k]));
    ly[std::size_t(k)] = std::log(mo.variance);
    var[std::size_t(k)] = mo.variance;
    ess[std::size_t(k)] = dg.ess;
    skew[std::size_t(k)] = mo.skewness;
    skew_se[std::size_t(k)] = std::sqrt(6.0 / dg.ess);
  });
  const LinearFit fit = fit_line(lx, ly);
  const double min_ess = *std::min_element(ess.begin(), ess.end());
  const bool pass = std::abs(fit.slope - 1.0 / 3.0) <= 0.15 && min_ess >= 500 && std::abs(skew[2]) <= 3 * skew_se[2];
  return {pass, fmt("ell %.3f, Var %.4f / %.4f / %.4f, slope %.3f +- %.3f (1/3 +- 0.15), min ESS %.0f (>= 500), "
                    "skew at N=256 %.3f (stderr %.3f), %.0fs",
                    ell, var[0], var[1], var[2], fit.slope, fit.slope_stderr, min_ess, skew[2], skew_se[2],
                    seconds_since(t0))};
}

Outcome expansion_rates() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto V = quartic_potential(2, 1.0, 0.1);
  const std::vector<double> thetas{1e2, 1e3, 1e4};
  const RadialEquilibrium radial(*V);
  const auto sols = radial.solve_ladder(thetas);
  const double R = radial.support_radius();
  const double bulk = R - 5.0 / std::sqrt(thetas.front());
  const auto f0 = radial.f0();
  std::vector<double> lt, e0, e1, bm;
  for (const auto& s : sols) {
    const auto f1 = radial.f1(s.theta);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < s.r.size(); ++i) {
      if (s.r[i] > bulk) break;
      a = std::max(a, std::abs(s.mu[i] - f0[i]));
      b = std::max(b, std::abs(s.mu[i] - f1[i]));
    }
    lt.push_back(std::log(s.theta));
    e0.push_back(std::log(a));
    e1.push_back(std::log(b));
    bm.push_back(std::log(s.mass_outside(R)));
  }
  const double s0 = fit_line(lt, e0).slope, s1 = fit_line(lt, e1).slope, sb = fit_line(lt, bm).slope;
  const double el = seconds_since(t0);
  return {std::abs(s0 + 1.0) <= 0.2 && std::abs(s1 + 2.0) <= 0.3 && std::abs(sb + 0.5) <= 0.15 && el < 300.0,
          fmt("bulk r <= %.3f: slope |mu - mu_inf| %.3f (-1 +- 0.2), |mu - f1| %.3f (-2 +- 0.3), boundary mass %.3f "
              "(-1/2 +- 0.15), %.0fs (< 300s)",
              bulk, s0, s1, sb, el)};
}

Outcome concentration() {
  const GinibreRun& r = ginibre_run();
  const ConcentrationReport c = concentration_check(r.F, 2.0, r.M);
  int constrained = 0;
  for (const auto& row : c.rows) constrained += row.constrained;
  return {c.violations == 0,
          fmt("M %.3f, fitted C %.4f on %d samples, %d violations on %d validation samples over %zu t values "
              "(%d constrained)",
              c.M, c.C, c.calibration, c.violations, c.validation, c.rows.size(), constrained)};
}

// Calibrate C on 20 configurations, validate ratio <= 1 on 20 fresh ones.
Outcome functional_inequalities() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto V = quadratic_potential(2, 1.0);
  const double R = mu_infinity_radial(*V).radius;
  struct Case {
    int N;
    double beta;
  };
  const Case cases[2] = {{64, 2.0}, {128, 4.0}};
  bool pass = true;
  std::ostringstream detail;
  for (const Case& c : cases) {
    const double theta = c.beta * c.N;
    const auto mu = equilibrium(*V, theta, 256);
    auto xi = std::make_shared<BumpFamily>(2, Vec::Zero(), 0.3, 4);
    const auto bundle = TransportBundle::make(xi, 0, theta, mu);
    TargetSpec t;
    t.kind = Target::gibbs_V;
    t.beta = c.beta;
    t.N = c.N;
    t.d = 2;
    t.V = V;
    SamplerOptions o;
    o.sweeps = 40 * 100;
    o.burnin = 2000;
    o.thin = 100;
    o.seed = 1000 + std::uint64_t(c.N);
    const SampleSet s = run_chain(t, o);
    const double window = 2.0 * R, ell = window / 8.0, ms_s = 1.0;
    Box box;
    for (int a = 0; a < 2; ++a) {
      box.lo[a] = -window;
      box.hi[a] = window;
    }
    std::vector<double> ms(40), a1(40);
    parallel_for(40, [&](int k) {
      const PointConfiguration X(2, s.configurations[std::size_t(k)]);
      const double F = localized_energy(X, *mu, box);
      const int count = int(X.indices_in(box).size());
      ms[std::size_t(k)] = multiscale_sum(X, box, ms_s, ell) / multiscale_bound_terms(F, count, c.N, 2, ms_s, ell);
      a1[std::size_t(k)] = a1_bound_check(a1_bound_inputs(X, *mu, bundle, ell), 1.0, 1.0).ratio;
    });
    auto calibrate = [](const std::vector<double>& r) { return 1.25 * *std::max_element(r.begin(), r.begin() + 20); };
    auto validate = [](const std::vector<double>& r, double C) {
      return *std::max_element(r.begin() + 20, r.end()) / C;
    };
    const double Cms = calibrate(ms), Ca1 = calibrate(a1);
    const double vms = validate(ms, Cms), va1 = validate(a1, Ca1);
    const bool ok = Cms > 0.0 && Ca1 > 0.0 && std::isfinite(Cms) && std::isfinite(Ca1) && vms <= 1.0 && va1 <= 1.0;
    pass = pass && ok;
    detail << fmt("(N=%d, beta=%g) multiscale C %.3g, validation max ratio %.3f; A1 C %.3g, validation max ratio %.3f; ",
                  c.N, c.beta, Cms, vms, Ca1, va1);
  }
  detail << fmt("%.0fs", seconds_since(t0));
  return {pass, detail.str()};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "splitting identity", splitting_identity},
    {2, "electric form and truncation independence", electric_form},
    {3, "transport derivative", transport_derivative},
    {4, "Ginibre variance", ginibre_variance},
    {5, "Ginibre mean", ginibre_mean},
    {6, "sampler consistency", sampler_consistency},
    {7, "d=3 variance scaling", d3_variance_scaling},
    {8, "equilibrium expansion rates", expansion_rates},
    {9, "concentration", concentration},
    {10, "multiscale and A1 inequalities", functional_inequalities},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--criterion" || a == "-c") && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) selected.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion k[,k...]]...\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  for (const Criterion& c : kCriteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
