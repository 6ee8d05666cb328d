#pragma once

#include "coulomb/energy.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace coulomb {

enum class Target { gibbs_V, gibbs_Q };

Target parse_target(const std::string& s);  // "V" or "Q"

// Ingredients of the target law. gibbs_V needs V; gibbs_Q needs the
// equilibrium density mu (and uses g*mu and log mu through cubic interpolation).
struct TargetSpec {
  Target kind = Target::gibbs_V;
  double beta = 2.0;
  int N = 1;
  int d = 2;
  std::shared_ptr<const ScalarField> V;
  std::shared_ptr<const GridDensity> mu;
  // Proposals leaving this box are rejected; for gibbs_Q it defaults to the grid of mu.
  Box box;
  bool has_box = false;
  // Radius of the uniform ball used for initial points when mu is absent.
  double init_radius = 0.7;

  // beta N^{2/d - 1}
  double energy_weight() const;
  // Log of the unnormalized density of a configuration.
  double log_density(const std::vector<Vec>& x) const;
};

// One-body part of the log density for gibbs_Q: theta (g*mu)(x) + log mu(x).
class OneBodyTable {
 public:
  OneBodyTable() = default;
  OneBodyTable(const GridDensity& mu, double theta);
  double operator()(const Vec& x) const { return table_.interpolate(x, Interp::cubic); }

 private:
  GridFunction table_;
};

using Rng = std::mt19937_64;
// Independent stream for (seed, chain).
Rng make_rng(std::uint64_t seed, std::uint64_t chain);

class ChainState {
 public:
  ChainState(const TargetSpec& target, std::vector<Vec> initial, Rng rng, double sigma);

  const std::vector<Vec>& points() const { return x_; }
  const std::vector<double>& pair_cache() const { return phi_; }
  const std::vector<double>& one_body_cache() const { return w_; }
  double sigma() const { return sigma_; }
  void set_sigma(double s) { sigma_ = s; }
  std::uint64_t steps() const { return steps_; }
  std::uint64_t accepted() const { return accepted_; }
  const TargetSpec& target() const { return target_; }

  // N single-particle proposals in index order; returns the acceptance fraction.
  double sweep();
  // Log acceptance ratio of moving particle i to y (-inf when outside the box).
  double log_acceptance(int i, const Vec& y) const;
  // Relative drift of the cached pair potentials against a fresh evaluation; refreshes the caches.
  double refresh_caches();
  // Log of the current unnormalized density from the caches.
  double log_density_cached() const;

 private:
  double one_body(const Vec& x) const;
  void accept(int i, const Vec& y);

  TargetSpec target_;
  OneBodyTable table_;
  double weight_;
  std::vector<Vec> x_;
  std::vector<double> phi_;
  std::vector<double> w_;
  Rng rng_;
  double sigma_;
  std::uint64_t steps_ = 0;
  std::uint64_t accepted_ = 0;
};

// Transition density of one random-scan step (particle chosen uniformly,
// Gaussian proposal, Metropolis acceptance) between configurations differing
// in exactly one particle.
double transition_density(const TargetSpec& target, const std::vector<Vec>& from, const std::vector<Vec>& to,
                          double sigma);

struct SampleSet {
  int d = 2;
  int N = 0;
  std::vector<std::vector<Vec>> configurations;
  std::vector<std::uint64_t> sweeps;
  std::uint64_t seed = 0;
  int chain = 0;
  int burnin = 0;
  int thin = 1;
  double acceptance = 0.0;
  double sigma = 0.0;
  double max_cache_drift = 0.0;
};

struct SamplerOptions {
  int sweeps = 1000;      // recorded phase, in sweeps
  int burnin = -1;        // < 0: 200 tau_int from a pilot run
  int thin = -1;          // < 0: ceil(tau_int) from the pilot run
  int pilot_sweeps = 2000;
  double sigma = -1.0;    // < 0: 0.5 N^{-1/d}
  int adapt_every = 50;
  int check_every = 500;  // cache consistency check period (sweeps)
  double cache_tolerance = 1e-9;
  std::uint64_t seed = 1;
  int chain = 0;
  // Observable sampled every sweep for optional per-sweep traces.
  std::function<void(std::uint64_t, const std::vector<Vec>&)> on_sweep;
};

// Initial configuration: i.i.d. points from mu when available, else uniform in
// the ball of radius init_radius.
std::vector<Vec> initial_configuration(const TargetSpec& target, Rng& rng);

// Full run: optional pilot, burn-in with proposal-scale adaptation toward
// acceptance 0.23, then the recorded phase with thinning.
SampleSet run_chain(const TargetSpec& target, const SamplerOptions& opt);
// Independent chains on worker threads (streams by chain id).
std::vector<SampleSet> run_chains(const TargetSpec& target, const SamplerOptions& opt, int chains, int threads);

// Eigenvalues of an N x N matrix with i.i.d. complex Gaussian entries of
// variance 1/(2N) (beta = 2, V = |x|^2).
PointConfiguration ginibre_sample(int N, Rng& rng);

// CSV sample file: header "chain,sweep,particle,x,y[,z]" and one row per point.
// Several chains go to one file by writing the header only once; reading
// returns the configurations in file order (chain -1 when mixed).
void write_samples_csv(const SampleSet& s, std::ostream& out, bool header = true);
SampleSet read_samples_csv(std::istream& in, int d);

// ---------------------------------------------------------------------------
// Chain diagnostics

struct ChainDiagnostics {
  double tau_int = 0.5;
  double ess = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double stderr_mean = 0.0;
};

// Initial positive sequence estimator; requires at least 100 samples.
double integrated_autocorrelation_time(const std::vector<double>& x);
ChainDiagnostics diagnostics(const std::vector<double>& x);

}  // namespace coulomb
