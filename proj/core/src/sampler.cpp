#include "coulomb/sampler.hpp"

#include "coulomb/quadrature.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace coulomb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double pair_sum_at(const std::vector<Vec>& x, int skip, const Vec& y, int d) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (int(j) != skip) s += coulomb_g((y - x[j]).norm(), d);
  return s;
}

Box grid_box(const GridSpec& g) {
  Box b;
  b.lo = g.lo;
  b.hi = g.hi;
  return b;
}

}  // namespace

Target parse_target(const std::string& s) {
  if (s == "V" || s == "gibbs_V") return Target::gibbs_V;
  if (s == "Q" || s == "gibbs_Q") return Target::gibbs_Q;
  throw std::invalid_argument("unknown target '" + s + "' (expected V or Q)");
}

double TargetSpec::energy_weight() const { return beta * std::pow(double(N), 2.0 / d - 1.0); }

double TargetSpec::log_density(const std::vector<Vec>& x) const {
  const PointConfiguration X(d, x);
  const double w = energy_weight();
  if (kind == Target::gibbs_V) {
    if (has_box)
      for (const Vec& p : x)
        if (!box.contains(p, d)) return kNegInf;
    return -w * hamiltonian(X, *V);
  }
  const double theta = beta * std::pow(double(N), 2.0 / d);
  const OneBodyTable table(*mu, theta);
  const Box b = has_box ? box : grid_box(mu->grid());
  std::vector<double> one(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!b.contains(x[i], d)) return kNegInf;
    one[i] = table(x[i]);
  }
  return -w * 0.5 * tree_sum(pair_potentials(X)) + tree_sum(one);
}

OneBodyTable::OneBodyTable(const GridDensity& mu, double theta) {
  const CoulombPotential pot(mu);
  GridFunction t(mu.grid());
  for (std::size_t i = 0; i < mu.size(); ++i) t[i] = theta * pot.nodal()[i] + std::log(std::max(mu[i], 1e-300));
  table_ = std::move(t);
}

Rng make_rng(std::uint64_t seed, std::uint64_t chain) {
  std::seed_seq seq{std::uint32_t(seed & 0xffffffffu), std::uint32_t(seed >> 32), std::uint32_t(chain & 0xffffffffu),
                    std::uint32_t(chain >> 32), 0x636f756cu};
  return Rng(seq);
}

// ---------------------------------------------------------------------------
// ChainState

ChainState::ChainState(const TargetSpec& target, std::vector<Vec> initial, Rng rng, double sigma)
    : target_(target), x_(std::move(initial)), rng_(std::move(rng)), sigma_(sigma) {
  if (int(x_.size()) != target_.N) throw std::invalid_argument("ChainState: initial configuration size != N");
  if (target_.kind == Target::gibbs_V && !target_.V) throw std::invalid_argument("ChainState: gibbs_V needs V");
  if (target_.kind == Target::gibbs_Q) {
    if (!target_.mu) throw std::invalid_argument("ChainState: gibbs_Q needs mu");
    table_ = OneBodyTable(*target_.mu, target_.beta * std::pow(double(target_.N), 2.0 / target_.d));
    if (!target_.has_box) {
      target_.box = grid_box(target_.mu->grid());
      target_.has_box = true;
    }
  }
  weight_ = target_.energy_weight();
  PointConfiguration check(target_.d, x_);  // rejects coincident points
  phi_ = pair_potentials(check);
  w_.resize(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (target_.has_box && !target_.box.contains(x_[i], target_.d))
      throw std::invalid_argument("ChainState: initial point outside the box");
    w_[i] = one_body(x_[i]);
  }
}

double ChainState::one_body(const Vec& x) const {
  // Log-weight of a single particle: -beta N^{2/d} V for gibbs_V, theta g*mu + log mu for gibbs_Q.
  if (target_.kind == Target::gibbs_V) return -weight_ * double(target_.N) * target_.V->value(x);
  return table_(x);
}

double ChainState::log_acceptance(int i, const Vec& y) const {
  const int d = target_.d;
  if (target_.has_box && !target_.box.contains(y, d)) return kNegInf;
  const double dphi = pair_sum_at(x_, i, y, d) - phi_[std::size_t(i)];
  return -weight_ * dphi + (one_body(y) - w_[std::size_t(i)]);
}

void ChainState::accept(int i, const Vec& y) {
  const int d = target_.d;
  const Vec old = x_[std::size_t(i)];
  double phi_new = 0.0;
  for (std::size_t j = 0; j < x_.size(); ++j) {
    if (int(j) == i) continue;
    const double gn = coulomb_g((y - x_[j]).norm(), d);
    const double go = coulomb_g((old - x_[j]).norm(), d);
    phi_[j] += gn - go;
    phi_new += gn;
  }
  phi_[std::size_t(i)] = phi_new;
  x_[std::size_t(i)] = y;
  w_[std::size_t(i)] = one_body(y);
}

double ChainState::sweep() {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int d = target_.d;
  int acc = 0;
  for (int i = 0; i < target_.N; ++i) {
    Vec y = x_[std::size_t(i)];
    for (int a = 0; a < d; ++a) y[a] += sigma_ * normal(rng_);
    const double la = log_acceptance(i, y);
    const double u = unif(rng_);
    if (la >= 0.0 || (la > kNegInf && std::log(u) < la)) {
      accept(i, y);
      ++acc;
    }
  }
  steps_ += std::uint64_t(target_.N);
  accepted_ += std::uint64_t(acc);
  return double(acc) / target_.N;
}

double ChainState::refresh_caches() {
  const std::vector<double> fresh = pair_potentials(PointConfiguration(target_.d, x_));
  double scale = 0.0, drift = 0.0;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    scale = std::max(scale, std::abs(fresh[i]));
    drift = std::max(drift, std::abs(fresh[i] - phi_[i]));
  }
  phi_ = fresh;
  return scale > 0.0 ? drift / scale : drift;
}

double ChainState::log_density_cached() const { return -weight_ * 0.5 * tree_sum(phi_) + tree_sum(w_); }

double transition_density(const TargetSpec& target, const std::vector<Vec>& from, const std::vector<Vec>& to,
                          double sigma) {
  int moved = -1;
  for (std::size_t i = 0; i < from.size(); ++i)
    if ((from[i] - to[i]).norm() > 0.0) {
      if (moved >= 0) return 0.0;
      moved = int(i);
    }
  if (moved < 0) throw std::invalid_argument("transition_density: identical configurations");
  const int d = target.d;
  const double r2 = (to[std::size_t(moved)] - from[std::size_t(moved)]).squaredNorm();
  const double q = std::exp(-0.5 * r2 / (sigma * sigma)) / std::pow(2.0 * std::numbers::pi * sigma * sigma, 0.5 * d);
  const double la = target.log_density(to) - target.log_density(from);
  return q * std::min(1.0, std::exp(la)) / double(from.size());
}

// ---------------------------------------------------------------------------
// Runs

std::vector<Vec> initial_configuration(const TargetSpec& target, Rng& rng) {
  const int d = target.d, N = target.N;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> x;
  x.reserve(std::size_t(N));
  if (target.mu) {
    const GridDensity& mu = *target.mu;
    std::vector<double> cdf(mu.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) cdf[i] = (acc += mu[i]);
    while (int(x.size()) < N) {
      const double u = unif(rng) * acc;
      const std::size_t idx = std::size_t(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      Vec lo, hi;
      mu.grid().cell_box(std::min(idx, mu.size() - 1), lo, hi);
      Vec p = Vec::Zero();
      for (int a = 0; a < d; ++a) p[a] = lo[a] + unif(rng) * (hi[a] - lo[a]);
      x.push_back(p);
    }
    return x;
  }
  while (int(x.size()) < N) {
    Vec p = Vec::Zero();
    for (int a = 0; a < d; ++a) p[a] = (2.0 * unif(rng) - 1.0) * target.init_radius;
    if (p.norm() <= target.init_radius) x.push_back(p);
  }
  return x;
}

SampleSet run_chain(const TargetSpec& target, const SamplerOptions& opt) {
  Rng rng = make_rng(opt.seed, std::uint64_t(opt.chain));
  std::vector<Vec> init = initial_configuration(target, rng);
  const double sigma0 = opt.sigma > 0.0 ? opt.sigma : 0.5 * std::pow(double(target.N), -1.0 / target.d);
  ChainState state(target, std::move(init), std::move(rng), sigma0);

  SampleSet out;
  out.d = target.d;
  out.N = target.N;
  out.seed = opt.seed;
  out.chain = opt.chain;

  double window_acc = 0.0;
  int window = 0;
  auto adapt = [&](double a) {
    window_acc += a;
    if (++window == opt.adapt_every) {
      const double rate = window_acc / window;
      state.set_sigma(std::clamp(state.sigma() * std::exp(2.0 * (rate - 0.23)), 1e-6, 10.0));
      window_acc = 0.0;
      window = 0;
    }
  };

  int burnin = opt.burnin, thin = opt.thin;
  if (burnin < 0 || thin < 0) {
    std::vector<double> trace;
    trace.reserve(std::size_t(opt.pilot_sweeps));
    for (int s = 0; s < opt.pilot_sweeps; ++s) {
      adapt(state.sweep());
      trace.push_back(state.log_density_cached());
    }
    // Discard the first half of the pilot as its own warm-up.
    std::vector<double> tail(trace.begin() + std::ptrdiff_t(trace.size() / 2), trace.end());
    double tau = 1.0;
    if (tail.size() >= 100) tau = integrated_autocorrelation_time(tail);
    if (burnin < 0) burnin = int(std::ceil(200.0 * tau));
    if (thin < 0) thin = std::max(1, int(std::ceil(tau)));
  }
  thin = std::max(thin, 1);
  std::uint64_t sweep_index = 0;
  for (int s = 0; s < burnin; ++s) {
    adapt(state.sweep());
    ++sweep_index;
    if (opt.check_every > 0 && (s + 1) % opt.check_every == 0)
      out.max_cache_drift = std::max(out.max_cache_drift, state.refresh_caches());
  }
  const std::uint64_t acc0 = state.accepted(), steps0 = state.steps();
  for (int s = 0; s < opt.sweeps; ++s) {
    state.sweep();
    ++sweep_index;
    if (opt.on_sweep) opt.on_sweep(sweep_index, state.points());
    if ((s + 1) % thin == 0) {
      out.configurations.push_back(state.points());
      out.sweeps.push_back(sweep_index);
    }
    if (opt.check_every > 0 && (s + 1) % opt.check_every == 0) {
      const double drift = state.refresh_caches();
      out.max_cache_drift = std::max(out.max_cache_drift, drift);
      if (drift > opt.cache_tolerance)
        throw std::runtime_error("run_chain: pair cache drift " + std::to_string(drift) + " above tolerance");
    }
  }
  out.burnin = burnin;
  out.thin = thin;
  out.sigma = state.sigma();
  const std::uint64_t steps = state.steps() - steps0;
  out.acceptance = steps ? double(state.accepted() - acc0) / double(steps) : 0.0;
  return out;
}

std::vector<SampleSet> run_chains(const TargetSpec& target, const SamplerOptions& opt, int chains, int threads) {
  std::vector<SampleSet> out(std::size_t(std::max(chains, 0)));
  std::vector<std::exception_ptr> errors(out.size());
  threads = std::max(1, std::min(threads, chains));
  auto work = [&](int worker) {
    for (int c = worker; c < chains; c += threads) {
      try {
        SamplerOptions o = opt;
        o.chain = opt.chain + c;
        o.on_sweep = nullptr;
        out[std::size_t(c)] = run_chain(target, o);
      } catch (...) {
        errors[std::size_t(c)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

PointConfiguration ginibre_sample(int N, Rng& rng) {
  if (N < 1) throw std::invalid_argument("ginibre_sample: N must be positive");
  std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / (4.0 * N)));
  std::vector<lapack_complex_double> A(std::size_t(N) * std::size_t(N));
  for (auto& a : A) {
    const double re = normal(rng);
    const double im = normal(rng);
    a = {re, im};
  }
  std::vector<lapack_complex_double> tau(std::size_t(std::max(1, N - 1)));
  std::vector<lapack_complex_double> w(static_cast<std::size_t>(N));
  lapack_int info = LAPACKE_zgehrd(LAPACK_COL_MAJOR, N, 1, N, A.data(), N, tau.data());
  if (info == 0)
    info = LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', N, 1, N, A.data(), N, w.data(), nullptr, N);
  if (info != 0) throw std::runtime_error("ginibre_sample: eigensolver failed");
  std::vector<Vec> x;
  x.reserve(std::size_t(N));
  for (int i = 0; i < N; ++i) x.emplace_back(w[std::size_t(i)].real(), w[std::size_t(i)].imag(), 0.0);
  return PointConfiguration(2, std::move(x));
}

void write_samples_csv(const SampleSet& s, std::ostream& out, bool header) {
  if (header) {
    out << "chain,sweep,particle,x,y";
    if (s.d == 3) out << ",z";
    out << "\n";
  }
  out.precision(17);
  for (std::size_t k = 0; k < s.configurations.size(); ++k)
    for (std::size_t i = 0; i < s.configurations[k].size(); ++i) {
      const Vec& p = s.configurations[k][i];
      out << s.chain << ',' << s.sweeps[k] << ',' << i << ',' << p[0] << ',' << p[1];
      if (s.d == 3) out << ',' << p[2];
      out << "\n";
    }
}

SampleSet read_samples_csv(std::istream& in, int d) {
  SampleSet s;
  s.d = d;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_samples_csv: empty input");
  const std::string expect = d == 3 ? "chain,sweep,particle,x,y,z" : "chain,sweep,particle,x,y";
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expect) throw std::runtime_error("read_samples_csv: expected header " + expect);
  std::map<std::pair<std::int64_t, std::uint64_t>, std::size_t> index;
  std::set<std::int64_t> chains;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (int(v.size()) != 3 + d) throw std::runtime_error("read_samples_csv: bad row at line " + std::to_string(lineno));
    const auto key = std::make_pair(std::int64_t(v[0]), std::uint64_t(v[1]));
    chains.insert(key.first);
    auto [it, fresh] = index.try_emplace(key, s.configurations.size());
    if (fresh) {
      s.sweeps.push_back(key.second);
      s.configurations.emplace_back();
    }
    s.configurations[it->second].emplace_back(v[3], v[4], d == 3 ? v[5] : 0.0);
  }
  s.chain = chains.size() == 1 ? int(*chains.begin()) : -1;
  s.N = s.configurations.empty() ? 0 : int(s.configurations.front().size());
  for (const auto& c : s.configurations)
    if (int(c.size()) != s.N) throw std::runtime_error("read_samples_csv: configurations of unequal size");
  return s;
}

}  // namespace coulomb
