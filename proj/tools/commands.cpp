#include "commands.hpp"

#include "csv.hpp"

#include "coulomb/energy.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/fluct.hpp"
#include "coulomb/grid_io.hpp"
#include "coulomb/sampler.hpp"
#include "coulomb/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

namespace coulomb::tools {

namespace fs = std::filesystem;

int thread_count(const ExperimentConfig& cfg) {
  if (cfg.has("threads")) {
    const int t = cfg.integer("threads");
    if (t < 1) throw ConfigError("--threads must be positive");
    return t;
  }
  if (const char* env = std::getenv("COULOMB_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return std::max(1, int(std::thread::hardware_concurrency()));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return csv_number(v); }

// --out is a directory, or the primary artifact when it has an extension; in
// the latter case the other artifacts share its stem.
class Outputs {
 public:
  Outputs(const ExperimentConfig& cfg, const std::string& primary_name) {
    const fs::path out = cfg.str("out");
    if (out.empty()) throw ConfigError("--out is empty");
    if (out.has_extension()) {
      primary_ = out;
      dir_ = out.parent_path();
      prefix_ = out.stem().string() + ".";
    } else {
      dir_ = out;
      primary_ = out / primary_name;
    }
    if (!dir_.empty()) fs::create_directories(dir_);
  }
  const fs::path& primary() const { return primary_; }
  fs::path path(const std::string& name) const { return dir_ / (prefix_ + name); }

 private:
  fs::path dir_;
  fs::path primary_;
  std::string prefix_;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void write_manifest(const ExperimentConfig& cfg, const Outputs& out, const std::string& command) {
  auto os = open_out(out.path("manifest.txt"));
  cfg.write_manifest(os, command);
}

struct Setup {
  int d = 2;
  int N = 1;
  double beta = 1.0;
  double theta = 1.0;
  ScaleParameters params;
  std::shared_ptr<RadialPolynomial> V;
};

Setup make_setup(const ExperimentConfig& cfg) {
  cfg.require({"n", "beta"});
  Setup s;
  s.d = cfg.integer("dim");
  if (s.d != 2 && s.d != 3) throw ConfigError("--dim must be 2 or 3");
  s.N = cfg.integer("n");
  if (s.N < 1) throw ConfigError("--n must be positive");
  s.beta = cfg.real("beta");
  if (!(s.beta > 0.0)) throw ConfigError("--beta must be positive");
  s.params = ScaleParameters::make(s.beta, s.N, s.d, cfg.real("c_rho"), cfg.real("c_d0"));
  s.theta = cfg.has("theta") ? cfg.real("theta") : s.params.theta;
  if (!(s.theta > 0.0)) throw ConfigError("--theta must be positive");
  s.V = parse_potential(cfg.str("potential"), s.d);
  return s;
}

GridSpec equilibrium_grid(const ExperimentConfig& cfg, const Setup& s) {
  const int cells = cfg.integer("grid_n");
  if (cells < 8) throw ConfigError("--grid-n must be at least 8");
  if (cfg.has("box")) return GridSpec::cube(s.d, cfg.real("box"), cells);
  return default_box(*s.V, s.theta, cells);
}

EquilibriumSolution solve(const ExperimentConfig& cfg, const Setup& s) {
  EquilibriumOptions opt;
  opt.tol = cfg.real("tol");
  if (!(opt.tol > 0.0)) throw ConfigError("--tol must be positive");
  return solve_mu_theta(*s.V, s.theta, equilibrium_grid(cfg, s), opt);
}

void write_equilibrium_summary(const EquilibriumSolution& sol, const Setup& s, const fs::path& p) {
  auto os = open_out(p);
  CsvWriter w(os, {"quantity", "value"});
  w.row({"theta", num(s.theta)});
  w.row({"C", num(sol.C)});
  w.row({"residual", num(sol.residual)});
  w.row({"mass", num(sol.mass())});
  w.row({"iterations", std::to_string(sol.iterations)});
  w.row({"support_radius", num(estimated_support_radius(sol.mu))});
  w.row({"chi", num(s.params.chi)});
  w.row({"rho_beta", num(s.params.rho_beta)});
  w.row({"d0", num(s.params.d0)});
}

// mu_theta from --mu, else solved (and saved next to the outputs).
GridDensity equilibrium_density(const ExperimentConfig& cfg, const Setup& s, const Outputs* save = nullptr) {
  if (cfg.has("mu")) {
    GridDensity mu(load_grid(cfg.str("mu")));
    if (mu.dim() != s.d) throw ConfigError("--mu has dimension " + std::to_string(mu.dim()));
    return mu;
  }
  EquilibriumSolution sol = solve(cfg, s);
  if (save) {
    save_grid(sol.mu, save->path("mu_theta.grid").string());
    write_equilibrium_summary(sol, s, save->path("equilibrium.csv"));
  }
  return std::move(sol.mu);
}

Mask bulk_of(const GridDensity& mu, const Setup& s) {
  return bulk_mask(mu.grid(), mu_infinity_radial(*s.V).radius, s.params.d0);
}

std::shared_ptr<BumpFamily> make_xi(const ExperimentConfig& cfg, int d) {
  if (!cfg.has("xi")) return std::make_shared<BumpFamily>(d, Vec::Zero(), 0.3, d == 2 ? 4 : 6);
  const std::string spec = cfg.str("xi");
  const std::string prefix = "bump:";
  if (spec.rfind(prefix, 0) != 0) throw ConfigError("--xi: expected bump:x,y[,z],ell,p");
  std::vector<double> v;
  std::stringstream ss(spec.substr(prefix.size()));
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      v.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("--xi: bad number '" + cell + "'");
    }
  }
  if (int(v.size()) != d + 2)
    throw ConfigError("--xi: expected " + std::to_string(d + 2) + " numbers in dimension " + std::to_string(d));
  Vec c = Vec::Zero();
  for (int a = 0; a < d; ++a) c[a] = v[std::size_t(a)];
  const double ell = v[std::size_t(d)];
  const double p = v[std::size_t(d + 1)];
  if (!(ell > 0.0) || p < 1 || p != std::floor(p)) throw ConfigError("--xi: need ell > 0 and an integer p >= 1");
  return std::make_shared<BumpFamily>(d, c, ell, int(p));
}

int q_of(const ExperimentConfig& cfg, int d) {
  const int q = cfg.has("q") ? cfg.integer("q") : (d == 2 ? 0 : 1);
  if (q < 0) throw ConfigError("--q must be nonnegative");
  return q;
}

bool is_unit_quadratic(const std::string& spec) {
  return spec == "quad" || spec == "quadratic" || spec == "quad:1" || spec == "quadratic:1";
}

TargetSpec iid_target(const Setup& s, const GridDensity& mu) {
  TargetSpec t;
  t.N = s.N;
  t.d = s.d;
  t.beta = s.beta;
  t.mu = std::make_shared<GridDensity>(mu);
  return t;
}

// Samples to `path`; mu is needed for the Q target.
std::vector<std::vector<Vec>> draw_samples(const ExperimentConfig& cfg, const Setup& s, const GridDensity* mu,
                                           const fs::path& path, const Outputs& out) {
  const std::string sampler = cfg.str("sampler");
  const int threads = thread_count(cfg);
  const std::uint64_t seed = cfg.u64("seed");
  std::vector<std::vector<Vec>> configs;

  if (sampler == "ginibre") {
    if (s.d != 2 || s.beta != 2.0 || !is_unit_quadratic(cfg.str("potential")))
      throw ConfigError("--sampler ginibre needs --dim 2 --beta 2 --potential quad");
    const int K = cfg.integer("samples");
    if (K < 1) throw ConfigError("--samples must be positive");
    configs.resize(std::size_t(K));
    std::vector<std::thread> pool;
    const int T = std::min(threads, K);
    for (int w = 0; w < T; ++w)
      pool.emplace_back([&, w] {
        for (int k = w; k < K; k += T) {
          Rng rng = make_rng(seed, std::uint64_t(k));
          configs[std::size_t(k)] = ginibre_sample(s.N, rng).points();
        }
      });
    for (auto& t : pool) t.join();
    SampleSet set;
    set.d = 2;
    set.N = s.N;
    set.seed = seed;
    set.configurations = configs;
    for (int k = 0; k < K; ++k) set.sweeps.push_back(std::uint64_t(k));
    auto os = open_out(path);
    write_samples_csv(set, os);
    return configs;
  }
  if (sampler != "mcmc") throw ConfigError("--sampler must be mcmc or ginibre");

  TargetSpec target;
  try {
    target.kind = parse_target(cfg.str("target"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("--target: ") + e.what());
  }
  target.beta = s.beta;
  target.N = s.N;
  target.d = s.d;
  target.V = s.V;
  const GridSpec grid = mu ? mu->grid() : equilibrium_grid(cfg, s);
  target.box.lo = grid.lo;
  target.box.hi = grid.hi;
  target.has_box = true;
  if (target.kind == Target::gibbs_Q) {
    if (!mu) throw ConfigError("--target Q needs the equilibrium measure");
    target.mu = std::make_shared<GridDensity>(*mu);
  }
  SamplerOptions opt;
  opt.sweeps = cfg.integer("sweeps");
  opt.burnin = cfg.integer("burnin");
  opt.thin = cfg.integer("thin");
  opt.sigma = cfg.real("sigma");
  opt.seed = seed;
  const int chains = cfg.integer("chains");
  if (chains < 1 || opt.sweeps < 1) throw ConfigError("--chains and --sweeps must be positive");
  const auto sets = run_chains(target, opt, chains, threads);
  auto os = open_out(path);
  auto cs = open_out(out.path("chains.csv"));
  CsvWriter w(cs, {"chain", "burnin", "thin", "acceptance", "sigma", "max_cache_drift", "records"});
  for (std::size_t c = 0; c < sets.size(); ++c) {
    write_samples_csv(sets[c], os, c == 0);
    w.row({std::to_string(sets[c].chain), std::to_string(sets[c].burnin), std::to_string(sets[c].thin),
           num(sets[c].acceptance), num(sets[c].sigma), num(sets[c].max_cache_drift),
           std::to_string(sets[c].configurations.size())});
    configs.insert(configs.end(), sets[c].configurations.begin(), sets[c].configurations.end());
  }
  return configs;
}

FdModel load_fd_table(const std::string& path, double C) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open --fd-table " + path);
  std::string line;
  std::getline(in, line);
  std::vector<double> b, f, fp;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string c;
    std::vector<double> v;
    while (std::getline(ss, c, ',')) {
      try {
        v.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw ConfigError("--fd-table: bad number '" + c + "'");
      }
    }
    if (v.size() != 3) throw ConfigError("--fd-table: expected rows beta,f,fprime");
    b.push_back(v[0]);
    f.push_back(v[1]);
    fp.push_back(v[2]);
  }
  return FdModel::tabulated(b, f, fp, C);
}

// Everything the fluctuation report needs besides the samples; built and
// validated before any sampling.
struct Prediction {
  std::shared_ptr<BumpFamily> xi;
  Mask bulk;
  std::optional<TransportBundle> bundle;
  CltOptions opt;
  FdModel fd;
  double normalizer = 1.0;
  std::vector<std::pair<double, std::pair<Admissibility, Admissibility>>> admissibility;
};

void prepare(const ExperimentConfig& cfg, const Setup& s, const GridDensity& mu, Prediction& p) {
  p.xi = make_xi(cfg, s.d);
  const double ell = p.xi->ell();
  const Admissibility a_ell = ell_admissible(s.params, ell);
  if (!a_ell.ok) throw AdmissibilityError(a_ell);
  p.bulk = bulk_of(mu, s);

  std::shared_ptr<const GridDensity> mu_pred;
  const std::string source = cfg.str("mu_source");
  if (source == "grid") {
    mu_pred = std::make_shared<GridDensity>(mu);
  } else if (source == "expansion") {
    GridFunction f2 = f_k_ladder(*s.V, s.theta, 2, mu.grid(), p.bulk);
    for (auto& v : f2.values()) v = std::max(v, 0.0);
    mu_pred = std::make_shared<GridDensity>(f2);
  } else {
    throw ConfigError("--mu-source must be grid or expansion");
  }
  p.bundle.emplace(TransportBundle::make(p.xi, q_of(cfg, s.d), s.theta, mu_pred));
  const Admissibility a_bulk = support_in_bulk(*p.bundle, p.bulk, s.params.d0);
  if (!a_bulk.ok) throw AdmissibilityError(a_bulk);

  p.opt.tau_grid = cfg.reals("tau_grid");
  if (cfg.has("fd_table")) {
    p.fd = load_fd_table(cfg.str("fd_table"), cfg.real("fd_c"));
    p.opt.fd = &p.fd;
  }
  p.normalizer = std::sqrt(s.beta) * std::pow(std::pow(double(s.N), 1.0 / s.d) * ell, 1.0 - s.d / 2.0);

  const std::string mode = cfg.str("admissibility");
  if (mode != "report" && mode != "strict") throw ConfigError("--admissibility must be report or strict");
  for (double tau : p.opt.tau_grid) {
    const double t = tau * p.normalizer / s.theta;
    const Admissibility a1 = nu_positivity(*p.bundle, t);
    const Admissibility a2 = psi_smallness(*p.bundle, t);
    if (mode == "strict") {
      if (!a1.ok) throw AdmissibilityError(a1);
      if (!a2.ok) throw AdmissibilityError(a2);
    }
    p.admissibility.push_back({tau, {a1, a2}});
  }
}

void report(const Setup& s, const GridDensity& mu, Prediction& p, const std::vector<std::vector<Vec>>& configs,
            const fs::path& report_path, const fs::path& fluct_path) {
  if (configs.size() < 2) throw ConfigError("need at least two sample configurations");
  std::vector<double> F(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    if (int(configs[k].size()) != s.N)
      throw ConfigError("sample configurations have " + std::to_string(configs[k].size()) + " points, --n is " +
                        std::to_string(s.N));
    F[k] = fluct(*p.xi, configs[k], mu);
  }
  {
    auto os = open_out(fluct_path);
    CsvWriter w(os, {"sample", "fluct"});
    for (std::size_t k = 0; k < F.size(); ++k) w.row({std::to_string(k), num(F[k])});
  }

  p.opt.bulk = &p.bulk;
  const FluctuationReport r = clt_harness(F, *p.bundle, s.params, p.xi->ell(), p.opt);

  auto os = open_out(report_path);
  CsvWriter w(os, {"quantity", "empirical", "predicted", "stderr", "zscore"});
  const Moments& nm = r.normalized;
  const double target_var = 2.0 * r.v_scaled;
  const double a2 = r.normalizer * r.normalizer;
  w.row({"samples", std::to_string(F.size()), "", "", ""});
  w.row({"normalizer", num(r.normalizer), "", "", ""});
  w.row({"mean", num(nm.mean), r.m ? num(*r.m) : "unpredicted", num(nm.stderr_mean), r.m ? num(r.z_mean) : ""});
  w.row({"variance", num(nm.variance), num(target_var), num(nm.stderr_variance), num(r.z_variance)});
  w.row({"variance_ratio", num(nm.variance / target_var), "1", num(nm.stderr_variance / std::abs(target_var)),
         num(r.z_variance)});
  w.row({"skewness", num(nm.skewness), "0", num(nm.stderr_skewness),
         num(nm.stderr_skewness > 0 ? nm.skewness / nm.stderr_skewness : 0.0)});
  w.row({"fluct_mean", num(r.raw.mean), r.m ? num(*r.m / r.normalizer) : "unpredicted", num(r.raw.stderr_mean),
         r.m ? num(r.z_mean) : ""});
  w.row({"fluct_variance", num(r.raw.variance), num(target_var / a2), num(r.raw.stderr_variance),
         num(r.z_variance)});
  w.row({"v", "", num(r.v.value()), "", ""});
  w.row({"v_gradient", "", num(r.v.gradient), "", ""});
  w.row({"v_cross", "", num(r.v.cross), "", ""});
  w.row({"v_density", "", num(r.v.density), "", ""});
  for (const auto& lp : r.laplace) {
    const std::string name = "log_laplace(tau=" + num(lp.tau) + ")";
    w.row({name, num(lp.empirical), lp.has_prediction ? num(lp.predicted) : "unpredicted", num(lp.stderr),
           lp.has_prediction && lp.stderr > 0 ? num((lp.empirical - lp.predicted) / lp.stderr) : ""});
  }
  for (const auto& [tau, pair] : p.admissibility) {
    w.row({"condsurt(tau=" + num(tau) + ")", num(pair.first.lhs), num(pair.first.rhs), "",
           pair.first.ok ? "ok" : "violated"});
    w.row({"condsurt2(tau=" + num(tau) + ")", num(pair.second.lhs), num(pair.second.rhs), "",
           pair.second.ok ? "ok" : "violated"});
  }
  if (s.d == 2) {
    const ConcentrationReport c = concentration_check(F, s.beta, p.xi->derivative_constant(3));
    w.row({"concentration_C", num(c.C), "", "", ""});
    w.row({"concentration_violations", std::to_string(c.violations), "0", "", ""});
  }
}

// Points file for energy-check: a sample file, or a CSV with x,y[,z] columns.
std::vector<std::vector<Vec>> read_points_file(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open points file " + path);
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header.rfind("chain,", 0) == 0) {
    in.clear();
    in.seekg(0);
    return read_samples_csv(in, d).configurations;
  }
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  const std::vector<std::string> want =
      d == 2 ? std::vector<std::string>{"x", "y"} : std::vector<std::string>{"x", "y", "z"};
  std::vector<std::size_t> at;
  for (const auto& name : want) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw ConfigError(path + ": missing column '" + name + "'");
    at.push_back(std::size_t(it - cols.begin()));
  }
  std::vector<Vec> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string c;
    std::vector<std::string> cells;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    Vec p = Vec::Zero();
    for (int a = 0; a < d; ++a) {
      const std::size_t col = at[std::size_t(a)];
      if (col >= cells.size()) throw ConfigError(path + ": short row");
      try {
        p[a] = std::stod(cells[col]);
      } catch (const std::exception&) {
        throw ConfigError(path + ": bad coordinate '" + cells[col] + "'");
      }
    }
    pts.push_back(p);
  }
  if (pts.empty()) throw ConfigError(path + ": no points");
  return {pts};
}

}  // namespace

int run_equilibrium(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  const Outputs out(cfg, "mu_theta.grid");
  write_manifest(cfg, out, "equilibrium");
  const EquilibriumSolution sol = solve(cfg, s);
  save_grid(sol.mu, out.primary().string());
  write_equilibrium_summary(sol, s, out.path("equilibrium.csv"));
  std::cout << "theta " << s.theta << ", residual " << sol.residual << ", mass " << sol.mass() << ", grid "
            << out.primary().string() << "\n";
  return kExitOk;
}

int run_sample(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  const Outputs out(cfg, "samples.csv");
  write_manifest(cfg, out, "sample");
  std::optional<GridDensity> mu;
  if (cfg.str("sampler") == "mcmc" && cfg.str("target") == "Q") mu = equilibrium_density(cfg, s, &out);
  const auto configs = draw_samples(cfg, s, mu ? &*mu : nullptr, out.primary(), out);
  std::cout << configs.size() << " configurations written to " << out.primary().string() << "\n";
  return kExitOk;
}

int run_energy_check(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  const Outputs out(cfg, "energy_check.csv");
  write_manifest(cfg, out, "energy-check");
  const GridDensity mu = equilibrium_density(cfg, s);
  const bool do_split = cfg.integer("splitting") != 0;
  const bool do_eta = cfg.integer("eta") != 0;
  const bool do_ms = cfg.integer("multiscale") != 0;
  if (do_eta && s.d != 2) throw ConfigError("--eta needs --dim 2");
  const double tol = cfg.has("tolerance") ? cfg.real("tolerance") : 1e-4;

  std::vector<std::vector<Vec>> configs;
  if (cfg.has("config")) {
    configs = read_points_file(cfg.str("config"), s.d);
  } else {
    const int K = cfg.integer("configs");
    if (K < 1) throw ConfigError("--configs must be positive");
    const TargetSpec target = iid_target(s, mu);
    for (int k = 0; k < K; ++k) {
      Rng rng = make_rng(cfg.u64("seed"), std::uint64_t(k));
      configs.push_back(initial_configuration(target, rng));
    }
  }

  const CoulombPotential pot(mu);
  GridFunction log_mu(mu.grid());
  for (std::size_t i = 0; i < mu.size(); ++i) log_mu[i] = std::log(std::max(mu[i], 1e-300));
  const int refine = cfg.integer("field_refine");
  if (do_eta && refine < 1) throw ConfigError("--field-refine must be positive");
  const double window = cfg.has("window") ? cfg.real("window") : 2.0 * mu_infinity_radial(*s.V).radius;
  const double ms_s = cfg.real("multiscale_s");
  const double ms_ell = cfg.has("multiscale_ell") ? cfg.real("multiscale_ell") : window / 8.0;
  if (do_ms && !(ms_ell > std::pow(double(s.N), -1.0 / s.d)))
    throw ConfigError("--multiscale-ell must exceed N^{-1/d}");
  const double c_bound = cfg.real("c_bound");

  auto os = open_out(out.primary());
  CsvWriter w(os, {"check", "value_lhs", "value_rhs", "tolerance", "pass"});
  int failures = 0;
  auto row = [&](const std::string& check, double lhs, double rhs, double tolv, bool pass) {
    w.row({check, num(lhs), num(rhs), num(tolv), pass ? "true" : "false"});
    if (!pass) ++failures;
  };
  for (std::size_t k = 0; k < configs.size(); ++k) {
    if (int(configs[k].size()) != s.N)
      throw ConfigError("configuration " + std::to_string(k) + " has " + std::to_string(configs[k].size()) +
                        " points, --n is " + std::to_string(s.N));
    const PointConfiguration X(s.d, configs[k]);
    const std::string tag = "#" + std::to_string(k);
    if (do_split) {
      std::vector<double> lm;
      for (const Vec& p : X.points()) lm.push_back(log_mu.interpolate(p, Interp::linear));
      const double H = hamiltonian(X, *s.V);
      const double R = splitting_rhs(X, pot, *s.V, s.theta, lm);
      row("splitting" + tag, H, R, tol, std::abs(H - R) <= tol * std::abs(H));
    }
    if (do_eta) {
      const GridSpec coarse = mu.grid().refined(refine), fine = mu.grid().refined(2 * refine);
      std::vector<double> vals;
      for (double f : {1.0, 0.5, 0.25}) {
        std::vector<double> eta = X.radii();
        for (double& e : eta) e *= f;
        vals.push_back(electric_energy_oracle(X, mu, eta, coarse).value);
      }
      double spread = 0.0;
      for (double v : vals) spread = std::max(spread, std::abs(v - vals[0]) / std::abs(vals[0]));
      row("eta_independence" + tag, spread, 0.0, 1e-6, spread <= 1e-6);
      const double E_fine = electric_energy_oracle(X, mu, X.radii(), fine).value;
      const double pair = next_order_energy(X, pot);
      const double est = std::abs(E_fine - vals[0]);
      row("electric_vs_pairwise" + tag, E_fine, pair, est, std::abs(E_fine - pair) <= est);
    }
    if (do_ms) {
      Box box;
      for (int a = 0; a < s.d; ++a) {
        box.lo[a] = -window;
        box.hi[a] = window;
      }
      const double F = localized_energy(X, mu, box);
      const int count = int(X.indices_in(box).size());
      const double lhs = multiscale_sum(X, box, ms_s, ms_ell);
      const double rhs = c_bound * multiscale_bound_terms(F, count, s.N, s.d, ms_s, ms_ell);
      row("multiscale" + tag, lhs, rhs, c_bound, lhs <= rhs);
    }
  }
  std::cout << configs.size() << " configurations, " << failures << " failed checks, report "
            << out.primary().string() << "\n";
  return failures == 0 ? kExitOk : kExitAcceptance;
}

int run_transport_check(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  const Outputs out(cfg, "transport_check.csv");
  write_manifest(cfg, out, "transport-check");
  const auto mu = std::make_shared<GridDensity>(equilibrium_density(cfg, s));
  const auto xi = make_xi(cfg, s.d);
  const TransportBundle b = TransportBundle::make(xi, q_of(cfg, s.d), s.theta, mu);
  const std::vector<double> ts = cfg.reals("t_sweep");
  if (ts.empty()) throw ConfigError("--t-sweep is empty");
  for (double t : ts)
    if (!(t > 0.0)) throw ConfigError("--t-sweep values must be positive");
  const int K = cfg.integer("configs");
  if (K < 1) throw ConfigError("--configs must be positive");
  const double tol = cfg.has("tolerance") ? cfg.real("tolerance") : 1e-3;
  const double t_min = *std::min_element(ts.begin(), ts.end());

  struct PerT {
    GapNorms gap{kNaN, kNaN};
    double eps_sup = kNaN;
    bool cond1 = false, cond2 = false;
  };
  std::vector<PerT> per(ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) {
    try {
      per[j].gap = linearization_gap(*mu, b.psi, ts[j]);
    } catch (const AdmissibilityError&) {
    }
    try {
      per[j].eps_sup = epsilon_t(b, ts[j]).max_abs();
    } catch (const std::domain_error&) {
    }
    per[j].cond1 = nu_positivity(b, ts[j]).ok;
    per[j].cond2 = psi_smallness(b, ts[j]).ok;
  }

  auto os = open_out(out.primary());
  CsvWriter w(os, {"config", "t", "gap_sup", "gap_c1", "eps_sup", "A1", "FD", "A2", "FD2", "condsurt", "condsurt2"});
  const TargetSpec target = iid_target(s, *mu);
  const std::uint64_t seed = cfg.u64("seed");
  double worst1 = 0.0, worst2 = 0.0;
  for (int k = 0; k < K; ++k) {
    Rng rng = make_rng(seed, std::uint64_t(k));
    const PointConfiguration X(s.d, initial_configuration(target, rng));
    const TransportQuadrature Q(X, *mu);
    const double A1 = Q.anisotropy(b.psi, 1);
    const double A2 = Q.anisotropy(b.psi, 2);
    const double F0 = Q.moving_energy(b.psi, 0.0);
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const double t = ts[j];
      const double Fp = Q.moving_energy(b.psi, t), Fm = Q.moving_energy(b.psi, -t);
      const double fd1 = (Fp - Fm) / (2.0 * t);
      const double fd2 = (Fp - 2.0 * F0 + Fm) / (2.0 * t * t);
      if (t == t_min) {
        worst1 = std::max(worst1, std::abs(A1 - fd1) / std::abs(A1));
        worst2 = std::max(worst2, std::abs(A2 - fd2) / std::abs(A2));
      }
      w.row({std::to_string(k), num(t), num(per[j].gap.sup), num(per[j].gap.c1), num(per[j].eps_sup), num(A1),
             num(fd1), num(A2), num(fd2), per[j].cond1 ? "ok" : "violated", per[j].cond2 ? "ok" : "violated"});
    }
  }
  std::cout << "worst relative A1 mismatch " << worst1 << ", A2 mismatch " << worst2 << " at t = " << t_min << "\n";
  return worst1 <= tol && worst2 <= 10.0 * tol ? kExitOk : kExitAcceptance;
}

int run_fluctuations(const ExperimentConfig& cfg) {
  cfg.require({"samples"});
  const Setup s = make_setup(cfg);
  const Outputs out(cfg, "report.csv");
  write_manifest(cfg, out, "fluctuations");
  const GridDensity mu = equilibrium_density(cfg, s);
  Prediction p;
  prepare(cfg, s, mu, p);
  std::ifstream in(cfg.str("samples"));
  if (!in) throw ConfigError("cannot open sample file " + cfg.str("samples"));
  const auto configs = read_samples_csv(in, s.d).configurations;
  report(s, mu, p, configs, out.primary(), out.path("fluct_samples.csv"));
  std::cout << "report written to " << out.primary().string() << "\n";
  return kExitOk;
}

int run_clt_pipeline(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  const Outputs out(cfg, "report.csv");
  write_manifest(cfg, out, "clt-pipeline");
  const GridDensity mu = equilibrium_density(cfg, s, &out);
  Prediction p;
  prepare(cfg, s, mu, p);
  const auto configs = draw_samples(cfg, s, &mu, out.path("samples.csv"), out);
  report(s, mu, p, configs, out.primary(), out.path("fluct_samples.csv"));
  std::cout << "report written to " << out.primary().string() << "\n";
  return kExitOk;
}

}  // namespace coulomb::tools
