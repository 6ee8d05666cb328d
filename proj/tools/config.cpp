#include "config.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <fstream>
#include <sstream>

#ifndef COULOMB_LAB_VERSION
#define COULOMB_LAB_VERSION "unknown"
#endif

namespace coulomb::tools {

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"dim", "2", "dimension (2 or 3)"},
      {"beta", "", "inverse temperature"},
      {"n", "", "number of particles"},
      {"potential", "quad", "quad, quad:a, quartic:a,b or poly:c0,c1,..."},
      {"grid_n", "256", "cells per axis of the equilibrium grid"},
      {"tol", "1e-10", "equilibrium solver tolerance on the fixed-point residual"},
      {"mu", "", "grid file with the equilibrium density (instead of solving)"},
      {"box", "", "half-width of the grid box (default: support plus 6 theta^{-1/2})"},
      {"sampler", "mcmc", "mcmc or ginibre"},
      {"target", "V", "MCMC target: V (Gibbs measure) or Q (split form with mu_theta)"},
      {"xi", "", "test function bump:x,y[,z],ell,p (default centred, ell 0.3, p 4 in d=2 and 6 in d=3)"},
      {"q", "", "truncation order of the transport (default 0 in d=2, 1 in d=3)"},
      {"seed", "1", "random seed"},
      {"samples", "1000", "number of samples, or the sample file for fluctuations"},
      {"sweeps", "20000", "recorded MCMC sweeps per chain"},
      {"burnin", "-1", "burn-in sweeps (negative: from a pilot run)"},
      {"thin", "-1", "thinning (negative: from a pilot run)"},
      {"sigma", "-1", "proposal scale (negative: 0.5 N^{-1/d})"},
      {"chains", "1", "independent MCMC chains"},
      {"threads", "", "worker threads (overrides COULOMB_THREADS)"},
      {"out", "out", "output directory, or the primary output file when it has an extension"},
      {"theta", "", "override theta = beta N^{2/d}"},
      {"t_sweep", "1e-4,1e-3,1e-2", "perturbation sizes for transport-check"},
      {"tau_grid", "-1,-0.5,-0.25,0.25,0.5,1", "Laplace-transform parameters"},
      {"config", "", "energy-check: points file (CSV with x,y[,z] columns or a sample file)"},
      {"configs", "10", "random configurations for the check commands"},
      {"tolerance", "", "acceptance tolerance of the check commands"},
      {"mu_source", "grid", "grid (mu_theta solve) or expansion (f_2 ladder) for the predictions"},
      {"fd_table", "", "CSV beta,f,fprime with the free energy f_d (d >= 3 mean)"},
      {"fd_c", "1", "declared constant of the f_d bounds"},
      {"c_rho", "1", "constant in rho_beta"},
      {"c_d0", "1", "constant in the bulk margin d0"},
      {"splitting", "1", "energy-check: run the splitting suite"},
      {"eta", "0", "energy-check: run the electric-form and eta-independence suite (d = 2)"},
      {"multiscale", "0", "energy-check: run the multiscale suite"},
      {"field_refine", "2", "energy-check: refinement of the field grid (compared with twice that)"},
      {"window", "", "energy-check: half-width of the multiscale window (default: twice the support radius)"},
      {"multiscale_s", "1", "energy-check: exponent s of the multiscale sum"},
      {"multiscale_ell", "", "energy-check: largest pair distance of the multiscale sum (default window/8)"},
      {"c_bound", "1", "energy-check: constant C of the multiscale bound"},
      {"admissibility", "report", "report or strict handling of the transport conditions"},
  };
  return keys;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

std::string ExperimentConfig::normalize(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

ExperimentConfig::ExperimentConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.fallback;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const std::string k = normalize(key);
  if (!values_.count(k)) {
    std::string list;
    for (const auto& s : config_keys()) list += (list.empty() ? "" : ", ") + s.name;
    throw ConfigError("unknown key '" + key + "'; valid keys: " + list);
  }
  values_[k] = value;
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

bool ExperimentConfig::has(const std::string& key) const {
  const auto it = values_.find(normalize(key));
  return it != values_.end() && !it->second.empty();
}

std::string ExperimentConfig::str(const std::string& key) const {
  const auto it = values_.find(normalize(key));
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

int ExperimentConfig::integer(const std::string& key) const {
  const std::string v = str(key);
  std::size_t pos = 0;
  int r = 0;
  try {
    r = std::stoi(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size()) throw ConfigError(flag_name(key) + ": expected an integer, got '" + v + "'");
  return r;
}

double ExperimentConfig::real(const std::string& key) const {
  const std::string v = str(key);
  std::size_t pos = 0;
  double r = 0.0;
  try {
    r = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size()) throw ConfigError(flag_name(key) + ": expected a number, got '" + v + "'");
  return r;
}

std::uint64_t ExperimentConfig::u64(const std::string& key) const {
  const std::string v = str(key);
  std::size_t pos = 0;
  std::uint64_t r = 0;
  try {
    r = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size() || v[0] == '-')
    throw ConfigError(flag_name(key) + ": expected a nonnegative integer, got '" + v + "'");
  return r;
}

std::vector<double> ExperimentConfig::reals(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(str(key));
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (cell.empty() || pos != cell.size())
      throw ConfigError(flag_name(key) + ": expected a comma-separated list of numbers");
    out.push_back(v);
  }
  return out;
}

void ExperimentConfig::require(const std::vector<std::string>& keys) const {
  for (const auto& k : keys)
    if (!has(k)) throw ConfigError("missing required option " + flag_name(k));
}

void ExperimentConfig::write_manifest(std::ostream& os, const std::string& command) const {
  os << "# coulomb-lab manifest\n";
  os << "command=" << command << "\n";
  os << "version=" << COULOMB_LAB_VERSION << "\n";
  os << "eigen=" << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n";
#ifdef __VERSION__
  os << "compiler=" << __VERSION__ << "\n";
#endif
  for (const auto& k : config_keys()) {
    if (k.name == "threads") continue;
    os << k.name << "=" << values_.at(k.name) << "\n";
  }
}

}  // namespace coulomb::tools
