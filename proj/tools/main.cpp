#include "commands.hpp"
#include "config.hpp"

#include "coulomb/equilibrium.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <stdexcept>

using namespace coulomb::tools;

namespace {

struct Command {
  const char* name;
  const char* help;
  int (*run)(const ExperimentConfig&);
};

const Command kCommands[] = {
    {"equilibrium", "solve for the thermal equilibrium measure", run_equilibrium},
    {"sample", "draw Gibbs configurations (Metropolis or exact Ginibre)", run_sample},
    {"energy-check", "splitting identity and electric form on random configurations", run_energy_check},
    {"transport-check", "anisotropy against finite differences along the transport", run_transport_check},
    {"fluctuations", "fluctuation report for a sample file", run_fluctuations},
    {"clt-pipeline", "equilibrium, sampling and fluctuation report in one run", run_clt_pipeline},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coulomb-lab: numerical laboratory for Coulomb gases"};
  app.require_subcommand(1);

  struct Bound {
    CLI::App* sub;
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<Bound> bound(std::size(kCommands));
  for (std::size_t c = 0; c < std::size(kCommands); ++c) {
    Bound& b = bound[c];
    b.sub = app.add_subcommand(kCommands[c].name, kCommands[c].help);
    b.sub->add_option("--config-file", b.config, "key=value configuration file (flags override it)");
    for (const auto& k : config_keys()) {
      std::string help = k.help;
      if (!k.fallback.empty()) help += " [" + k.fallback + "]";
      b.options[k.name] = b.sub->add_option(flag_name(k.name), b.values[k.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  for (std::size_t c = 0; c < std::size(kCommands); ++c) {
    Bound& b = bound[c];
    if (!b.sub->parsed()) continue;
    try {
      ExperimentConfig cfg;
      if (!b.config.empty()) cfg.load_file(b.config);
      for (const auto& [key, opt] : b.options)
        if (opt->count() > 0) cfg.set(key, b.values[key]);
      if (cfg.has("threads")) setenv("COULOMB_THREADS", std::to_string(thread_count(cfg)).c_str(), 1);
      return kCommands[c].run(cfg);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n" << b.sub->help();
      return kExitConfig;
    } catch (const coulomb::AdmissibilityError& e) {
      std::cerr << "admissibility: " << e.what() << "\n";
      return kExitConfig;
    } catch (const std::invalid_argument& e) {
      std::cerr << "invalid input: " << e.what() << "\n";
      return kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "numerical failure: " << e.what() << "\n";
      return kExitNumerical;
    }
  }
  return kExitConfig;
}
