#pragma once

#include "config.hpp"

#include <string>

namespace coulomb::tools {

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

int run_equilibrium(const ExperimentConfig& cfg);
int run_sample(const ExperimentConfig& cfg);
int run_energy_check(const ExperimentConfig& cfg);
int run_transport_check(const ExperimentConfig& cfg);
int run_fluctuations(const ExperimentConfig& cfg);
int run_clt_pipeline(const ExperimentConfig& cfg);

// Worker threads: the threads key, else COULOMB_THREADS, else the hardware concurrency.
int thread_count(const ExperimentConfig& cfg);

}  // namespace coulomb::tools
