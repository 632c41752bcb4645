#pragma once

#include "config.hpp"

#include "kd/delay.hpp"
#include "kd/sim.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace kd::cli {

enum ExitCode : int
{
  exit_ok = 0,
  exit_config = 1,
  exit_no_solution = 2,
  exit_numerical = 3
};

struct Output
{
  std::filesystem::path dir;
  //! Print the main JSON document to stdout instead of writing files.
  bool to_stdout = false;
};

// config -> library objects
std::optional<Alternative> build_alternative(const RunConfig& cfg);
Kernel build_kernel(const RunConfig& cfg);
//! gaussian, epanechnikov, triangular, laplace:<rate>, tabulated, optimal
Kernel kernel_from_name(const std::string& name, const RunConfig& cfg);
TimeDesign build_design(const RunConfig& cfg);
DesignLimit build_design_limit(const RunConfig& cfg);
NoiseModel build_noise(const RunConfig& cfg);
SolverOptions build_solver(const RunConfig& cfg);
ScenarioSpec build_scenario(const RunConfig& cfg);
std::uint64_t seed_of(const RunConfig& cfg);

int cmd_solve_delay(const RunConfig& cfg, const Output& out);
int cmd_optimal_kernel(const RunConfig& cfg, const Output& out);
int cmd_monitor(const RunConfig& cfg, const Output& out);
int cmd_montecarlo(const RunConfig& cfg, const Output& out);
int cmd_false_alarm(const RunConfig& cfg, const Output& out);
int cmd_select_kernel(const RunConfig& cfg, const Output& out);
int cmd_oracle(const RunConfig& cfg, const Output& out);

//! Runs a command, mapping library exceptions to exit codes and printing the
//! diagnostic on stderr.
int dispatch(const std::string& command, const RunConfig& cfg, const Output& out);

} // namespace kd::cli
