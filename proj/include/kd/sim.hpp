#pragma once

#include "kd/alternative.hpp"
#include "kd/design.hpp"
#include "kd/kernel.hpp"
#include "kd/monitor.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kd {

//! Stationary noise.  All built-ins have finite exponential moments, and
//! AR(1) with |phi| < 1 is geometrically mixing; user noise (from data) comes
//! with no such guarantee.
struct NoiseModel
{
  enum class Kind
  {
    none,
    iid_gaussian,
    ar1,
    uniform_bounded
  };
  Kind kind = Kind::iid_gaussian;
  double sigma = 1.0;      // gaussian sd / AR(1) innovation sd
  double phi = 0.0;        // AR(1) coefficient
  std::size_t burn_in = 10000;
  double half_width = 1.0; // uniform_bounded

  static NoiseModel none() { return {Kind::none}; }
  static NoiseModel iid_gaussian(double sigma) { return {Kind::iid_gaussian, sigma}; }
  static NoiseModel ar1(double phi, double sigma, std::size_t burn_in = 10000)
  {
    return {Kind::ar1, sigma, phi, burn_in};
  }
  static NoiseModel uniform_bounded(double half_width)
  {
    return {Kind::uniform_bounded, 1.0, 0.0, 0, half_width};
  }

  void validate() const;
  std::string name() const;
};

//! Deterministic given the seed.  AR(1) starts from the stationary law and
//! then discards burn_in samples.
Eigen::VectorXd gen_noise(const NoiseModel& model, std::size_t n, std::uint64_t seed);

enum class StreamRole : std::uint64_t
{
  noise = 1,
  design_noise = 2
};

//! 64-bit seed for (master, index, role), by splitmix64 finalization.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index, StreamRole role);

struct ScenarioSpec
{
  NoiseModel noise;
  //! Empty for an in-control scenario.
  std::optional<Alternative> alternative;
  double t_q_star = 0.0;
  std::vector<double> h_values{100.0};
  Kernel kernel = Kernel::gaussian();
  double c = 0.5;
  Side side = Side::two_sided;
  WindowPolicy window;
  //! Observation horizon is t_q + horizon_factor * h.
  double horizon_factor = 8.0;
  TimeDesign design = TimeDesign::uniform();
  std::size_t replications = 100;
  std::uint64_t master_seed = 1;

  void validate() const;
  //! floor(t_q*) + 1
  double t_q() const;
  std::size_t horizon(double h) const;
};

struct Stream
{
  std::vector<double> times;
  std::vector<double> values;
  double t_q = 0.0;
};

//! Y_n = 1(t_n >= t_q) m0((t_n - t_q) / h) + eps_n at t_n = n, n = 1..horizon.
Stream make_observations(const ScenarioSpec& spec, double h, std::size_t replication);

//! The design sample seen at monitoring step n: times n F_T^{-1}(i/n) with
//! drift and a fresh noise draw for that step.
Stream make_design_sample(const ScenarioSpec& spec, double h,
                          std::size_t replication, std::size_t n);

//! One replication; under a non-uniform design the statistic at step n is
//! computed on make_design_sample(..., n).
RunRecord run_replication(const ScenarioSpec& spec, double h, std::size_t replication);

struct SummaryRow
{
  double h = 0.0;
  std::size_t replications = 0;
  std::size_t signaled = 0;
  std::size_t censored = 0;
  std::size_t false_alarms = 0; // N_h < t_q
  double false_alarm_rate = 0.0;
  // over signaled runs; NaN when none signaled
  double mean = 0.0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double median_abs_error = 0.0; // median |rho_h - rho0|
  std::vector<double> delays;    // sorted normed delays of signaled runs
};

struct ExperimentSummary
{
  std::vector<SummaryRow> rows;
  //! Delay-solver reference (NaN for in-control scenarios).
  double rho0 = 0.0;
  std::string rho0_status;
  //! m0(0) != 0: outside the hypotheses of the almost-sure convergence result.
  bool outside_convergence_hypotheses = false;
};

//! Replications run in parallel; results do not depend on the thread count.
ExperimentSummary monte_carlo(const ScenarioSpec& spec);

struct FalseAlarmRow
{
  double h = 0.0;
  std::size_t horizon = 0; // floor(zeta h)
  std::size_t replications = 0;
  std::size_t alarms = 0;
  double rate = 0.0;
  double std_error = 0.0;
};

//! Empirical P(N_h <= zeta h) on in-control streams.
std::vector<FalseAlarmRow> false_alarm_study(const ScenarioSpec& spec, double zeta);

struct Calibration
{
  double c = 0.0;
  double achieved_rate = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  std::size_t replications = 0;
  std::size_t iterations = 0;
};

//! Smallest c in [c_lo, c_hi] whose in-control alarm rate P(N_h <= zeta h)
//! does not exceed target, found by bisection on a fixed set of replications.
//! Uses the first entry of spec.h_values.  Throws NoSolutionError when even
//! c_hi alarms too often.
Calibration calibrate_threshold(const ScenarioSpec& spec, double target, double zeta,
                                double c_lo = 0.0, double c_hi = 10.0);

//! Type-7 quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p);

} // namespace kd
