#pragma once

#include "kd/alternative.hpp"
#include "kd/design.hpp"
#include "kd/kernel.hpp"
#include "kd/roots.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace kd {

enum class DelayStatus
{
  converged,
  //! No crossing on [0, R] and the functional is no longer rising at R.
  no_crossing,
  //! No crossing on [0, R] but the functional still rises at R; a larger
  //! search bound may find one.  rho is R in this case.
  at_upper_bound
};

std::string_view to_string(DelayStatus s);

struct DelaySolution
{
  double rho = 0.0;
  double psi_at_rho = 0.0;
  Bracket bracket;
  double grid_step = 0.0;
  double search_bound = 0.0;
  double threshold = 0.0;
  DelayStatus status = DelayStatus::no_crossing;
  std::size_t evaluations = 0;
};

struct SolverOptions
{
  //! R; defaults to default_search_bound().
  std::optional<double> search_bound;
  //! Scan step; defaults to R / 2048.
  std::optional<double> grid_step;
  double tolerance = 1e-10;
};

//! Psi(rho) = int_0^rho K(s - rho) m0(s) ds
double psi(const Kernel& k, const Alternative& m0, double rho);

//! 4 T for truncated alternatives, otherwise 4 times the kernel's
//! integration radius.
double default_search_bound(const Kernel& k, const Alternative& m0);

//! First crossing of Psi(rho) = c on [0, R].
DelaySolution solve_rho0(const Kernel& k, const Alternative& m0, double c,
                         const SolverOptions& options = {});

//! Which form of the design limit to solve.
enum class DesignLimit
{
  //! g(rho) = rho int_0^1 K(rho (s - 1)) m0(rho s) f_T(s) ds.  The limit of
  //! the smoother when observations sit at n F_T^{-1}(i/n); reduces to Psi
  //! for the uniform design.
  scaled,
  //! Same with m0(s) in place of m0(rho s).
  printed
};

double design_functional(const Kernel& k, const Alternative& m0,
                         const TimeDesign& design, double rho,
                         DesignLimit limit = DesignLimit::scaled);

DelaySolution solve_rho0_design(const Kernel& k, const Alternative& m0,
                                double c, const TimeDesign& design,
                                const SolverOptions& options = {},
                                DesignLimit limit = DesignLimit::scaled);

struct OptimalPair
{
  double rho_star = 0.0;
  Kernel kernel;
  DelaySolution solution;
  //! I(K*, rho*) by quadrature, for the self-consistency check.
  double attained = 0.0;
};

//! rho* = first root of int_0^rho m0^2 / (2 int_0^inf m0) = c, and
//! K* = make_optimal_kernel(m0, rho*).
OptimalPair solve_optimal_pair(const Alternative& m0, double c,
                               const SolverOptions& options = {},
                               const OptimalKernelOptions& kernel_options = {});

struct Selection
{
  std::size_t index = 0;
  std::vector<DelaySolution> solutions;
};

//! Candidate with the smallest converged rho0; ties go to the lowest index.
//! Throws NoSolutionError when no candidate converges.
Selection select_kernel(std::span<const Kernel> candidates,
                        const Alternative& m0, double c,
                        const SolverOptions& options = {});

struct LpOptions
{
  std::size_t grid_n = 256;
  //! Nodes on the part of the half axis beyond rho.
  std::size_t extension_nodes = 64;
  //! Largest admissible half-support of the kernel; defaults to
  //! rho + C/L + 1/(2C), which always leaves room for a feasible kernel.
  std::optional<double> max_support;
};

struct ReachableProbe
{
  double rho = 0.0;
  double sup_value = 0.0;
  Kernel argmax_kernel;
  std::size_t grid_n = 0;
  std::size_t extension_nodes = 0;
  double max_support = 0.0;
  double lipschitz_const = 0.0;
  double sup_bound = 0.0;
  std::size_t pivots = 0;
};

//! Maximizes the trapezoid discretization of I(K, rho) over symmetric grid
//! kernels with unit mass, |K_i - K_{i+1}| <= L du and K_i <= C.
ReachableProbe lp_oracle(const Alternative& m0, double rho, double lipschitz_const,
                         double sup_bound, const LpOptions& options = {});

//! Discretized objective of an arbitrary kernel on the same grid lp_oracle
//! uses; any feasible kernel scores at most the probe's sup_value.
double lp_objective(const Kernel& k, const Alternative& m0, double rho,
                    std::size_t grid_n);

//! lp_oracle over several rho values (run in parallel, assembled in order).
std::vector<ReachableProbe> lp_sweep(const Alternative& m0,
                                     std::span<const double> rhos,
                                     double lipschitz_const, double sup_bound,
                                     const LpOptions& options = {});

} // namespace kd
