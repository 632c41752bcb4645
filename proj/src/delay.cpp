#include "kd/delay.hpp"

#include "kd/error.hpp"
#include "kd/lp.hpp"
#include "kd/parallel.hpp"
#include "kd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace kd {

namespace {

std::string fmt(double x)
{
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

double kernel_reach(const Kernel& k)
{
  return k.compact() ? k.support_radius() : k.integration_radius();
}

QuadratureOptions quad_for(const Alternative& m0)
{
  QuadratureOptions opt;
  opt.abs_tol = 1e-12 * std::max(std::abs(m0.amplitude()), 1e-300);
  return opt;
}

struct Resolved
{
  double bound;
  double step;
};

Resolved resolve(const SolverOptions& o, double default_bound)
{
  const double r = o.search_bound.value_or(default_bound);
  if (!(std::isfinite(r) && r > 0.0))
    throw ParameterError("search bound R must be positive and finite");
  const double step = o.grid_step.value_or(r / 2048.0);
  if (!(step > 0.0) || step > r)
    throw ParameterError("grid step must lie in (0, R]");
  if (!(o.tolerance > 0.0))
    throw ParameterError("root tolerance must be positive");
  return {r, step};
}

// Scan-then-bisect for the first rho with f(rho) >= c; f(0) = 0 < c.
template <class F>
DelaySolution first_crossing(F&& f, double c, const Resolved& r, double tol)
{
  if (!(std::isfinite(c) && c > 0.0))
    throw ParameterError("threshold c must be positive");
  DelaySolution out;
  out.grid_step = r.step;
  out.search_bound = r.bound;
  out.threshold = c;
  auto g = [&](double rho) { return f(rho) - c; };
  const auto scan = scan_first_crossing(g, 0.0, r.bound, r.step);
  out.evaluations = scan.evaluations;
  if (!scan.hit) {
    out.rho = r.bound;
    out.psi_at_rho = scan.last_value + c;
    out.bracket = {r.bound, r.bound};
    out.status = scan.last_value > scan.previous_value ? DelayStatus::at_upper_bound
                                                       : DelayStatus::no_crossing;
    return out;
  }
  out.bracket = bisect_up_crossing(g, scan.hit->lo, scan.hit->hi, tol, &out.evaluations);
  out.rho = 0.5 * (out.bracket.lo + out.bracket.hi);
  out.psi_at_rho = f(out.rho);
  ++out.evaluations;
  out.status = DelayStatus::converged;
  return out;
}

} // namespace

std::string_view to_string(DelayStatus s)
{
  switch (s) {
  case DelayStatus::converged:
    return "converged";
  case DelayStatus::no_crossing:
    return "no_crossing";
  case DelayStatus::at_upper_bound:
    return "at_upper_bound";
  }
  return "unknown";
}

double psi(const Kernel& k, const Alternative& m0, double rho)
{
  if (!(rho >= 0.0))
    throw ParameterError("psi: rho must be nonnegative");
  const double lo = std::max(0.0, rho - kernel_reach(k));
  if (!(rho > lo))
    return 0.0;
  std::vector<double> cuts = m0.breakpoints();
  for (double b : k.breakpoints())
    cuts.push_back(rho - b);
  auto integrand = [&](double s) { return k(s - rho) * m0(s); };
  return adaptive_simpson_split(integrand, lo, rho, cuts, quad_for(m0)).value;
}

double default_search_bound(const Kernel& k, const Alternative& m0)
{
  const double t = m0.support_end();
  return std::isfinite(t) ? 4.0 * t : 4.0 * kernel_reach(k);
}

DelaySolution solve_rho0(const Kernel& k, const Alternative& m0, double c,
                         const SolverOptions& options)
{
  const auto r = resolve(options, default_search_bound(k, m0));
  return first_crossing([&](double rho) { return psi(k, m0, rho); }, c, r,
                        options.tolerance);
}

double design_functional(const Kernel& k, const Alternative& m0,
                         const TimeDesign& design, double rho, DesignLimit limit)
{
  if (!(rho >= 0.0))
    throw ParameterError("design functional: rho must be nonnegative");
  if (design.kind() == TimeDesign::Kind::power && design.exponent() < 1.0)
    throw ParameterError("design functional: power designs need exponent >= 1");
  if (rho == 0.0)
    return 0.0;
  const double lo = std::max(0.0, 1.0 - kernel_reach(k) / rho);
  const bool scaled = limit == DesignLimit::scaled;
  std::vector<double> cuts = design.breakpoints();
  for (double b : k.breakpoints())
    cuts.push_back(1.0 - b / rho);
  for (double b : m0.breakpoints())
    cuts.push_back(scaled ? b / rho : b);
  auto integrand = [&](double s) {
    const double drift = scaled ? m0(rho * s) : m0(s);
    return k(rho * (s - 1.0)) * drift * design.density(s);
  };
  auto opt = quad_for(m0);
  opt.abs_tol /= rho;
  return rho * adaptive_simpson_split(integrand, lo, 1.0, cuts, opt).value;
}

DelaySolution solve_rho0_design(const Kernel& k, const Alternative& m0, double c,
                                const TimeDesign& design,
                                const SolverOptions& options, DesignLimit limit)
{
  const auto r = resolve(options, default_search_bound(k, m0));
  return first_crossing(
      [&](double rho) { return design_functional(k, m0, design, rho, limit); }, c,
      r, options.tolerance);
}

OptimalPair solve_optimal_pair(const Alternative& m0, double c,
                               const SolverOptions& options,
                               const OptimalKernelOptions& kernel_options)
{
  const double total = m0.total_integral();
  if (!std::isfinite(total) || !(total > 0.0))
    throw ParameterError("optimal pair: the alternative needs 0 < int m0 < inf");
  const auto r = resolve(options, m0.support_end());
  auto g = [&](double rho) { return m0.sq_integral(0.0, rho) / (2.0 * total); };
  auto sol = first_crossing(g, c, r, options.tolerance);
  if (sol.status != DelayStatus::converged)
    throw NoSolutionError("threshold unreachable for this alternative: "
                          "int_0^R m0^2 / (2 int m0) = " +
                          fmt(sol.psi_at_rho) + " < c = " + fmt(c));
  auto kernel = make_optimal_kernel(m0, sol.rho, kernel_options);
  const double attained = psi(kernel, m0, sol.rho);
  return OptimalPair{sol.rho, std::move(kernel), sol, attained};
}

Selection select_kernel(std::span<const Kernel> candidates, const Alternative& m0,
                        double c, const SolverOptions& options)
{
  if (candidates.empty())
    throw ParameterError("select_kernel: empty candidate list");
  std::vector<DelaySolution> sols(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) {
    sols[i] = solve_rho0(candidates[i], m0, c, options);
  });
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    if (sols[i].status != DelayStatus::converged)
      continue;
    if (!best || sols[i].rho < sols[*best].rho)
      best = i;
  }
  if (!best)
    throw NoSolutionError("select_kernel: no candidate reaches the threshold");
  return {*best, std::move(sols)};
}

namespace {

struct LpGrid
{
  std::vector<double> u;      // half-axis nodes carrying variables
  double end = 0.0;           // node where K is pinned to zero
  std::vector<double> mass_w; // trapezoid weights on [0, end]
  std::vector<double> obj_w;  // trapezoid weights on [0, rho]
};

LpGrid make_lp_grid(double rho, std::size_t grid_n, std::size_t ext, double end)
{
  LpGrid g;
  g.end = end;
  const double du = rho / static_cast<double>(grid_n);
  for (std::size_t j = 0; j <= grid_n; ++j)
    g.u.push_back(j == grid_n ? rho : static_cast<double>(j) * du);
  const double de = (end - rho) / static_cast<double>(ext);
  for (std::size_t j = 1; j < ext; ++j)
    g.u.push_back(rho + static_cast<double>(j) * de);
  const std::size_t n = g.u.size();
  g.mass_w.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = j == 0 ? 0.0 : g.u[j] - g.u[j - 1];
    const double right = (j + 1 < n ? g.u[j + 1] : end) - g.u[j];
    g.mass_w[j] = 0.5 * (left + right);
  }
  g.obj_w.assign(grid_n + 1, du);
  g.obj_w.front() = g.obj_w.back() = 0.5 * du;
  return g;
}

} // namespace

double lp_objective(const Kernel& k, const Alternative& m0, double rho,
                    std::size_t grid_n)
{
  const double du = rho / static_cast<double>(grid_n);
  double sum = 0.0;
  for (std::size_t j = 0; j <= grid_n; ++j) {
    const double u = j == grid_n ? rho : static_cast<double>(j) * du;
    const double w = (j == 0 || j == grid_n) ? 0.5 * du : du;
    sum += w * k(u) * m0(rho - u);
  }
  return sum;
}

ReachableProbe lp_oracle(const Alternative& m0, double rho, double lipschitz_const,
                         double sup_bound, const LpOptions& options)
{
  if (!(std::isfinite(rho) && rho > 0.0))
    throw ParameterError("lp_oracle: rho must be positive");
  if (!(lipschitz_const > 0.0) || !(sup_bound > 0.0))
    throw ParameterError("lp_oracle: L and C_K must be positive");
  if (options.grid_n < 16)
    throw ParameterError("lp_oracle: grid_n must be at least 16");
  if (options.extension_nodes < 2)
    throw ParameterError("lp_oracle: need at least two extension nodes");
  const double end = options.max_support.value_or(
      rho + sup_bound / lipschitz_const + 0.5 / sup_bound);
  if (!(end > rho))
    throw ParameterError("lp_oracle: max_support must exceed rho");

  const auto grid = make_lp_grid(rho, options.grid_n, options.extension_nodes, end);
  const auto n = static_cast<Eigen::Index>(grid.u.size());
  const Eigen::Index rows = 2 * (n - 1) + 1 + n + 1;

  lp::Problem p;
  p.A = Eigen::MatrixXd::Zero(rows, n);
  p.b = Eigen::VectorXd::Zero(rows);
  p.rel.assign(static_cast<std::size_t>(rows), lp::Relation::le);
  p.c = Eigen::VectorXd::Zero(n);

  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double bound = lipschitz_const * (grid.u[j + 1] - grid.u[j]);
    p.A(r, j) = 1.0;
    p.A(r, j + 1) = -1.0;
    p.b(r++) = bound;
    p.A(r, j) = -1.0;
    p.A(r, j + 1) = 1.0;
    p.b(r++) = bound;
  }
  p.A(r, n - 1) = 1.0; // last node against the pinned zero
  p.b(r++) = lipschitz_const * (end - grid.u.back());
  for (Eigen::Index j = 0; j < n; ++j) {
    p.A(r, j) = 1.0;
    p.b(r++) = sup_bound;
  }
  for (Eigen::Index j = 0; j < n; ++j)
    p.A(r, j) = 2.0 * grid.mass_w[static_cast<std::size_t>(j)];
  p.b(r) = 1.0;
  p.rel[static_cast<std::size_t>(r)] = lp::Relation::eq;

  for (std::size_t j = 0; j < grid.obj_w.size(); ++j)
    p.c(static_cast<Eigen::Index>(j)) = grid.obj_w[j] * m0(rho - grid.u[j]);

  lp::Solution sol;
  try {
    sol = lp::maximize(p);
  } catch (const InfeasibleError&) {
    throw InfeasibleError("lp_oracle: no kernel with L = " + fmt(lipschitz_const) +
                          ", C_K = " + fmt(sup_bound) +
                          " carries unit mass on [-" + fmt(end) + ", " + fmt(end) + "]");
  }

  std::vector<double> x(grid.u.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    x[j] = std::max(sol.x(static_cast<Eigen::Index>(j)), 0.0);
  double value = 0.0;
  for (std::size_t j = 0; j < grid.obj_w.size(); ++j)
    value += grid.obj_w[j] * x[j] * m0(rho - grid.u[j]);

  std::vector<double> zs, ks;
  zs.push_back(-end);
  ks.push_back(0.0);
  for (std::size_t j = grid.u.size(); j-- > 1;) {
    zs.push_back(-grid.u[j]);
    ks.push_back(x[j]);
  }
  for (std::size_t j = 0; j < grid.u.size(); ++j) {
    zs.push_back(grid.u[j]);
    ks.push_back(x[j]);
  }
  zs.push_back(end);
  ks.push_back(0.0);
  const double top = *std::max_element(ks.begin(), ks.end());
  auto kernel = Kernel::tabulated(std::move(zs), std::move(ks),
                                  lipschitz_const * (1.0 + 1e-9),
                                  std::max(sup_bound, top) * (1.0 + 1e-9),
                                  "lp_argmax(rho=" + fmt(rho) + ")");
  return ReachableProbe{rho,
                        value,
                        std::move(kernel),
                        options.grid_n,
                        options.extension_nodes,
                        end,
                        lipschitz_const,
                        sup_bound,
                        sol.pivots};
}

std::vector<ReachableProbe> lp_sweep(const Alternative& m0,
                                     std::span<const double> rhos,
                                     double lipschitz_const, double sup_bound,
                                     const LpOptions& options)
{
  std::vector<std::optional<ReachableProbe>> slots(rhos.size());
  parallel_for(rhos.size(), [&](std::size_t i) {
    slots[i].emplace(lp_oracle(m0, rhos[i], lipschitz_const, sup_bound, options));
  });
  std::vector<ReachableProbe> out;
  out.reserve(rhos.size());
  for (auto& s : slots)
    out.push_back(std::move(*s));
  return out;
}

} // namespace kd
