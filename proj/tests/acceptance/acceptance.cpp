// Acceptance checks 1-11.  One PASS/FAIL line per criterion; exit status is
// the number of failures.

#include "kd/alternative.hpp"
#include "kd/delay.hpp"
#include "kd/error.hpp"
#include "kd/kernel.hpp"
#include "kd/lambert_w.hpp"
#include "kd/monitor.hpp"
#include "kd/sim.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace kd;

namespace {

// pinned tolerances
constexpr double tol_step_closed_form = 1e-6;
constexpr double limit_step_seconds = 1.0;
constexpr double tol_self_consistency = 1e-8;
constexpr double limit_pair_seconds = 5.0;
constexpr double tol_linear_shape = 1e-10;
constexpr double tol_log_slope = 1e-8;
constexpr double tol_convergence_h400 = 0.15;
constexpr double limit_convergence_seconds = 300.0;
constexpr double false_alarm_se_multiple = 2.0;
constexpr double tol_streaming = 1e-12;
constexpr double tol_lambert_residual = 1e-12;
constexpr double tol_substrate = 1e-6;
constexpr double tol_w_identity = 1e-8;
constexpr double tol_lp_below_kstar = 1e-3;
constexpr double tol_lp_monotone = 1e-12;
constexpr double limit_lp_seconds = 60.0;
constexpr double tol_design_mc = 0.15;

int failures = 0;

void report(int id, bool pass, const std::string& detail)
{
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass)
    ++failures;
}

void guarded(int id, const std::function<void()>& body)
{
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

void criterion_1()
{
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& k : {Kernel::gaussian(), Kernel::epanechnikov()})
    for (double ratio : {0.1, 0.25, 0.4}) {
      const double a = 1.0;
      const auto s = solve_rho0(k, Alternative::step(a), ratio * a);
      if (s.status != DelayStatus::converged)
        worst = INFINITY;
      else
        worst = std::max(worst, std::abs(s.rho - k.quantile(0.5 + ratio)));
    }
  const double secs = seconds_since(t0);
  report(1, worst <= tol_step_closed_form && secs < limit_step_seconds,
         "max |rho0 - quantile(1/2 + c/a)| = " + fmt(worst) + " (tol " +
             fmt(tol_step_closed_form) + "), " + fmt(secs) + " s");
}

void criterion_2()
{
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  const std::vector<std::pair<Alternative, double>> cases{
      {Alternative::truncated_linear(1.0, 4.0), 0.5},
      {Alternative::truncated_exponential(0.5, 4.0), 0.8},
      {Alternative::michaelis_menten(1.0, 0.5, 0.3, 10.0), 0.3}};
  for (const auto& [m0, c] : cases) {
    const auto p = solve_optimal_pair(m0, c);
    // independent of the value stored by the solver
    worst = std::max(worst, std::abs(psi(p.kernel, m0, p.rho_star) - c));
    worst = std::max(worst, std::abs(p.attained - c));
  }
  const double secs = seconds_since(t0);
  report(2, worst <= tol_self_consistency && secs < limit_pair_seconds,
         "max |I(K*, rho*) - c| = " + fmt(worst) + " (tol " + fmt(tol_self_consistency) +
             "), " + fmt(secs) + " s");
}

void criterion_3()
{
  const double T = 4.0;
  const auto lin = Alternative::truncated_linear(1.0, T);
  const auto pl = solve_optimal_pair(lin, 0.5);
  double shape = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double z = -pl.rho_star + 2 * pl.rho_star * i / 10000.0;
    shape = std::max(shape, std::abs(pl.kernel(z) - (pl.rho_star - std::abs(z)) / (T * T)));
  }

  const double lambda = 0.5;
  const auto ex = Alternative::truncated_exponential(lambda, 4.0);
  const auto pe = solve_optimal_pair(ex, 0.8);
  const double base = std::log(pe.kernel(0.0));
  double slope = 0.0;
  for (int i = 1; i <= 10000; ++i) {
    const double z = pe.rho_star * i / 10000.0;
    for (double s : {z, -z})
      slope = std::max(slope, std::abs((std::log(pe.kernel(s)) - base) / z + lambda));
  }
  report(3, shape <= tol_linear_shape && slope <= tol_log_slope,
         "linear shape error " + fmt(shape) + " (tol " + fmt(tol_linear_shape) +
             "), exponential log-slope error " + fmt(slope) + " (tol " + fmt(tol_log_slope) +
             ")");
}

void criterion_4()
{
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioSpec spec;
  spec.noise = NoiseModel::ar1(0.4, 1.0);
  spec.alternative = Alternative::truncated_linear(1.0, 4.0);
  spec.kernel = Kernel::gaussian();
  spec.c = 0.07;
  spec.t_q_star = 0.0;
  spec.h_values = {50.0, 100.0, 200.0, 400.0};
  spec.replications = 500;
  spec.master_seed = 20261015;
  const auto sum = monte_carlo(spec);
  const double secs = seconds_since(t0);

  const bool rho0_in_range = sum.rho0 >= 0.5 && sum.rho0 <= 0.8;
  bool decreasing = true;
  std::string errs;
  for (std::size_t i = 0; i < sum.rows.size(); ++i) {
    errs += (i ? ", " : "") + fmt(sum.rows[i].median_abs_error);
    if (i > 0 && !(sum.rows[i].median_abs_error < sum.rows[i - 1].median_abs_error))
      decreasing = false;
  }
  const double last = sum.rows.back().median_abs_error;
  report(4,
         rho0_in_range && decreasing && last <= tol_convergence_h400 &&
             secs <= limit_convergence_seconds,
         "rho0 = " + fmt(sum.rho0) + ", median |rho_h - rho0| = [" + errs +
             "] (tol at h=400 " + fmt(tol_convergence_h400) + "), " + fmt(secs) + " s");
}

void criterion_5()
{
  ScenarioSpec spec;
  spec.noise = NoiseModel::iid_gaussian(1.0);
  spec.kernel = Kernel::gaussian();
  spec.c = 0.5;
  spec.h_values = {50.0, 100.0, 200.0, 400.0};
  spec.replications = 1000;
  spec.master_seed = 7;
  const auto rows = false_alarm_study(spec, 2.0);
  bool ok = true;
  std::string rates;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rates += (i ? ", " : "") + fmt(rows[i].rate);
    if (i > 0) {
      const double se = std::hypot(rows[i].std_error, rows[i - 1].std_error);
      ok = ok && rows[i].rate <= rows[i - 1].rate + false_alarm_se_multiple * se;
    }
  }
  bool silent = true;
  for (const auto& r : rows)
    silent = silent && r.alarms == 0;
  report(5, ok,
         "P(N_h <= 2h) = [" + rates + "]" +
             (silent ? " (no alarm at any h: c = 0.5 is far above the in-control peak)" : ""));
}

void criterion_6()
{
  const std::size_t n = 10000;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  std::vector<double> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i + 1);
    y[i] = z(rng);
  }
  double worst = 0.0;
  for (const auto& k : {Kernel::epanechnikov(), Kernel::gaussian()}) {
    MonitorConfig cfg;
    cfg.kernel = k;
    cfg.h = 150.0;
    cfg.c = 1e12;
    if (!k.compact())
      cfg.window = WindowPolicy::full_history();
    Monitor m(cfg);
    for (std::size_t i = 0; i < n; ++i) {
      const double streamed = m.step(t[i], y[i]).stat;
      double brute = 0.0;
      for (std::size_t j = 0; j <= i; ++j)
        brute += rescale_eval(k, cfg.h, t[j] - t[i]) * y[j];
      worst = std::max(worst, std::abs(streamed - brute));
    }
  }
  report(6, worst <= tol_streaming,
         "max |streaming - brute force| = " + fmt(worst) + " over 1e4 steps (tol " +
             fmt(tol_streaming) + ")");
}

double rk4_substrate(double t_end, double s0, double km, double vmax, double dt)
{
  auto f = [&](double s) { return -vmax * s / (km + s); };
  double s = s0;
  const auto steps = static_cast<int>(std::round(t_end / dt));
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(s);
    const double k2 = f(s + 0.5 * dt * k1);
    const double k3 = f(s + 0.5 * dt * k2);
    const double k4 = f(s + dt * k3);
    s += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return s;
}

void criterion_7()
{
  // log-spaced distance from the branch point, so the grid spans
  // [-1/e + 1e-6, 1e6]
  const long double branch = -1.0L / std::numbers::e_v<long double>;
  const long double lo = std::log10(1e-6L);
  const long double hi = std::log10(1e6L - branch);
  long double worst = 0.0L;
  for (int i = 0; i < 1000; ++i) {
    const long double x = branch + std::pow(10.0L, lo + (hi - lo) * i / 999.0L);
    const long double w = lambert_w(x);
    worst = std::max(worst, std::abs(w * std::exp(w) - x));
  }

  double sub = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.1 * i;
    sub = std::max(sub, std::abs(substrate(t, 1.0, 0.5, 0.3) - rk4_substrate(t, 1.0, 0.5, 0.3, 1e-3)));
  }
  report(7, worst <= tol_lambert_residual && sub <= tol_substrate,
         "max |W e^W - x| = " + fmt(static_cast<double>(worst)) + " (tol " +
             fmt(tol_lambert_residual) + "), substrate vs RK4 = " + fmt(sub) + " (tol " +
             fmt(tol_substrate) + ")");
}

void criterion_8()
{
  // lambda != 1 so the two substitution forms can be told apart
  const auto rep = w_antiderivative_check(1.0, std::numbers::e, 1.0, 2.0);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"identity", c.identity},
                      {"claimed", c.claimed},
                      {"reference", c.reference},
                      {"abs_error", c.abs_error},
                      {"holds", c.holds}});
  const nlohmann::json doc{{"a", rep.a},
                           {"b", rep.b},
                           {"d", rep.d},
                           {"lambda", rep.lambda},
                           {"tolerance", rep.tolerance},
                           {"ground_truth", "adaptive quadrature of the integrand"},
                           {"checks", checks}};
  const fs::path out = fs::path(KD_SOURCE_DIR) / "artifacts" / "w_antiderivative_report.json";
  fs::create_directories(out.parent_path());
  std::ofstream(out) << doc.dump(2) << '\n';

  // the report is trustworthy when the derived antiderivatives agree with
  // quadrature; the verdicts on the printed ones are what it records
  const bool ground_truth_ok = rep.tolerance == tol_w_identity &&
                               rep.find("derived_w_over_y").holds &&
                               rep.find("derived_w2_over_y").holds;
  std::string verdict;
  for (const char* id : {"quoted_w_over_y", "quoted_w2_over_y", "quoted_rhs1_as_w2_over_y",
                         "quoted_substitution", "scaled_substitution"}) {
    const auto& c = rep.find(id);
    verdict += std::string(verdict.empty() ? "" : ", ") + id + (c.holds ? " holds" : " fails") +
               " (err " + fmt(c.abs_error) + ")";
  }
  report(8, ground_truth_ok && fs::exists(out),
         verdict + "; written to artifacts/w_antiderivative_report.json");
}

void criterion_9()
{
  const auto t0 = std::chrono::steady_clock::now();
  const double T = 4.0;
  const auto lin = Alternative::truncated_linear(1.0, T);
  const auto pair = solve_optimal_pair(lin, 0.5);
  const double L = pair.kernel.lipschitz_const();
  const double C = pair.kernel.sup_bound();
  LpOptions opt;
  opt.grid_n = 256;

  std::vector<double> rhos;
  for (int i = 1; i <= 32; ++i)
    rhos.push_back(T * i / 32.0);
  const auto probes = lp_sweep(lin, rhos, L, C, opt);
  double worst_drop = 0.0;
  for (std::size_t i = 1; i < probes.size(); ++i)
    worst_drop = std::max(worst_drop, probes[i - 1].sup_value - probes[i].sup_value);

  const auto at_star = lp_oracle(lin, pair.rho_star, L, C, opt);
  const double secs = seconds_since(t0);
  const bool ok = worst_drop <= tol_lp_monotone &&
                  at_star.sup_value >= pair.attained - tol_lp_below_kstar &&
                  secs <= limit_lp_seconds;
  report(9, ok,
         "largest decrease over 32 rho = " + fmt(worst_drop) + ", sup(rho*) = " +
             fmt(at_star.sup_value) + " vs I(K*, rho*) = " + fmt(pair.attained) + ", " +
             fmt(secs) + " s");
}

void criterion_10()
{
  ScenarioSpec spec;
  spec.alternative = Alternative::truncated_linear(1.0, 4.0);
  spec.kernel = Kernel::gaussian();
  spec.c = 0.3;
  spec.design = TimeDesign::power(2.0);
  spec.h_values = {400.0};
  spec.horizon_factor = 4.0;
  spec.master_seed = 11;

  const double root =
      solve_rho0_design(spec.kernel, *spec.alternative, spec.c, spec.design).rho;

  spec.noise = NoiseModel::none();
  spec.replications = 1;
  const double noiseless = monte_carlo(spec).rows[0].median;

  spec.noise = NoiseModel::ar1(0.4, 1.0);
  spec.replications = 200;
  const double noisy = monte_carlo(spec).rows[0].median;

  const double e1 = std::abs(noiseless - root);
  const double e2 = std::abs(noisy - root);
  report(10, e1 <= tol_design_mc && e2 <= tol_design_mc,
         "root " + fmt(root) + ", median rho_h noiseless " + fmt(noiseless) + ", ar1 " +
             fmt(noisy) + " (tol " + fmt(tol_design_mc) + ")");
}

int run_kd(const std::string& command, const fs::path& config, const fs::path& out)
{
  const std::string cmd = std::string(KD_BINARY) + " " + command + " -c " + config.string() +
                          " -o " + out.string() + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// empty when both directories hold the same files with the same bytes
std::string compare_dirs(const fs::path& a, const fs::path& b)
{
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a))
    names.push_back(e.path().filename().string());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b))
    ++count_b;
  if (names.empty())
    return "no output files";
  if (names.size() != count_b)
    return "file sets differ";
  for (const auto& n : names)
    if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n))
      return n + " differs";
  return {};
}

void criterion_11()
{
  const std::vector<std::pair<std::string, std::string>> golden{
      {"solve_delay_step.ini", "solve-delay"},
      {"solve_delay_design.ini", "solve-delay"},
      {"optimal_linear.ini", "optimal-kernel"},
      {"optimal_exponential.ini", "optimal-kernel"},
      {"optimal_michaelis_menten.ini", "optimal-kernel"},
      {"monitor_step.ini", "monitor"},
      {"montecarlo_convergence.ini", "montecarlo"},
      {"montecarlo_design.ini", "montecarlo"},
      {"false_alarm.ini", "false-alarm"},
      {"calibrate.ini", "false-alarm"},
      {"select_kernel.ini", "select-kernel"},
      {"oracle.ini", "oracle"},
  };
  const fs::path root = fs::temp_directory_path() / "kd_acceptance_repro";
  fs::remove_all(root);
  std::string problems;
  for (const auto& [file, command] : golden) {
    const fs::path cfg = fs::path(KD_SOURCE_DIR) / "configs" / file;
    const fs::path first = root / (file + ".first");
    const fs::path second = root / (file + ".second");
    const fs::path echoed = root / (file + ".echoed");
    std::string why;
    if (run_kd(command, cfg, first) != 0 || run_kd(command, cfg, second) != 0)
      why = "nonzero exit";
    else if (run_kd(command, first / "config.ini", echoed) != 0)
      why = "nonzero exit on echoed config";
    else if (auto d = compare_dirs(first, second); !d.empty())
      why = "rerun: " + d;
    else if (auto e = compare_dirs(first, echoed); !e.empty())
      why = "echoed: " + e;
    if (!why.empty())
      problems += (problems.empty() ? "" : "; ") + file + " " + why;
  }
  report(11, problems.empty(),
         problems.empty() ? std::to_string(golden.size()) +
                                " commands byte-identical on rerun and on their echoed config"
                          : problems);
}

} // namespace

int main()
{
  guarded(1, criterion_1);
  guarded(2, criterion_2);
  guarded(3, criterion_3);
  guarded(4, criterion_4);
  guarded(5, criterion_5);
  guarded(6, criterion_6);
  guarded(7, criterion_7);
  guarded(8, criterion_8);
  guarded(9, criterion_9);
  guarded(10, criterion_10);
  guarded(11, criterion_11);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
