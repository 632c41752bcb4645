#include "commands.hpp"

#include "report.hpp"

#include "kd/error.hpp"
#include "kd/io.hpp"

#include <cmath>
#include <iostream>

namespace kd::cli {

namespace {

double required(const RunConfig& cfg, const std::string& section, const std::string& key)
{
  const auto v = cfg.number(section, key);
  if (!v)
    throw ConfigError("missing " + section + "." + key);
  return *v;
}

std::string required_text(const RunConfig& cfg, const std::string& section,
                          const std::string& key)
{
  const auto v = cfg.get(section, key);
  if (!v || v->empty())
    throw ConfigError("missing " + section + "." + key);
  return *v;
}

Alternative need_alternative(const RunConfig& cfg, const std::string& command)
{
  auto m0 = build_alternative(cfg);
  if (!m0)
    throw ConfigError(command + " needs an [alternative] section with a type");
  return std::move(*m0);
}

double threshold(const RunConfig& cfg) { return required(cfg, "detector", "c"); }

OptimalKernelOptions optimal_options(const RunConfig& cfg)
{
  OptimalKernelOptions o;
  const auto tail = cfg.get_or("kernel", "tail", "lipschitz-bump");
  if (tail == "none")
    o.tail = TailPolicy::none;
  else if (tail != "lipschitz-bump")
    throw ConfigError("kernel.tail must be lipschitz-bump or none");
  o.lipschitz_const = cfg.number("kernel", "lipschitz");
  o.sup_bound = cfg.number("kernel", "sup_bound");
  return o;
}

class Sink
{
public:
  Sink(const Output& out, const RunConfig& cfg) : out_(out), cfg_(cfg) {}

  void primary(const std::string& name, const json& j)
  {
    const std::string text = j.dump(2) + "\n";
    if (out_.to_stdout)
      std::cout << text;
    else
      file(name, text);
  }

  void file(const std::string& name, const std::string& text)
  {
    if (!out_.to_stdout)
      io::write_text(out_.dir / name, text);
  }

  void finish()
  {
    file("config.ini", cfg_.echo());
  }

private:
  const Output& out_;
  const RunConfig& cfg_;
};

} // namespace

std::uint64_t seed_of(const RunConfig& cfg)
{
  return static_cast<std::uint64_t>(cfg.count("study", "seed", 1));
}

std::optional<Alternative> build_alternative(const RunConfig& cfg)
{
  const auto type = cfg.get_or("alternative", "type", "none");
  std::optional<Alternative> m0;
  const std::string s = "alternative";
  if (type == "none")
    return std::nullopt;
  if (type == "step")
    m0 = Alternative::step(cfg.number(s, "level", 1.0));
  else if (type == "truncated_linear")
    m0 = Alternative::truncated_linear(required(cfg, s, "slope"), required(cfg, s, "horizon"));
  else if (type == "truncated_exponential")
    m0 = Alternative::truncated_exponential(required(cfg, s, "rate"),
                                            required(cfg, s, "horizon"));
  else if (type == "michaelis_menten")
    m0 = Alternative::michaelis_menten(required(cfg, s, "s0"), required(cfg, s, "km"),
                                       required(cfg, s, "vmax"), required(cfg, s, "horizon"));
  else if (type == "tabulated")
    m0 = load_tabulated_alternative(required_text(cfg, s, "file"));
  else
    throw ConfigError("unknown alternative.type '" + type + "'");
  const double scale = cfg.number(s, "scale", 1.0);
  if (scale != 1.0)
    m0 = m0->scaled(scale);
  return m0;
}

Kernel kernel_from_name(const std::string& name, const RunConfig& cfg)
{
  const auto colon = name.find(':');
  const std::string base = name.substr(0, colon);
  if (base == "gaussian")
    return Kernel::gaussian();
  if (base == "epanechnikov")
    return Kernel::epanechnikov();
  if (base == "triangular")
    return Kernel::triangular();
  if (base == "laplace") {
    double rate = cfg.number("kernel", "rate", 1.0);
    if (colon != std::string::npos)
      rate = to_number("kernel " + name, name.substr(colon + 1));
    return Kernel::laplace(rate);
  }
  if (base == "tabulated")
    return load_tabulated_kernel(required_text(cfg, "kernel", "file"),
                                 required(cfg, "kernel", "lipschitz"),
                                 required(cfg, "kernel", "sup_bound"));
  if (base == "optimal") {
    const auto m0 = need_alternative(cfg, "the optimal kernel");
    return solve_optimal_pair(m0, threshold(cfg), build_solver(cfg), optimal_options(cfg))
        .kernel;
  }
  throw ConfigError("unknown kernel '" + name + "'");
}

Kernel build_kernel(const RunConfig& cfg)
{
  return kernel_from_name(cfg.get_or("kernel", "type", "gaussian"), cfg);
}

TimeDesign build_design(const RunConfig& cfg)
{
  const auto type = cfg.get_or("design", "type", "uniform");
  if (type == "uniform")
    return TimeDesign::uniform();
  if (type == "power")
    return TimeDesign::power(required(cfg, "design", "exponent"));
  if (type == "tabulated")
    return load_tabulated_design(required_text(cfg, "design", "file"));
  throw ConfigError("unknown design.type '" + type + "'");
}

DesignLimit build_design_limit(const RunConfig& cfg)
{
  const auto v = cfg.get_or("design", "limit", "scaled");
  if (v == "scaled")
    return DesignLimit::scaled;
  if (v == "printed")
    return DesignLimit::printed;
  throw ConfigError("design.limit must be scaled or printed");
}

NoiseModel build_noise(const RunConfig& cfg)
{
  const auto type = cfg.get_or("noise", "type", "iid_gaussian");
  NoiseModel m;
  if (type == "none")
    m = NoiseModel::none();
  else if (type == "iid_gaussian")
    m = NoiseModel::iid_gaussian(cfg.number("noise", "sigma", 1.0));
  else if (type == "ar1")
    m = NoiseModel::ar1(required(cfg, "noise", "phi"), cfg.number("noise", "sigma", 1.0),
                        cfg.count("noise", "burn_in", 10000));
  else if (type == "uniform_bounded")
    m = NoiseModel::uniform_bounded(cfg.number("noise", "half_width", 1.0));
  else
    throw ConfigError("unknown noise.type '" + type + "'");
  m.validate();
  return m;
}

SolverOptions build_solver(const RunConfig& cfg)
{
  SolverOptions o;
  o.search_bound = cfg.number("solver", "search_bound");
  o.grid_step = cfg.number("solver", "grid_step");
  o.tolerance = cfg.number("solver", "tolerance", 1e-10);
  return o;
}

namespace {

Side build_side(const RunConfig& cfg)
{
  const auto v = cfg.get_or("detector", "side", "two_sided");
  if (v == "two_sided")
    return Side::two_sided;
  if (v == "one_sided_upper")
    return Side::one_sided_upper;
  throw ConfigError("detector.side must be two_sided or one_sided_upper");
}

WindowPolicy build_window(const RunConfig& cfg)
{
  const auto v = cfg.get_or("detector", "window", "auto");
  if (v == "auto")
    return WindowPolicy::automatic();
  if (v == "full")
    return WindowPolicy::full_history();
  return WindowPolicy::fixed(required(cfg, "detector", "window"));
}

std::vector<double> bandwidths(const RunConfig& cfg)
{
  auto h = cfg.numbers("detector", "h");
  if (h.empty())
    h.push_back(100.0);
  return h;
}

} // namespace

ScenarioSpec build_scenario(const RunConfig& cfg)
{
  ScenarioSpec s;
  s.noise = build_noise(cfg);
  s.alternative = build_alternative(cfg);
  s.t_q_star = cfg.number("detector", "t_q_star", 0.0);
  s.h_values = bandwidths(cfg);
  s.kernel = build_kernel(cfg);
  s.c = threshold(cfg);
  s.side = build_side(cfg);
  s.window = build_window(cfg);
  s.horizon_factor = cfg.number("study", "horizon_factor", 8.0);
  s.design = build_design(cfg);
  s.replications = cfg.count("study", "replications", 100);
  s.master_seed = seed_of(cfg);
  s.validate();
  return s;
}

int cmd_solve_delay(const RunConfig& cfg, const Output& out)
{
  const auto m0 = need_alternative(cfg, "solve-delay");
  const auto k = build_kernel(cfg);
  const auto design = build_design(cfg);
  const double c = threshold(cfg);
  const auto limit = build_design_limit(cfg);
  const auto sol = design.is_uniform()
                       ? solve_rho0(k, m0, c, build_solver(cfg))
                       : solve_rho0_design(k, m0, c, design, build_solver(cfg), limit);
  auto j = envelope("solve-delay", cfg, seed_of(cfg));
  j["kernel"] = to_json(k);
  j["alternative"] = m0.name();
  j["design"] = design.name();
  if (!design.is_uniform())
    j["design_limit"] = limit == DesignLimit::scaled ? "scaled" : "printed";
  j["result"] = to_json(sol);
  Sink sink(out, cfg);
  sink.primary("delay.json", j);
  sink.finish();
  if (sol.status != DelayStatus::converged) {
    std::cerr << "kd: no crossing of c = " << c << " on [0, " << sol.search_bound
              << "] (" << to_string(sol.status) << ")\n";
    return exit_no_solution;
  }
  return exit_ok;
}

int cmd_optimal_kernel(const RunConfig& cfg, const Output& out)
{
  const auto m0 = need_alternative(cfg, "optimal-kernel");
  const double c = threshold(cfg);
  const auto pair = solve_optimal_pair(m0, c, build_solver(cfg), optimal_options(cfg));
  auto j = envelope("optimal-kernel", cfg, seed_of(cfg));
  j["alternative"] = m0.name();
  j["rho_star"] = pair.rho_star;
  j["attained"] = pair.attained;
  j["self_consistency_error"] = std::abs(pair.attained - c);
  j["kernel"] = to_json(pair.kernel);
  j["solution"] = to_json(pair.solution);
  Sink sink(out, cfg);
  sink.primary("optimal_pair.json", j);
  sink.file("kernel.csv", kernel_table(pair.kernel, "optimal-kernel", cfg, seed_of(cfg)));
  sink.finish();
  return exit_ok;
}

int cmd_monitor(const RunConfig& cfg, const Output& out)
{
  const auto input = required_text(cfg, "monitor", "input");
  const auto [times, values] = io::read_two_column_csv(input);
  MonitorConfig mc;
  mc.kernel = build_kernel(cfg);
  mc.h = bandwidths(cfg).front();
  mc.c = threshold(cfg);
  mc.side = build_side(cfg);
  mc.window = build_window(cfg);
  if (cfg.has("monitor", "horizon"))
    mc.horizon = cfg.count("monitor", "horizon", 0);
  const double t_q = cfg.number(
      "monitor", "t_q", std::floor(cfg.number("detector", "t_q_star", 0.0)) + 1.0);
  const bool record_path = cfg.flag("monitor", "record_path", false);
  const auto rec = run(times, values, mc, t_q, record_path);

  auto j = envelope("monitor", cfg, seed_of(cfg));
  j["kernel"] = to_json(mc.kernel);
  j["record"] = to_json(rec);
  Sink sink(out, cfg);
  if (out.to_stdout)
    std::cout << j.dump() << '\n';
  else
    sink.file("runs.jsonl", j.dump() + "\n");
  if (record_path) {
    CsvWriter csv("monitor", cfg, seed_of(cfg), {"n", "time", "value", "stat"});
    for (std::size_t i = 0; i < rec.path.size(); ++i)
      csv.row(std::vector<double>{static_cast<double>(i + 1), times[i], values[i],
                                  rec.path[i]});
    sink.file("path.csv", csv.text());
  }
  sink.finish();
  return exit_ok;
}

int cmd_montecarlo(const RunConfig& cfg, const Output& out)
{
  const auto spec = build_scenario(cfg);
  const auto summary = monte_carlo(spec);
  auto j = envelope("montecarlo", cfg, spec.master_seed);
  j["kernel"] = to_json(spec.kernel);
  j["alternative"] = spec.alternative ? json(spec.alternative->name()) : json(nullptr);
  j["noise"] = spec.noise.name();
  j["design"] = spec.design.name();
  j["rho0"] = std::isfinite(summary.rho0) ? json(summary.rho0) : json(nullptr);
  j["rho0_status"] = summary.rho0_status;
  j["outside_convergence_hypotheses"] = summary.outside_convergence_hypotheses;
  j["rows"] = json::array();
  CsvWriter csv("montecarlo", cfg, spec.master_seed,
                {"h", "replications", "signaled", "censored", "false_alarms",
                 "false_alarm_rate", "mean", "median", "q10", "q90", "median_abs_error",
                 "rho0"});
  for (const auto& r : summary.rows) {
    j["rows"].push_back(to_json(r));
    csv.row(std::vector<double>{r.h, static_cast<double>(r.replications),
                                static_cast<double>(r.signaled),
                                static_cast<double>(r.censored),
                                static_cast<double>(r.false_alarms), r.false_alarm_rate,
                                r.mean, r.median, r.q10, r.q90, r.median_abs_error,
                                summary.rho0});
  }
  Sink sink(out, cfg);
  sink.primary("summary.json", j);
  sink.file("summary.csv", csv.text());
  sink.finish();
  return exit_ok;
}

int cmd_false_alarm(const RunConfig& cfg, const Output& out)
{
  if (build_alternative(cfg))
    throw ConfigError("false-alarm runs in-control streams; drop the [alternative] section");
  const auto spec = build_scenario(cfg);
  const double zeta = cfg.number("study", "zeta", 2.0);
  const auto rows = false_alarm_study(spec, zeta);
  auto j = envelope("false-alarm", cfg, spec.master_seed);
  j["kernel"] = to_json(spec.kernel);
  j["noise"] = spec.noise.name();
  j["zeta"] = zeta;
  j["rows"] = json::array();
  CsvWriter csv("false-alarm", cfg, spec.master_seed,
                {"h", "horizon", "replications", "alarms", "rate", "std_error"});
  for (const auto& r : rows) {
    j["rows"].push_back(to_json(r));
    csv.row(std::vector<double>{r.h, static_cast<double>(r.horizon),
                                static_cast<double>(r.replications),
                                static_cast<double>(r.alarms), r.rate, r.std_error});
  }
  if (const auto target = cfg.number("study", "target")) {
    const auto cal = calibrate_threshold(spec, *target, zeta,
                                         cfg.number("study", "c_lo", 0.0),
                                         cfg.number("study", "c_hi", 10.0));
    j["calibration"] = to_json(cal);
    j["calibration"]["h"] = spec.h_values.front();
  }
  Sink sink(out, cfg);
  sink.primary("false_alarm.json", j);
  sink.file("false_alarm.csv", csv.text());
  sink.finish();
  return exit_ok;
}

int cmd_select_kernel(const RunConfig& cfg, const Output& out)
{
  const auto m0 = need_alternative(cfg, "select-kernel");
  auto names = cfg.words("select", "candidates");
  if (names.empty())
    names = {"gaussian", "optimal"};
  std::vector<Kernel> kernels;
  for (const auto& n : names)
    kernels.push_back(kernel_from_name(n, cfg));
  const auto sel = select_kernel(kernels, m0, threshold(cfg), build_solver(cfg));
  auto j = envelope("select-kernel", cfg, seed_of(cfg));
  j["alternative"] = m0.name();
  j["candidates"] = json::array();
  for (std::size_t i = 0; i < kernels.size(); ++i)
    j["candidates"].push_back(
        {{"spec", names[i]}, {"kernel", to_json(kernels[i])}, {"solution", to_json(sel.solutions[i])}});
  j["selected_index"] = sel.index;
  j["selected"] = names[sel.index];
  Sink sink(out, cfg);
  sink.primary("selection.json", j);
  sink.finish();
  return exit_ok;
}

int cmd_oracle(const RunConfig& cfg, const Output& out)
{
  const auto m0 = need_alternative(cfg, "oracle");
  const double c = threshold(cfg);
  const auto pair = solve_optimal_pair(m0, c, build_solver(cfg), optimal_options(cfg));
  const double lip = cfg.number("oracle", "lipschitz", pair.kernel.lipschitz_const());
  const double sup = cfg.number("oracle", "sup_bound", pair.kernel.sup_bound());
  LpOptions lo;
  lo.grid_n = cfg.count("oracle", "grid_n", 256);
  lo.extension_nodes = cfg.count("oracle", "extension_nodes", 64);
  lo.max_support = cfg.number("oracle", "max_support");
  const double rho = cfg.number("oracle", "rho", pair.rho_star);

  const auto probe = lp_oracle(m0, rho, lip, sup, lo);
  auto j = envelope("oracle", cfg, seed_of(cfg));
  j["alternative"] = m0.name();
  j["rho_star"] = pair.rho_star;
  j["optimal_kernel"] = to_json(pair.kernel);
  j["probe"] = to_json(probe);
  j["optimal_kernel_value"] = psi(pair.kernel, m0, rho);
  j["optimal_kernel_grid_value"] = lp_objective(pair.kernel, m0, rho, lo.grid_n);
  j["excess_over_optimal_kernel"] = probe.sup_value - psi(pair.kernel, m0, rho);

  Sink sink(out, cfg);
  if (const auto grid = cfg.get("oracle", "rho_grid")) {
    std::vector<double> parts;
    std::size_t from = 0;
    for (;;) {
      const auto colon = grid->find(':', from);
      parts.push_back(to_number("oracle.rho_grid", grid->substr(from, colon - from)));
      if (colon == std::string::npos)
        break;
      from = colon + 1;
    }
    if (parts.size() != 3 || !(parts[2] >= 2.0) || parts[2] != std::floor(parts[2]) ||
        !(parts[1] > parts[0]) || !(parts[0] > 0.0))
      throw ConfigError("oracle.rho_grid must be start:stop:count with 0 < start < stop");
    const auto n = static_cast<std::size_t>(parts[2]);
    std::vector<double> rhos(n);
    for (std::size_t i = 0; i < n; ++i)
      rhos[i] = parts[0] + (parts[1] - parts[0]) * static_cast<double>(i) /
                               static_cast<double>(n - 1);
    const auto sweep = lp_sweep(m0, rhos, lip, sup, lo);
    CsvWriter csv("oracle", cfg, seed_of(cfg), {"rho", "sup_value"});
    bool monotone = true;
    j["sweep"] = json::array();
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      csv.row(std::vector<double>{sweep[i].rho, sweep[i].sup_value});
      j["sweep"].push_back({{"rho", sweep[i].rho}, {"sup_value", sweep[i].sup_value}});
      if (i > 0 && sweep[i].sup_value < sweep[i - 1].sup_value - 1e-9)
        monotone = false;
    }
    j["sweep_nondecreasing"] = monotone;
    sink.file("oracle_sweep.csv", csv.text());
  }
  sink.primary("oracle.json", j);
  sink.file("oracle_kernel.csv", kernel_table(probe.argmax_kernel, "oracle", cfg, seed_of(cfg)));
  sink.finish();
  return exit_ok;
}

int dispatch(const std::string& command, const RunConfig& cfg, const Output& out)
{
  try {
    if (command == "solve-delay")
      return cmd_solve_delay(cfg, out);
    if (command == "optimal-kernel")
      return cmd_optimal_kernel(cfg, out);
    if (command == "monitor")
      return cmd_monitor(cfg, out);
    if (command == "montecarlo")
      return cmd_montecarlo(cfg, out);
    if (command == "false-alarm")
      return cmd_false_alarm(cfg, out);
    if (command == "select-kernel")
      return cmd_select_kernel(cfg, out);
    if (command == "oracle")
      return cmd_oracle(cfg, out);
    std::cerr << "kd: unknown command " << command << '\n';
    return exit_config;
  } catch (const NoSolutionError& e) {
    std::cerr << "kd: " << e.what() << '\n';
    return exit_no_solution;
  } catch (const InfeasibleError& e) {
    std::cerr << "kd: " << e.what() << '\n';
    return exit_no_solution;
  } catch (const NumericalError& e) {
    std::cerr << "kd: numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const DomainError& e) {
    std::cerr << "kd: numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const Error& e) {
    // configuration, parameter, construction and ordering errors
    std::cerr << "kd: " << e.what() << '\n';
    return exit_config;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "kd: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "kd: unexpected failure: " << e.what() << '\n';
    return exit_numerical;
  }
}

} // namespace kd::cli
