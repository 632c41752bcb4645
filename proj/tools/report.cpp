#include "report.hpp"

#include "kd/io.hpp"
#include "kd/version.hpp"

#include <cmath>
#include <sstream>

namespace kd::cli {

namespace {

json num(double x)
{
  if (!std::isfinite(x))
    return nullptr;
  return x;
}

template <class T>
json opt(const std::optional<T>& v)
{
  if (!v)
    return nullptr;
  return *v;
}

} // namespace

json envelope(const std::string& command, const RunConfig& cfg, std::uint64_t seed)
{
  json config = json::object();
  for (const auto& [section, keys] : cfg.entries()) {
    if (section == "output" || keys.empty())
      continue;
    for (const auto& [k, v] : keys)
      config[section][k] = v;
  }
  return json{{"tool", "kd"},
              {"version", version},
              {"command", command},
              {"seed", seed},
              {"config", config}};
}

json to_json(const DelaySolution& s)
{
  return json{{"rho", num(s.rho)},
              {"psi_at_rho", num(s.psi_at_rho)},
              {"threshold", s.threshold},
              {"status", std::string(to_string(s.status))},
              {"bracket", {num(s.bracket.lo), num(s.bracket.hi)}},
              {"grid_step", s.grid_step},
              {"search_bound", s.search_bound},
              {"evaluations", s.evaluations}};
}

json to_json(const Kernel& k)
{
  return json{{"name", k.name()},
              {"lipschitz_const", k.lipschitz_const()},
              {"sup_bound", k.sup_bound()},
              {"support_radius", k.compact() ? json(k.support_radius()) : json("infinite")},
              {"subdensity", k.is_subdensity()}};
}

json to_json(const RunRecord& r)
{
  return json{{"stop_index", opt(r.stop_index)},
              {"stop_time", opt(r.stop_time)},
              {"censored", r.censored()},
              {"t_q", r.t_q},
              {"h", r.h},
              {"normed_delay", opt(r.normed_delay)},
              {"observations", r.observations}};
}

json to_json(const SummaryRow& r)
{
  return json{{"h", r.h},
              {"replications", r.replications},
              {"signaled", r.signaled},
              {"censored", r.censored},
              {"false_alarms", r.false_alarms},
              {"false_alarm_rate", r.false_alarm_rate},
              {"mean", num(r.mean)},
              {"median", num(r.median)},
              {"q10", num(r.q10)},
              {"q90", num(r.q90)},
              {"median_abs_error", num(r.median_abs_error)}};
}

json to_json(const FalseAlarmRow& r)
{
  return json{{"h", r.h},
              {"horizon", r.horizon},
              {"replications", r.replications},
              {"alarms", r.alarms},
              {"rate", r.rate},
              {"std_error", r.std_error}};
}

json to_json(const Calibration& c)
{
  return json{{"c", c.c},
              {"achieved_rate", c.achieved_rate},
              {"std_error", c.std_error},
              {"target", c.target},
              {"replications", c.replications},
              {"iterations", c.iterations}};
}

json to_json(const ReachableProbe& p)
{
  return json{{"rho", p.rho},
              {"sup_value", p.sup_value},
              {"grid_n", p.grid_n},
              {"extension_nodes", p.extension_nodes},
              {"max_support", p.max_support},
              {"lipschitz_const", p.lipschitz_const},
              {"sup_bound", p.sup_bound},
              {"pivots", p.pivots}};
}

CsvWriter::CsvWriter(const std::string& command, const RunConfig& cfg,
                     std::uint64_t seed, const std::vector<std::string>& columns)
{
  std::ostringstream os;
  os << "# kd " << version << ' ' << command << '\n';
  os << "# seed: " << seed << '\n';
  std::istringstream echo(cfg.echo());
  std::string line;
  while (std::getline(echo, line))
    if (!line.empty())
      os << "# " << line << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i)
    os << (i ? "," : "") << columns[i];
  os << '\n';
  text_ = os.str();
}

void CsvWriter::row(const std::vector<double>& values)
{
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i)
      text_ += ',';
    text_ += io::format_double(values[i]);
  }
  text_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells)
{
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i)
      text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

std::string kernel_table(const Kernel& k, const std::string& command,
                         const RunConfig& cfg, std::uint64_t seed, std::size_t points)
{
  CsvWriter csv(command, cfg, seed, {"z", "K"});
  const double r = k.compact() ? k.support_radius() : k.integration_radius();
  for (std::size_t i = 0; i < points; ++i) {
    const double z = -r + 2.0 * r * static_cast<double>(i) / static_cast<double>(points - 1);
    csv.row(std::vector<double>{z, k(z)});
  }
  return csv.text();
}

} // namespace kd::cli
