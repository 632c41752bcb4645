#include "config.hpp"

#include "kd/error.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace kd::cli {

namespace {

const std::map<std::string, std::set<std::string>>& schema()
{
  static const std::map<std::string, std::set<std::string>> s{
      {"kernel", {"type", "rate", "file", "lipschitz", "sup_bound", "tail"}},
      {"alternative",
       {"type", "level", "slope", "rate", "horizon", "s0", "km", "vmax", "file", "scale"}},
      {"detector", {"c", "h", "side", "window", "t_q_star"}},
      {"design", {"type", "exponent", "file", "limit"}},
      {"noise", {"type", "sigma", "phi", "burn_in", "half_width"}},
      {"solver", {"search_bound", "grid_step", "tolerance"}},
      {"study",
       {"replications", "seed", "horizon_factor", "zeta", "target", "c_lo", "c_hi"}},
      {"select", {"candidates"}},
      {"oracle",
       {"rho", "rho_grid", "grid_n", "extension_nodes", "max_support", "lipschitz",
        "sup_bound"}},
      {"monitor", {"input", "t_q", "record_path", "horizon"}},
      {"output", {"dir"}},
  };
  return s;
}

bool is_path_key(const std::string& section, const std::string& key)
{
  return key == "file" || (section == "monitor" && key == "input") ||
         (section == "output" && key == "dir");
}

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    out.push_back(trim(item));
  return out;
}

} // namespace

double to_number(const std::string& where, const std::string& text)
{
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  return v;
}

void RunConfig::check_key(const std::string& section, const std::string& key) const
{
  const auto it = schema().find(section);
  if (it == schema().end())
    throw ConfigError("unknown section [" + section + "]");
  if (!it->second.contains(key))
    throw ConfigError("unknown key '" + key + "' in [" + section + "]");
}

RunConfig RunConfig::parse(const std::string& text, const std::filesystem::path& base_dir)
{
  RunConfig cfg;
  cfg.base_dir_ = base_dir;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';')
      continue;
    const std::string where = "line " + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(where + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!schema().contains(section))
        throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    if (section.empty())
      throw ConfigError(where + ": key outside of any section");
    const std::string key = trim(t.substr(0, eq));
    if (cfg.has(section, key))
      throw ConfigError(where + ": duplicate key '" + key + "'");
    cfg.check_key(section, key);
    cfg.set(section, key, trim(t.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), std::filesystem::absolute(path).parent_path());
}

void RunConfig::apply_override(const std::string& assignment)
{
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  const std::string section = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  check_key(section, key);
  const auto saved = base_dir_;
  base_dir_ = std::filesystem::current_path();
  set(section, key, trim(assignment.substr(eq + 1)));
  base_dir_ = saved;
}

void RunConfig::set(const std::string& section, const std::string& key, std::string value)
{
  check_key(section, key);
  if (is_path_key(section, key) && !value.empty()) {
    std::filesystem::path p(value);
    if (p.is_relative())
      p = base_dir_.empty() ? std::filesystem::absolute(p) : base_dir_ / p;
    value = p.lexically_normal().string();
  }
  entries_[section][key] = std::move(value);
}

void RunConfig::erase(const std::string& section, const std::string& key)
{
  auto it = entries_.find(section);
  if (it != entries_.end())
    it->second.erase(key);
}

bool RunConfig::has(const std::string& section, const std::string& key) const
{
  auto it = entries_.find(section);
  return it != entries_.end() && it->second.contains(key);
}

std::optional<std::string> RunConfig::get(const std::string& section,
                                          const std::string& key) const
{
  auto it = entries_.find(section);
  if (it == entries_.end())
    return std::nullopt;
  auto kt = it->second.find(key);
  if (kt == it->second.end())
    return std::nullopt;
  return kt->second;
}

std::string RunConfig::get_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const
{
  return get(section, key).value_or(fallback);
}

std::optional<double> RunConfig::number(const std::string& section,
                                        const std::string& key) const
{
  const auto v = get(section, key);
  if (!v)
    return std::nullopt;
  return to_number(section + "." + key, *v);
}

double RunConfig::number(const std::string& section, const std::string& key,
                         double fallback) const
{
  return number(section, key).value_or(fallback);
}

std::size_t RunConfig::count(const std::string& section, const std::string& key,
                             std::size_t fallback) const
{
  const auto v = get(section, key);
  if (!v)
    return fallback;
  const std::string t = trim(*v);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(section + "." + key + ": expected a nonnegative integer, got '" +
                      *v + "'");
  return static_cast<std::size_t>(std::stoull(t));
}

bool RunConfig::flag(const std::string& section, const std::string& key,
                     bool fallback) const
{
  const auto v = get(section, key);
  if (!v)
    return fallback;
  if (*v == "true" || *v == "1" || *v == "yes")
    return true;
  if (*v == "false" || *v == "0" || *v == "no")
    return false;
  throw ConfigError(section + "." + key + ": expected true or false, got '" + *v + "'");
}

std::vector<double> RunConfig::numbers(const std::string& section,
                                       const std::string& key) const
{
  std::vector<double> out;
  const auto v = get(section, key);
  if (!v)
    return out;
  for (const auto& item : split(*v, ','))
    out.push_back(to_number(section + "." + key, item));
  return out;
}

std::vector<std::string> RunConfig::words(const std::string& section,
                                          const std::string& key) const
{
  const auto v = get(section, key);
  if (!v)
    return {};
  auto out = split(*v, ',');
  for (const auto& w : out)
    if (w.empty())
      throw ConfigError(section + "." + key + ": empty list item");
  return out;
}

std::string RunConfig::echo() const
{
  std::ostringstream os;
  bool first = true;
  for (const auto& [section, keys] : entries_) {
    if (section == "output" || keys.empty())
      continue;
    if (!first)
      os << '\n';
    first = false;
    os << '[' << section << "]\n";
    for (const auto& [k, v] : keys)
      os << k << " = " << v << '\n';
  }
  return os.str();
}

} // namespace kd::cli
