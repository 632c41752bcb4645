#include "kd/io.hpp"

#include "kd/error.hpp"

#include <charconv>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kd::io {

namespace {

std::string_view trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_number(std::string_view s, double& out)
{
  s = trim(s);
  if (s.empty())
    return false;
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

} // namespace

std::pair<std::vector<double>, std::vector<double>>
read_two_column_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open CSV file " + path.string());
  std::vector<double> xs, ys;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#')
      continue;
    const auto comma = t.find(',');
    double x = 0.0, y = 0.0;
    const bool ok = comma != std::string_view::npos &&
                    t.find(',', comma + 1) == std::string_view::npos &&
                    parse_number(t.substr(0, comma), x) &&
                    parse_number(t.substr(comma + 1), y);
    if (!ok) {
      if (!seen_data) {
        seen_data = true; // header line
        continue;
      }
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected two numeric columns");
    }
    seen_data = true;
    if (!std::isfinite(x) || !std::isfinite(y))
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": non-finite value");
    xs.push_back(x);
    ys.push_back(y);
  }
  return {std::move(xs), std::move(ys)};
}

std::string format_double(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  out << text;
}

} // namespace kd::io
