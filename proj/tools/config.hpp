#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kd::cli {

//! Parses a finite number or throws ConfigError naming `where`.
double to_number(const std::string& where, const std::string& text);

//! Sectioned key = value document.  Sections and keys are checked against a
//! fixed schema; unknown ones are rejected.
class RunConfig
{
public:
  static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  //! "section.key=value"; the value replaces any earlier one.
  void apply_override(const std::string& assignment);
  void set(const std::string& section, const std::string& key, std::string value);
  void erase(const std::string& section, const std::string& key);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  double number(const std::string& section, const std::string& key, double fallback) const;
  std::optional<double> number(const std::string& section, const std::string& key) const;
  std::size_t count(const std::string& section, const std::string& key,
                    std::size_t fallback) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;
  std::vector<std::string> words(const std::string& section, const std::string& key) const;

  //! Canonical text: sections and keys sorted, paths absolute, the output
  //! directory left out.  Parsing it yields the same echo.
  std::string echo() const;
  const std::map<std::string, std::map<std::string, std::string>>& entries() const
  {
    return entries_;
  }

private:
  void check_key(const std::string& section, const std::string& key) const;

  std::map<std::string, std::map<std::string, std::string>> entries_;
  std::filesystem::path base_dir_;
};

} // namespace kd::cli
