#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace kd::io {

//! Two-column numeric CSV: optional header line, '#' comment lines and blank
//! lines are skipped.  Throws ConfigError on malformed rows.
std::pair<std::vector<double>, std::vector<double>>
read_two_column_csv(const std::filesystem::path& path);

//! Shortest round-trip decimal representation of x.
std::string format_double(double x);

//! Writes text to path, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace kd::io
