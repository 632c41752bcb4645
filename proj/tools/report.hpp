#pragma once

#include "config.hpp"

#include "kd/delay.hpp"
#include "kd/monitor.hpp"
#include "kd/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kd::cli {

using nlohmann::json;

//! tool, version, command, seed and the config echo.
json envelope(const std::string& command, const RunConfig& cfg, std::uint64_t seed);

json to_json(const DelaySolution& s);
json to_json(const Kernel& k);
json to_json(const RunRecord& r);
json to_json(const SummaryRow& r);
json to_json(const FalseAlarmRow& r);
json to_json(const Calibration& c);
json to_json(const ReachableProbe& p);

//! CSV text with '# ' header lines carrying version, command, seed and the
//! config echo, then a header row and the data rows.
class CsvWriter
{
public:
  CsvWriter(const std::string& command, const RunConfig& cfg, std::uint64_t seed,
            const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  const std::string& text() const { return text_; }

private:
  std::string text_;
};

std::string kernel_table(const Kernel& k, const std::string& command,
                         const RunConfig& cfg, std::uint64_t seed,
                         std::size_t points = 2001);

} // namespace kd::cli
