#pragma once

#include "kd/kernel.hpp"

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace kd {

enum class Side
{
  two_sided,      // d = 1(|m| > c)
  one_sided_upper // d = 1(m > c)
};

std::string_view to_string(Side s);

struct WindowPolicy
{
  enum class Kind
  {
    //! support * h for compact kernels, integration_radius * h otherwise
    automatic,
    full_history,
    radius
  };
  Kind kind = Kind::automatic;
  double radius = 0.0; // time units, for Kind::radius

  static WindowPolicy automatic() { return {}; }
  static WindowPolicy full_history() { return {Kind::full_history, 0.0}; }
  static WindowPolicy fixed(double r) { return {Kind::radius, r}; }
};

struct MonitorConfig
{
  Kernel kernel = Kernel::gaussian();
  double h = 1.0;
  double c = 1.0;
  Side side = Side::two_sided;
  WindowPolicy window;
  //! Maximum number of observations a run looks at; none = all supplied.
  std::optional<std::size_t> horizon;
};

struct StreamState
{
  std::size_t n = 0;
  std::deque<double> times;  // retained window
  std::deque<double> values;
  double last_time = 0.0;
  double last_stat = 0.0;
  bool signaled = false;
  std::optional<std::size_t> stop_index; // N_h
  std::optional<double> stop_time;       // t_{N_h}
};

struct StepResult
{
  bool decision = false;
  double stat = 0.0;
};

//! Sequential Priestley-Chao smoother m_n = sum_i K_h(t_i - t_n) Y_i with the
//! decision rule on top.  Once it signals, the state is frozen.
class Monitor
{
public:
  //! Throws ConfigError when h or c is not positive, or when an explicit
  //! window is shorter than the rescaled support of a compact kernel.
  explicit Monitor(MonitorConfig config);

  //! Appends (t, y).  t must exceed the previous time (OrderingError).
  StepResult step(double t, double y);

  const StreamState& state() const { return state_; }
  const MonitorConfig& config() const { return config_; }
  //! Effective window radius in time units (+inf for full history).
  double window_radius() const { return radius_; }

private:
  double weight(double lag) const;

  MonitorConfig config_;
  StreamState state_;
  double radius_;
  bool integer_times_ = true;
  mutable std::vector<double> lag_weights_; // K_h(-lag) for integer lags
  mutable std::vector<char> lag_known_;
};

struct RunRecord
{
  std::optional<std::size_t> stop_index;
  std::optional<double> stop_time;
  double t_q = 0.0;
  double h = 0.0;
  //! max{N_h - t_q, 0} / h; empty when censored.
  std::optional<double> normed_delay;
  std::size_t observations = 0;
  std::vector<double> path; // statistic per step, when requested

  bool censored() const { return !stop_index.has_value(); }
};

//! Feeds a time-ordered stream into a fresh Monitor until it signals or the
//! horizon is reached.  t_q is used for scoring only.
RunRecord run(std::span<const double> times, std::span<const double> values,
              const MonitorConfig& config, double t_q, bool record_path = false);

//! max{stop_time - t_q, 0} / h
double normed_delay(double stop_time, double t_q, double h);

} // namespace kd
