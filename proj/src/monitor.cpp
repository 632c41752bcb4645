#include "kd/monitor.hpp"

#include "kd/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace kd {

std::string_view to_string(Side s)
{
  return s == Side::two_sided ? "two_sided" : "one_sided_upper";
}

Monitor::Monitor(MonitorConfig config) : config_(std::move(config))
{
  if (!(std::isfinite(config_.h) && config_.h > 0.0))
    throw ConfigError("monitor: bandwidth h must be positive");
  if (!(config_.c > 0.0))
    throw ConfigError("monitor: threshold c must be positive");
  const auto& k = config_.kernel;
  const double reach = (k.compact() ? k.support_radius() : k.integration_radius()) * config_.h;
  switch (config_.window.kind) {
  case WindowPolicy::Kind::automatic:
    // the slack keeps every dropped observation strictly outside the support
    radius_ = reach * (1.0 + 1e-12);
    break;
  case WindowPolicy::Kind::full_history:
    radius_ = std::numeric_limits<double>::infinity();
    break;
  case WindowPolicy::Kind::radius:
    radius_ = config_.window.radius;
    if (!(radius_ > 0.0))
      throw ConfigError("monitor: window radius must be positive");
    if (k.compact() && radius_ < reach)
      throw ConfigError("monitor: window radius " + std::to_string(radius_) +
                        " is shorter than the kernel reach " + std::to_string(reach));
    break;
  }
}

double Monitor::weight(double lag) const
{
  if (integer_times_ && lag < 1e7) {
    const auto i = static_cast<std::size_t>(lag);
    if (i >= lag_known_.size()) {
      lag_known_.resize(i + 1, 0);
      lag_weights_.resize(i + 1, 0.0);
    }
    if (!lag_known_[i]) {
      lag_weights_[i] = config_.kernel(-lag / config_.h) / config_.h;
      lag_known_[i] = 1;
    }
    return lag_weights_[i];
  }
  return config_.kernel(-lag / config_.h) / config_.h;
}

StepResult Monitor::step(double t, double y)
{
  if (state_.signaled)
    return {true, state_.last_stat};
  if (!std::isfinite(t) || !std::isfinite(y))
    throw ParameterError("monitor: non-finite observation");
  if (state_.n > 0 && !(t > state_.last_time))
    throw OrderingError("monitor: observation times must be strictly increasing");

  integer_times_ = integer_times_ && t == std::floor(t);
  ++state_.n;
  state_.last_time = t;
  state_.times.push_back(t);
  state_.values.push_back(y);
  while (t - state_.times.front() > radius_) {
    state_.times.pop_front();
    state_.values.pop_front();
  }

  double stat = 0.0;
  for (std::size_t i = 0; i < state_.times.size(); ++i)
    stat += weight(t - state_.times[i]) * state_.values[i];
  state_.last_stat = stat;

  const bool d = config_.side == Side::two_sided ? std::abs(stat) > config_.c
                                                 : stat > config_.c;
  if (d) {
    state_.signaled = true;
    state_.stop_index = state_.n;
    state_.stop_time = t;
  }
  return {d, stat};
}

double normed_delay(double stop_time, double t_q, double h)
{
  return std::max(stop_time - t_q, 0.0) / h;
}

RunRecord run(std::span<const double> times, std::span<const double> values,
              const MonitorConfig& config, double t_q, bool record_path)
{
  if (times.size() != values.size())
    throw ParameterError("run: times and values differ in length");
  Monitor m(config);
  RunRecord rec;
  rec.t_q = t_q;
  rec.h = config.h;
  const std::size_t n = std::min(times.size(), config.horizon.value_or(times.size()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = m.step(times[i], values[i]);
    ++rec.observations;
    if (record_path)
      rec.path.push_back(r.stat);
    if (r.decision)
      break;
  }
  const auto& s = m.state();
  if (s.signaled) {
    rec.stop_index = s.stop_index;
    rec.stop_time = s.stop_time;
    rec.normed_delay = normed_delay(*s.stop_time, t_q, config.h);
  }
  return rec;
}

} // namespace kd
