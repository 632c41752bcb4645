#include "kd/sim.hpp"

#include "kd/delay.hpp"
#include "kd/error.hpp"
#include "kd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace kd {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double drift(const ScenarioSpec& spec, double t, double t_q, double h)
{
  if (!spec.alternative || t < t_q)
    return 0.0;
  return (*spec.alternative)((t - t_q) / h);
}

Stream uniform_stream(const ScenarioSpec& spec, double h, std::size_t replication,
                      std::size_t horizon)
{
  Stream s;
  s.t_q = spec.t_q();
  const auto eps = gen_noise(spec.noise, horizon,
                             mix_seed(spec.master_seed, replication, StreamRole::noise));
  s.times.resize(horizon);
  s.values.resize(horizon);
  for (std::size_t i = 0; i < horizon; ++i) {
    const double t = static_cast<double>(i + 1);
    s.times[i] = t;
    s.values[i] = drift(spec, t, s.t_q, h) + eps(static_cast<Eigen::Index>(i));
  }
  return s;
}

MonitorConfig monitor_config(const ScenarioSpec& spec, double h, double c)
{
  MonitorConfig m;
  m.kernel = spec.kernel;
  m.h = h;
  m.c = c;
  m.side = spec.side;
  m.window = spec.window;
  return m;
}

bool decide(Side side, double stat, double c)
{
  return side == Side::two_sided ? std::abs(stat) > c : stat > c;
}

RunRecord run_design(const ScenarioSpec& spec, double h, std::size_t replication,
                     std::size_t horizon, double c)
{
  RunRecord rec;
  rec.t_q = spec.t_q();
  rec.h = h;
  const auto& k = spec.kernel;
  const double reach = (k.compact() ? k.support_radius() : k.integration_radius()) * h;
  for (std::size_t n = 1; n <= horizon; ++n) {
    const auto sample = make_design_sample(spec, h, replication, n);
    const double tn = static_cast<double>(n);
    double stat = 0.0;
    for (std::size_t i = 0; i < sample.times.size(); ++i) {
      if (tn - sample.times[i] > reach)
        continue;
      stat += rescale_eval(k, h, sample.times[i] - tn) * sample.values[i];
    }
    ++rec.observations;
    if (decide(spec.side, stat, c)) {
      rec.stop_index = n;
      rec.stop_time = tn;
      rec.normed_delay = normed_delay(tn, rec.t_q, h);
      break;
    }
  }
  return rec;
}

RunRecord run_with_horizon(const ScenarioSpec& spec, double h, std::size_t replication,
                           std::size_t horizon, double c)
{
  if (!spec.design.is_uniform())
    return run_design(spec, h, replication, horizon, c);
  const auto s = uniform_stream(spec, h, replication, horizon);
  return run(s.times, s.values, monitor_config(spec, h, c), s.t_q);
}

std::size_t zeta_horizon(double zeta, double h)
{
  const auto n = static_cast<std::size_t>(std::floor(zeta * h));
  if (n == 0)
    throw ParameterError("zeta * h must be at least one observation");
  return n;
}

} // namespace

void NoiseModel::validate() const
{
  switch (kind) {
  case Kind::none:
    return;
  case Kind::iid_gaussian:
    if (!(sigma >= 0.0 && std::isfinite(sigma)))
      throw ParameterError("noise: sigma must be nonnegative");
    return;
  case Kind::ar1:
    if (!(std::abs(phi) < 1.0))
      throw ParameterError("noise: AR(1) needs |phi| < 1");
    if (!(sigma >= 0.0 && std::isfinite(sigma)))
      throw ParameterError("noise: sigma must be nonnegative");
    return;
  case Kind::uniform_bounded:
    if (!(half_width >= 0.0 && std::isfinite(half_width)))
      throw ParameterError("noise: half_width must be nonnegative");
    return;
  }
}

std::string NoiseModel::name() const
{
  std::ostringstream os;
  os.precision(10);
  switch (kind) {
  case Kind::none:
    return "none";
  case Kind::iid_gaussian:
    os << "iid_gaussian(sigma=" << sigma << ")";
    break;
  case Kind::ar1:
    os << "ar1(phi=" << phi << ",sigma=" << sigma << ",burn_in=" << burn_in << ")";
    break;
  case Kind::uniform_bounded:
    os << "uniform_bounded(half_width=" << half_width << ")";
    break;
  }
  return os.str();
}

Eigen::VectorXd gen_noise(const NoiseModel& model, std::size_t n, std::uint64_t seed)
{
  model.validate();
  if (n == 0)
    throw ParameterError("gen_noise: n must be at least 1");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::mt19937_64 rng(seed);
  switch (model.kind) {
  case NoiseModel::Kind::none:
    break;
  case NoiseModel::Kind::iid_gaussian: {
    std::normal_distribution<double> z(0.0, 1.0);
    for (Eigen::Index i = 0; i < e.size(); ++i)
      e(i) = model.sigma * z(rng);
    break;
  }
  case NoiseModel::Kind::ar1: {
    std::normal_distribution<double> z(0.0, 1.0);
    double x = model.sigma / std::sqrt(1.0 - model.phi * model.phi) * z(rng);
    for (std::size_t i = 0; i < model.burn_in; ++i)
      x = model.phi * x + model.sigma * z(rng);
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      x = model.phi * x + model.sigma * z(rng);
      e(i) = x;
    }
    break;
  }
  case NoiseModel::Kind::uniform_bounded: {
    std::uniform_real_distribution<double> u(-model.half_width, model.half_width);
    for (Eigen::Index i = 0; i < e.size(); ++i)
      e(i) = u(rng);
    break;
  }
  }
  return e;
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index, StreamRole role)
{
  std::uint64_t x = splitmix64(master);
  x = splitmix64(x ^ index);
  return splitmix64(x ^ (static_cast<std::uint64_t>(role) * 0xd1b54a32d192ed03ULL));
}

void ScenarioSpec::validate() const
{
  noise.validate();
  if (h_values.empty())
    throw ParameterError("scenario: no bandwidths");
  for (double h : h_values)
    if (!(std::isfinite(h) && h > 0.0))
      throw ParameterError("scenario: bandwidths must be positive");
  if (!(c > 0.0))
    throw ParameterError("scenario: threshold c must be positive");
  if (!(t_q_star >= 0.0 && std::isfinite(t_q_star)))
    throw ParameterError("scenario: t_q* must be nonnegative");
  if (!(horizon_factor > 0.0))
    throw ParameterError("scenario: horizon_factor must be positive");
  if (replications < 1)
    throw ParameterError("scenario: replications must be at least 1");
  for (double h : h_values)
    if (!(static_cast<double>(horizon(h)) > t_q_star))
      throw ParameterError("scenario: horizon must exceed t_q*");
}

double ScenarioSpec::t_q() const { return std::floor(t_q_star) + 1.0; }

std::size_t ScenarioSpec::horizon(double h) const
{
  return static_cast<std::size_t>(std::ceil(t_q() + horizon_factor * h));
}

Stream make_observations(const ScenarioSpec& spec, double h, std::size_t replication)
{
  return uniform_stream(spec, h, replication, spec.horizon(h));
}

Stream make_design_sample(const ScenarioSpec& spec, double h,
                          std::size_t replication, std::size_t n)
{
  Stream s;
  s.t_q = spec.t_q();
  s.times = spec.design.sample_times(n);
  // stationary start, so no burn-in is needed for these short draws
  NoiseModel noise = spec.noise;
  noise.burn_in = 0;
  const auto seed = mix_seed(mix_seed(spec.master_seed, replication, StreamRole::design_noise),
                             n, StreamRole::design_noise);
  const auto eps = gen_noise(noise, n, seed);
  s.values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.values[i] = drift(spec, s.times[i], s.t_q, h) + eps(static_cast<Eigen::Index>(i));
  return s;
}

RunRecord run_replication(const ScenarioSpec& spec, double h, std::size_t replication)
{
  return run_with_horizon(spec, h, replication, spec.horizon(h), spec.c);
}

double quantile_sorted(const std::vector<double>& x, double p)
{
  if (x.empty())
    return nan;
  const double pos = (static_cast<double>(x.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= x.size())
    return x.back();
  return x[lo] + (pos - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

ExperimentSummary monte_carlo(const ScenarioSpec& spec)
{
  spec.validate();
  ExperimentSummary out;
  out.rho0 = nan;
  out.rho0_status = "in_control";
  if (spec.alternative) {
    const auto& m0 = *spec.alternative;
    out.outside_convergence_hypotheses = !m0.vanishes_at_origin();
    const auto sol = spec.design.is_uniform()
                         ? solve_rho0(spec.kernel, m0, spec.c)
                         : solve_rho0_design(spec.kernel, m0, spec.c, spec.design);
    out.rho0_status = std::string(to_string(sol.status));
    if (sol.status == DelayStatus::converged)
      out.rho0 = sol.rho;
  }

  for (double h : spec.h_values) {
    std::vector<RunRecord> recs(spec.replications);
    parallel_for(spec.replications,
                 [&](std::size_t r) { recs[r] = run_replication(spec, h, r); });
    SummaryRow row;
    row.h = h;
    row.replications = spec.replications;
    std::vector<double> abs_err;
    for (const auto& rec : recs) {
      if (rec.censored()) {
        ++row.censored;
        continue;
      }
      ++row.signaled;
      if (*rec.stop_time < rec.t_q)
        ++row.false_alarms;
      row.delays.push_back(*rec.normed_delay);
      abs_err.push_back(std::abs(*rec.normed_delay - out.rho0));
    }
    std::sort(row.delays.begin(), row.delays.end());
    std::sort(abs_err.begin(), abs_err.end());
    row.false_alarm_rate =
        static_cast<double>(row.false_alarms) / static_cast<double>(row.replications);
    if (row.delays.empty()) {
      row.mean = row.median = row.q10 = row.q90 = row.median_abs_error = nan;
    } else {
      double sum = 0.0;
      for (double d : row.delays)
        sum += d;
      row.mean = sum / static_cast<double>(row.delays.size());
      row.median = quantile_sorted(row.delays, 0.5);
      row.q10 = quantile_sorted(row.delays, 0.1);
      row.q90 = quantile_sorted(row.delays, 0.9);
      row.median_abs_error = std::isnan(out.rho0) ? nan : quantile_sorted(abs_err, 0.5);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<FalseAlarmRow> false_alarm_study(const ScenarioSpec& spec, double zeta)
{
  spec.validate();
  if (spec.alternative)
    throw ParameterError("false-alarm study needs an in-control scenario");
  if (!(zeta > 0.0))
    throw ParameterError("zeta must be positive");
  std::vector<FalseAlarmRow> rows;
  for (double h : spec.h_values) {
    FalseAlarmRow row;
    row.h = h;
    row.horizon = zeta_horizon(zeta, h);
    row.replications = spec.replications;
    std::vector<char> alarm(spec.replications, 0);
    parallel_for(spec.replications, [&](std::size_t r) {
      alarm[r] = !run_with_horizon(spec, h, r, row.horizon, spec.c).censored();
    });
    for (char a : alarm)
      row.alarms += a ? 1 : 0;
    const double n = static_cast<double>(row.replications);
    row.rate = static_cast<double>(row.alarms) / n;
    row.std_error = std::sqrt(row.rate * (1.0 - row.rate) / n);
    rows.push_back(row);
  }
  return rows;
}

Calibration calibrate_threshold(const ScenarioSpec& spec, double target, double zeta,
                                double c_lo, double c_hi)
{
  spec.validate();
  if (spec.alternative)
    throw ParameterError("calibration needs an in-control scenario");
  if (!(target > 0.0 && target <= 1.0))
    throw ParameterError("calibration target must lie in (0, 1]");
  if (!(c_lo >= 0.0 && c_hi > c_lo))
    throw ParameterError("calibration needs 0 <= c_lo < c_hi");
  if (!spec.design.is_uniform())
    throw ParameterError("calibration supports the uniform design only");
  const double h = spec.h_values.front();
  const std::size_t horizon = zeta_horizon(zeta, h);

  // the run alarms at threshold c iff its largest statistic exceeds c
  std::vector<double> peak(spec.replications, 0.0);
  parallel_for(spec.replications, [&](std::size_t r) {
    const auto s = uniform_stream(spec, h, r, horizon);
    Monitor m(monitor_config(spec, h, std::numeric_limits<double>::max()));
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < horizon; ++i) {
      const double st = m.step(s.times[i], s.values[i]).stat;
      best = std::max(best, spec.side == Side::two_sided ? std::abs(st) : st);
    }
    peak[r] = best;
  });
  const double n = static_cast<double>(spec.replications);
  auto rate = [&](double c) {
    std::size_t k = 0;
    for (double p : peak)
      k += p > c ? 1 : 0;
    return static_cast<double>(k) / n;
  };

  Calibration out;
  out.target = target;
  out.replications = spec.replications;
  out.std_error = std::sqrt(target * (1.0 - target) / n);
  if (rate(c_hi) > target)
    throw NoSolutionError("calibration: target unattainable, alarm rate at c = " +
                          std::to_string(c_hi) + " is " + std::to_string(rate(c_hi)));
  if (rate(c_lo) <= target) {
    out.c = c_lo;
    out.achieved_rate = rate(c_lo);
    return out;
  }
  double lo = c_lo, hi = c_hi;
  while (hi - lo > 1e-10 * std::max(1.0, hi) && out.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    ++out.iterations;
    if (rate(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  out.c = hi;
  out.achieved_rate = rate(hi);
  return out;
}

} // namespace kd
