#include "kd/delay.hpp"
#include "kd/error.hpp"
#include "kd/monitor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace kd;

namespace {

MonitorConfig config(Kernel k, double h, double c, Side side = Side::two_sided)
{
  MonitorConfig cfg;
  cfg.kernel = std::move(k);
  cfg.h = h;
  cfg.c = c;
  cfg.side = side;
  return cfg;
}

double brute_force(const std::vector<double>& t, const std::vector<double>& y,
                   std::size_t n, const Kernel& k, double h)
{
  double s = 0.0;
  for (std::size_t i = 0; i <= n; ++i)
    s += rescale_eval(k, h, t[i] - t[n]) * y[i];
  return s;
}

struct Drift
{
  std::vector<double> t, y;
};

Drift noiseless(const Alternative& m0, double h, double t_q, std::size_t n)
{
  Drift d;
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i);
    d.t.push_back(t);
    d.y.push_back(t >= t_q ? m0((t - t_q) / h) : 0.0);
  }
  return d;
}

} // namespace

TEST(Monitor, SingleTermExample)
{
  Monitor m(config(Kernel::gaussian(), 5.0, 10.0));
  const auto r = m.step(1.0, 2.0);
  EXPECT_NEAR(r.stat, 0.3989422804014327 / 5.0 * 2.0, 1e-15);
  EXPECT_FALSE(r.decision);
}

TEST(Monitor, OldObservationOutsideSupportContributesNothing)
{
  Monitor m(config(Kernel::epanechnikov(), 10.0, 10.0));
  m.step(0.0, 100.0);
  EXPECT_EQ(m.step(12.0, 0.0).stat, 0.0);
  EXPECT_EQ(m.state().times.size(), 1u);
}

TEST(Monitor, StreamingMatchesBruteForce)
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> t, y;
  double now = 0.0;
  for (int i = 0; i < 3000; ++i) {
    now += 0.25 + std::abs(z(rng));
    t.push_back(now);
    y.push_back(z(rng));
  }
  for (const auto& k : {Kernel::epanechnikov(), Kernel::gaussian()}) {
    auto cfg = config(k, 25.0, 1e9);
    if (!k.compact())
      cfg.window = WindowPolicy::full_history();
    Monitor m(cfg);
    double worst = 0.0;
    for (std::size_t n = 0; n < t.size(); ++n)
      worst = std::max(worst, std::abs(m.step(t[n], y[n]).stat - brute_force(t, y, n, k, 25.0)));
    EXPECT_LE(worst, 1e-12) << k.name();
  }
}

TEST(Monitor, ZeroStreamNeverSignals)
{
  Monitor m(config(Kernel::gaussian(), 10.0, 0.1));
  for (int i = 1; i <= 500; ++i)
    EXPECT_FALSE(m.step(i, 0.0).decision);
  const std::vector<double> t{1, 2, 3}, y{0, 0, 0};
  const auto rec = run(t, y, config(Kernel::gaussian(), 10.0, 0.1), 1.0);
  EXPECT_TRUE(rec.censored());
  EXPECT_FALSE(rec.normed_delay.has_value());
  EXPECT_EQ(rec.observations, 3u);
}

TEST(Monitor, Sidedness)
{
  const double k0 = Kernel::gaussian()(0.0);
  const double c = 0.5;
  const double y = -(c + 1e-3) / k0; // stat = -(c + eps)
  Monitor two(config(Kernel::gaussian(), 1.0, c));
  Monitor one(config(Kernel::gaussian(), 1.0, c, Side::one_sided_upper));
  EXPECT_TRUE(two.step(1.0, y).decision);
  EXPECT_FALSE(one.step(1.0, y).decision);
}

TEST(Monitor, FreezesAfterSignal)
{
  Monitor m(config(Kernel::gaussian(), 1.0, 0.1));
  EXPECT_TRUE(m.step(1.0, 10.0).decision);
  const auto before = m.state().last_stat;
  const auto r = m.step(2.0, -1000.0);
  EXPECT_TRUE(r.decision);
  EXPECT_EQ(r.stat, before);
  EXPECT_EQ(m.state().n, 1u);
  EXPECT_EQ(*m.state().stop_index, 1u);
  // even an out-of-order time is ignored once frozen
  EXPECT_NO_THROW(m.step(0.5, 0.0));
}

TEST(Monitor, Errors)
{
  Monitor m(config(Kernel::gaussian(), 1.0, 1.0));
  m.step(2.0, 0.0);
  EXPECT_THROW(m.step(2.0, 0.0), OrderingError);
  EXPECT_THROW(m.step(1.0, 0.0), OrderingError);
  EXPECT_THROW(m.step(3.0, std::nan("")), ParameterError);
  EXPECT_THROW(Monitor(config(Kernel::gaussian(), 0.0, 1.0)), ConfigError);
  EXPECT_THROW(Monitor(config(Kernel::gaussian(), 1.0, 0.0)), ConfigError);
  auto cfg = config(Kernel::epanechnikov(), 10.0, 1.0);
  cfg.window = WindowPolicy::fixed(5.0);
  EXPECT_THROW(Monitor{cfg}, ConfigError);
  cfg.window = WindowPolicy::fixed(10.0);
  EXPECT_NO_THROW(Monitor{cfg});
}

TEST(Monitor, AutomaticWindowRadius)
{
  EXPECT_NEAR(Monitor(config(Kernel::epanechnikov(), 10.0, 1.0)).window_radius(), 10.0, 1e-9);
  const auto g = Kernel::gaussian();
  EXPECT_NEAR(Monitor(config(g, 10.0, 1.0)).window_radius(), 10.0 * g.integration_radius(),
              1e-9);
}

TEST(Run, ClampBeforeChange)
{
  const std::vector<double> t{1, 2, 3, 4}, y{0, 0, 50, 0};
  const auto rec = run(t, y, config(Kernel::gaussian(), 1.0, 1.0), 10.0);
  ASSERT_FALSE(rec.censored());
  EXPECT_EQ(*rec.stop_index, 3u);
  EXPECT_EQ(*rec.normed_delay, 0.0);
}

TEST(Run, HorizonCensors)
{
  const std::vector<double> t{1, 2, 3, 4}, y{0, 0, 50, 0};
  auto cfg = config(Kernel::gaussian(), 1.0, 1.0);
  cfg.horizon = 2;
  const auto rec = run(t, y, cfg, 1.0, true);
  EXPECT_TRUE(rec.censored());
  EXPECT_EQ(rec.path.size(), 2u);
}

TEST(Run, NoiselessStepMatchesQuantile)
{
  const double a = 2.0, h = 200.0, t_q = 51.0;
  const auto d = noiseless(Alternative::step(a), h, t_q, 2000);
  const auto rec = run(d.t, d.y, config(Kernel::gaussian(), h, 0.25 * a), t_q);
  ASSERT_FALSE(rec.censored());
  const auto ref = solve_rho0(Kernel::gaussian(), Alternative::step(a), 0.25 * a);
  EXPECT_NEAR(*rec.normed_delay, ref.rho, 2.0 / h);
}

TEST(Run, NoiselessLinearMatchesDelaySolver)
{
  const auto m0 = Alternative::truncated_linear(1.0, 4.0);
  const double h = 400.0, t_q = 1.0;
  for (double c : {0.07, 0.3}) {
    const auto d = noiseless(m0, h, t_q, 4000);
    const auto rec = run(d.t, d.y, config(Kernel::gaussian(), h, c), t_q);
    ASSERT_FALSE(rec.censored());
    const auto ref = solve_rho0(Kernel::gaussian(), m0, c);
    EXPECT_NEAR(*rec.normed_delay, ref.rho, 0.05) << c;
  }
}

TEST(Run, PrefixReplayIsBitIdentical)
{
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  std::vector<double> t, y;
  for (int i = 1; i <= 2000; ++i) {
    t.push_back(i);
    y.push_back(z(rng));
  }
  const auto cfg = config(Kernel::gaussian(), 30.0, 1e9);
  Monitor full(cfg);
  std::vector<double> stats;
  for (std::size_t i = 0; i < t.size(); ++i)
    stats.push_back(full.step(t[i], y[i]).stat);
  for (std::size_t cut : {1u, 17u, 500u, 1999u}) {
    Monitor m(cfg);
    for (std::size_t i = 0; i < cut; ++i)
      EXPECT_EQ(m.step(t[i], y[i]).stat, stats[i]);
  }
}

TEST(Run, RaisingThresholdNeverStopsEarlier)
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  const auto m0 = Alternative::truncated_linear(1.0, 4.0);
  std::vector<double> t, y;
  for (int i = 1; i <= 1500; ++i) {
    t.push_back(i);
    y.push_back(m0((i - 101.0) / 100.0) * (i >= 101) + z(rng));
  }
  double prev = 0.0;
  for (double c : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8}) {
    const auto rec = run(t, y, config(Kernel::gaussian(), 100.0, c), 101.0);
    const double stop = rec.censored() ? 1e18 : *rec.stop_time;
    EXPECT_GE(stop, prev) << c;
    prev = stop;
  }
}
