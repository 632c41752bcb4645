#include "kd/delay.hpp"
#include "kd/error.hpp"
#include "kd/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace kd;

namespace {

// midpoint rule with n cells
template <class F>
double riemann(F&& f, double a, double b, int n)
{
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += f(a + (i + 0.5) * h);
  return s * h;
}

void expect_first_crossing(const Kernel& k, const Alternative& m0, double c,
                           const DelaySolution& s)
{
  ASSERT_EQ(s.status, DelayStatus::converged);
  EXPECT_NEAR(s.psi_at_rho, c, 1e-8);
  for (double r = s.grid_step; r < s.bracket.lo; r += s.grid_step)
    EXPECT_LT(psi(k, m0, r), c) << "earlier crossing at " << r;
}

} // namespace

TEST(Psi, Examples)
{
  const auto g = Kernel::gaussian();
  const auto lin = Alternative::truncated_linear(1.0, 4.0);
  EXPECT_EQ(psi(g, lin, 0.0), 0.0);
  const auto step = Alternative::step(2.0);
  for (const auto& k : {Kernel::gaussian(), Kernel::epanechnikov(), Kernel::laplace(1.5)})
    for (double rho : {0.2, 0.9, 3.0})
      EXPECT_NEAR(psi(k, step, rho), 2.0 * (k.cdf(rho) - 0.5), 1e-10);
}

TEST(Psi, AgreesWithRiemannSum)
{
  const auto g = Kernel::gaussian();
  const auto lin = Alternative::truncated_linear(1.0, 4.0);
  const double r = riemann([&](double s) { return g(s - 1.0) * lin(s); }, 0.0, 1.0, 1000000);
  EXPECT_NEAR(psi(g, lin, 1.0), r, 1e-8);

  const auto mm = Alternative::michaelis_menten(1.0, 0.5, 0.3, 10.0);
  const auto e = Kernel::epanechnikov();
  const double r2 = riemann([&](double s) { return e(s - 2.5) * mm(s); }, 0.0, 2.5, 1000000);
  EXPECT_NEAR(psi(e, mm, 2.5), r2, 1e-8);
}

TEST(Psi, NondecreasingForNondecreasingDrift)
{
  const auto lin = Alternative::truncated_linear(1.0, 4.0);
  const auto mm = Alternative::michaelis_menten(1.0, 0.5, 0.3, 10.0);
  for (const auto& k : {Kernel::gaussian(), Kernel::triangular()}) {
    // only up to T: beyond it the truncated drift is no longer nondecreasing
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double v = psi(k, lin, 4.0 * i / 200.0);
      EXPECT_GE(v, prev - 1e-13);
      prev = v;
    }
    prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double v = psi(k, mm, 10.0 * i / 200.0);
      EXPECT_GE(v, prev - 1e-13);
      prev = v;
    }
  }
}

TEST(SolveRho0, StepClosedForm)
{
  for (const auto& k : {Kernel::gaussian(), Kernel::epanechnikov()})
    for (double ratio : {0.1, 0.25, 0.4}) {
      const auto s = solve_rho0(k, Alternative::step(2.0), 2.0 * ratio);
      ASSERT_EQ(s.status, DelayStatus::converged);
      EXPECT_NEAR(s.rho, k.quantile(0.5 + ratio), 1e-6);
    }
  const auto s = solve_rho0(Kernel::gaussian(), Alternative::step(1.0), 0.25);
  EXPECT_NEAR(s.rho, 0.6744897502, 1e-8);
}

TEST(SolveRho0, FirstCrossingAndTolerance)
{
  const auto lin = Alternative::truncated_linear(1.0, 4.0);
  const auto g = Kernel::gaussian();
  const auto s = solve_rho0(g, lin, 0.5);
  expect_first_crossing(g, lin, 0.5, s);
  EXPECT_LE(s.bracket.hi - s.bracket.lo, 1e-10);
  EXPECT_EQ(s.search_bound, 16.0);
  EXPECT_DOUBLE_EQ(s.grid_step, 16.0 / 2048);
}

TEST(SolveRho0, NonMonotonePsiTakesEarliestBracket)
{
  // a short tabulated bump: Psi rises, falls, and a later kernel could cross again
  const auto bump = Alternative::tabulated({0.0, 0.5, 1.0, 1.5}, {0.0, 2.0, 2.0, 0.0});
  const auto k = Kernel::triangular();
  const auto s = solve_rho0(k, bump, 0.3);
  expect_first_crossing(k, bump, 0.3, s);
}

TEST(SolveRho0, UnreachableThreshold)
{
  const auto lin = Alternative::truncated_linear(1.0, 4.0);
  const auto s = solve_rho0(Kernel::gaussian(), lin, 50.0);
  EXPECT_EQ(s.status, DelayStatus::no_crossing);
  // the step functional is bounded by a/2 and flat far out
  const auto u = solve_rho0(Kernel::gaussian(), Alternative::step(1.0), 0.6);
  EXPECT_EQ(u.status, DelayStatus::no_crossing);
  const auto b = solve_rho0(Kernel::gaussian(), Alternative::step(1.0), 0.49, {1.0, {}, 1e-10});
  EXPECT_EQ(b.status, DelayStatus::at_upper_bound);
  EXPECT_EQ(b.rho, 1.0);
}

TEST(SolveRho0, ScaleEquivariance)
{
  const auto mm = Alternative::michaelis_menten(1.0, 0.5, 0.3, 10.0);
  const auto g = Kernel::gaussian();
  const auto a = solve_rho0(g, mm, 0.2);
  const auto b = solve_rho0(g, mm.scaled(3.0), 0.6);
  ASSERT_EQ(a.status, DelayStatus::converged);
  EXPECT_NEAR(a.rho, b.rho, 1e-10);
}

TEST(SolveRho0, RejectsBadThreshold)
{
  EXPECT_THROW(solve_rho0(Kernel::gaussian(), Alternative::step(1.0), 0.0), ParameterError);
}

TEST(Design, UniformReducesToPsi)
{
  const auto lin = Alternative::truncated_linear(1.0, 4.0);
  const auto g = Kernel::gaussian();
  const auto u = TimeDesign::uniform();
  for (double rho : {0.3, 1.0, 2.5}) {
    EXPECT_NEAR(design_functional(g, lin, u, rho), psi(g, lin, rho), 1e-9);
    // printed form: rho int_0^1 K(rho(s-1)) m0(s) ds, checked by Riemann sum
    const double r = rho * riemann([&](double s) { return g(rho * (s - 1)) * lin(s); },
                                   0.0, 1.0, 200000);
    EXPECT_NEAR(design_functional(g, lin, u, rho, DesignLimit::printed), r, 1e-8);
  }
  const auto a = solve_rho0(g, lin, 0.3);
  const auto b = solve_rho0_design(g, lin, 0.3, u);
  EXPECT_NEAR(a.rho, b.rho, 1e-8);
}

TEST(Design, PowerDesignAgainstRiemann)
{
  const auto lin = Alternative::truncated_linear(1.0, 4.0);
  const auto g = Kernel::gaussian();
  const auto d = TimeDesign::power(2.0);
  const double rho = 1.3;
  const double r = rho * riemann(
                             [&](double s) {
                               return g(rho * (s - 1)) * lin(rho * s) * 2 * s;
                             },
                             0.0, 1.0, 200000);
  EXPECT_NEAR(design_functional(g, lin, d, rho), r, 1e-8);
  const auto s = solve_rho0_design(g, lin, 0.3, d);
  ASSERT_EQ(s.status, DelayStatus::converged);
  EXPECT_NEAR(design_functional(g, lin, d, s.rho), 0.3, 1e-8);
  EXPECT_EQ(solve_rho0_design(g, lin, 50.0, d).status, DelayStatus::no_crossing);
}

TEST(DesignTimes, Invariants)
{
  for (const auto& d : {TimeDesign::uniform(), TimeDesign::power(2.0),
                        TimeDesign::tabulated_quantile({0.0, 0.5, 1.0}, {0.0, 0.8, 1.0})}) {
    EXPECT_EQ(d.cdf(0.0), 0.0);
    EXPECT_NEAR(d.cdf(1.0), 1.0, 1e-15);
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double c = d.cdf(i / 100.0);
      EXPECT_GE(c, prev);
      prev = c;
      EXPECT_NEAR(d.quantile(c), i / 100.0, 1e-9) << d.name();
    }
    std::vector<double> cuts = d.breakpoints();
    auto f = [&](double s) { return d.density(s); };
    EXPECT_NEAR(adaptive_simpson_split(f, 0.0, 1.0, cuts).value, 1.0, 1e-9) << d.name();
    const auto t = d.sample_times(10);
    EXPECT_NEAR(t.back(), 10.0, 1e-12);
  }
  EXPECT_THROW(TimeDesign::power(0.0), ParameterError);
}

TEST(OptimalPair, SelfConsistency)
{
  for (auto [m0, c] : std::vector<std::pair<Alternative, double>>{
           {Alternative::truncated_linear(1.0, 4.0), 0.5},
           {Alternative::truncated_exponential(0.5, 4.0), 0.8},
           {Alternative::michaelis_menten(1.0, 0.5, 0.3, 10.0), 0.3}}) {
    const auto p = solve_optimal_pair(m0, c);
    EXPECT_NEAR(p.attained, c, 1e-8) << m0.name();
    EXPECT_NEAR(psi(p.kernel, m0, p.rho_star), c, 1e-8) << m0.name();
  }
}

TEST(OptimalPair, ExponentialRootAgainstRiemann)
{
  const auto m0 = Alternative::truncated_exponential(0.5, 4.0);
  const double c = 0.8;
  const double total = riemann([&](double s) { return m0(s); }, 0.0, 4.0, 1000000);
  auto g = [&](double rho) {
    return riemann([&](double s) { return m0(s) * m0(s); }, 0.0, rho, 1000000) /
               (2 * total) -
           c;
  };
  double lo = 0.0, hi = 4.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(solve_optimal_pair(m0, c).rho_star, 0.5 * (lo + hi), 1e-7);
}

TEST(OptimalPair, UnreachableThreshold)
{
  // int_0^4 m0^2 / (2 int m0) = (64/3) / 16 = 4/3
  EXPECT_THROW(solve_optimal_pair(Alternative::truncated_linear(1.0, 4.0), 1.5),
               NoSolutionError);
  EXPECT_THROW(solve_optimal_pair(Alternative::step(1.0), 0.2), Error);
}

TEST(Select, Examples)
{
  const auto lin = Alternative::truncated_linear(1.0, 4.0);
  std::vector<Kernel> one{Kernel::gaussian()};
  EXPECT_EQ(select_kernel(one, lin, 0.5).index, 0u);

  std::vector<Kernel> twins{Kernel::epanechnikov(), Kernel::epanechnikov()};
  EXPECT_EQ(select_kernel(twins, lin, 0.5).index, 0u);


  std::vector<Kernel> none{Kernel::gaussian()};
  EXPECT_THROW(select_kernel(none, lin, 50.0), NoSolutionError);
  EXPECT_THROW(select_kernel(std::span<const Kernel>{}, lin, 0.5), ParameterError);
}

TEST(Select, NonConvergedRankLast)
{
  const auto lin = Alternative::truncated_linear(1.0, 1.0);
  // a very wide Laplace kernel misses c; the gaussian does not
  std::vector<Kernel> ks{Kernel::laplace(0.01), Kernel::gaussian()};
  const auto sel = select_kernel(ks, lin, 0.1);
  EXPECT_EQ(sel.index, 1u);
  EXPECT_NE(sel.solutions[0].status, DelayStatus::converged);
}

TEST(Select, OptimalPairIsBeatenByGaussianOnLinearDrift)
{
  // rho* solves rho^3 / 48 = c; the gaussian reaches c much earlier, and the
  // LP probe confirms a feasible kernel attains c before rho*
  const auto lin = Alternative::truncated_linear(1.0, 4.0);
  const auto pair = solve_optimal_pair(lin, 0.5);
  EXPECT_NEAR(pair.rho_star, std::cbrt(24.0), 1e-9);
  std::vector<Kernel> kg{pair.kernel, Kernel::gaussian()};
  const auto sel = select_kernel(kg, lin, 0.5);
  EXPECT_EQ(sel.index, 1u);
  EXPECT_NEAR(sel.solutions[0].rho, pair.rho_star, 1e-8);
  const double rho_g = sel.solutions[1].rho;
  EXPECT_LT(rho_g, pair.rho_star);
  const auto g = Kernel::gaussian();
  const auto probe = lp_oracle(lin, rho_g, g.lipschitz_const(), g.sup_bound(), {128, 64, {}});
  EXPECT_GE(probe.sup_value, 0.5 - 1e-3);
}
