#include "kd/kernel.hpp"

#include "kd/error.hpp"
#include "kd/io.hpp"
#include "kd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kd {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

template <class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double tab_eval(const kern::Tabulated& t, double z)
{
  if (!std::isfinite(z))
    throw DomainError("tabulated kernel evaluated at a non-finite argument");
  if (z < t.grid.front() || z > t.grid.back())
    return 0.0;
  auto it = std::upper_bound(t.grid.begin(), t.grid.end(), z);
  if (it == t.grid.end())
    return t.values.back();
  const auto i = static_cast<std::size_t>(it - t.grid.begin());
  const double w = (z - t.grid[i - 1]) / (t.grid[i] - t.grid[i - 1]);
  return t.values[i - 1] + w * (t.values[i] - t.values[i - 1]);
}

double tab_cdf(const kern::Tabulated& t, double z)
{
  if (z <= t.grid.front())
    return 0.0;
  if (z >= t.grid.back())
    return t.cumulative.back();
  auto it = std::upper_bound(t.grid.begin(), t.grid.end(), z);
  const auto i = static_cast<std::size_t>(it - t.grid.begin());
  const double x0 = t.grid[i - 1];
  return t.cumulative[i - 1] + 0.5 * (z - x0) * (t.values[i - 1] + tab_eval(t, z));
}

// |z| > rho* part of K*.
double optimal_tail(const kern::Optimal& o, double u)
{
  if (u <= o.rise_end)
    return o.boundary + o.slope * (u - o.rho_star);
  if (u <= o.fall_end)
    return o.peak - o.slope * (u - o.rise_end);
  return 0.0;
}

double optimal_tail_mass(const kern::Optimal& o, double x)
{
  if (x <= o.rho_star)
    return 0.0;
  const double x1 = std::min(x, o.rise_end);
  double area = 0.5 * (o.boundary + optimal_tail(o, x1)) * (x1 - o.rho_star);
  if (x > o.rise_end) {
    const double x2 = std::min(x, o.fall_end);
    area += 0.5 * (o.peak + optimal_tail(o, x2)) * (x2 - o.rise_end);
  }
  return area;
}

std::string fmt(double x)
{
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

} // namespace

Kernel::Kernel(std::string name, Form form, double lipschitz, double sup_bound,
               double support, double integration_radius,
               std::vector<double> breakpoints, bool subdensity)
    : name_(std::move(name)), form_(std::move(form)), lipschitz_(lipschitz),
      sup_bound_(sup_bound), support_(support),
      integration_radius_(integration_radius),
      breakpoints_(std::move(breakpoints)), subdensity_(subdensity)
{
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()),
                     breakpoints_.end());
  validate();
}

Kernel Kernel::gaussian()
{
  return Kernel("gaussian", kern::Gaussian{}, std::exp(-0.5) * inv_sqrt_2pi,
                inv_sqrt_2pi, inf, 8.0, {}, false);
}

Kernel Kernel::epanechnikov()
{
  return Kernel("epanechnikov", kern::Epanechnikov{}, 1.5, 0.75, 1.0, 1.0,
                {1.0}, false);
}

Kernel Kernel::triangular()
{
  return Kernel("triangular", kern::Triangular{}, 1.0, 1.0, 1.0, 1.0, {0.0, 1.0},
                false);
}

Kernel Kernel::laplace(double rate)
{
  if (!(std::isfinite(rate) && rate > 0.0))
    throw ParameterError("laplace kernel: rate must be positive");
  return Kernel("laplace(" + fmt(rate) + ")", kern::Laplace{rate},
                0.5 * rate * rate, 0.5 * rate, inf, 30.0 / rate, {0.0}, false);
}

Kernel Kernel::tabulated(std::vector<double> grid, std::vector<double> values,
                         double lipschitz_const, double sup_bound,
                         std::string name)
{
  if (grid.size() != values.size() || grid.size() < 2)
    throw ConstructionError("tabulated kernel: need at least two (z, K) pairs");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || !std::isfinite(values[i]))
      throw ConstructionError("tabulated kernel: non-finite entry");
    if (values[i] < 0.0)
      throw ConstructionError("tabulated kernel: negative value");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ConstructionError("tabulated kernel: abscissae must be strictly increasing");
  }
  if (!(lipschitz_const >= 0.0) || !(sup_bound > 0.0))
    throw ConstructionError("tabulated kernel: declared bounds must be positive");

  kern::Tabulated t{std::move(grid), std::move(values), {}};
  t.cumulative.assign(t.grid.size(), 0.0);
  for (std::size_t i = 1; i < t.grid.size(); ++i)
    t.cumulative[i] = t.cumulative[i - 1] +
                      0.5 * (t.grid[i] - t.grid[i - 1]) * (t.values[i] + t.values[i - 1]);
  const double radius = std::max(std::abs(t.grid.front()), std::abs(t.grid.back()));
  std::vector<double> kinks;
  for (double z : t.grid)
    if (z >= 0.0)
      kinks.push_back(z);
  return Kernel(std::move(name), std::move(t), lipschitz_const, sup_bound,
                radius, radius, std::move(kinks), false);
}

bool Kernel::compact() const { return std::isfinite(support_); }

double Kernel::operator()(double z) const
{
  return std::visit(
      overloaded{
          [&](const kern::Gaussian&) {
            return inv_sqrt_2pi * std::exp(-0.5 * z * z);
          },
          [&](const kern::Epanechnikov&) {
            return std::abs(z) > 1.0 ? 0.0 : 0.75 * (1.0 - z * z);
          },
          [&](const kern::Triangular&) {
            return std::abs(z) > 1.0 ? 0.0 : 1.0 - std::abs(z);
          },
          [&](const kern::Laplace& l) {
            return 0.5 * l.rate * std::exp(-l.rate * std::abs(z));
          },
          [&](const kern::Tabulated& t) { return tab_eval(t, z); },
          [&](const kern::Optimal& o) {
            const double u = std::abs(z);
            if (u <= o.rho_star)
              return o.scale * o.alternative(o.rho_star - u);
            return optimal_tail(o, u);
          }},
      form_);
}

double Kernel::mass_between_zero_and(double x) const
{
  const auto& o = std::get<kern::Optimal>(form_);
  if (x <= o.rho_star)
    return o.scale * o.alternative.integral(o.rho_star - x, o.rho_star);
  return o.scale * o.alternative.integral(0.0, o.rho_star) + optimal_tail_mass(o, x);
}

double Kernel::cdf(double z) const
{
  return std::visit(
      overloaded{
          [&](const kern::Gaussian&) {
            return 0.5 * std::erfc(-z / std::numbers::sqrt2);
          },
          [&](const kern::Epanechnikov&) {
            if (z <= -1.0)
              return 0.0;
            if (z >= 1.0)
              return 1.0;
            return 0.5 + 0.75 * (z - z * z * z / 3.0);
          },
          [&](const kern::Triangular&) {
            if (z <= -1.0)
              return 0.0;
            if (z >= 1.0)
              return 1.0;
            return z <= 0.0 ? 0.5 * (1.0 + z) * (1.0 + z)
                            : 1.0 - 0.5 * (1.0 - z) * (1.0 - z);
          },
          [&](const kern::Laplace& l) {
            return z < 0.0 ? 0.5 * std::exp(l.rate * z)
                           : 1.0 - 0.5 * std::exp(-l.rate * z);
          },
          [&](const kern::Tabulated& t) { return tab_cdf(t, z); },
          [&](const kern::Optimal&) {
            const double half = mass_between_zero_and(inf);
            const double part = mass_between_zero_and(std::abs(z));
            return z < 0.0 ? half - part : half + part;
          }},
      form_);
}

double Kernel::quantile(double p) const
{
  if (!(p > 0.0 && p < 1.0))
    throw ParameterError("quantile: p must lie strictly inside (0, 1)");
  double lo = -integration_radius_;
  double hi = integration_radius_;
  while (cdf(lo) > p)
    lo *= 2.0;
  while (cdf(hi) < p)
    hi *= 2.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void Kernel::validate() const
{
  auto fail = [&](const std::string& what) {
    throw ConstructionError("kernel " + name_ + ": " + what);
  };
  if (!(lipschitz_ >= 0.0) || !(sup_bound_ > 0.0))
    fail("declared bounds must be positive");

  const double reach = (compact() ? support_ : integration_radius_);
  const double span = 1.05 * reach + 1e-9;
  constexpr int n = 4001;
  std::vector<double> zs;
  zs.reserve(n + 4 * breakpoints_.size());
  for (int i = 0; i < n; ++i)
    zs.push_back(-span + 2.0 * span * i / (n - 1));
  for (double b : breakpoints_)
    for (double s : {-1.0, 1.0})
      for (double d : {-1e-7, 1e-7})
        zs.push_back(s * b + d);
  std::sort(zs.begin(), zs.end());

  std::vector<double> ks(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i)
    ks[i] = (*this)(zs[i]);

  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double z = zs[i];
    const double k = ks[i];
    if (!(k >= 0.0))
      fail("negative or NaN value at z=" + fmt(z));
    if (k > sup_bound_ * (1.0 + 1e-12))
      fail("value " + fmt(k) + " at z=" + fmt(z) + " exceeds declared sup_bound " +
           fmt(sup_bound_));
    if (compact() && std::abs(z) > support_ && k != 0.0)
      fail("nonzero value outside the declared support at z=" + fmt(z));
    if (std::abs(k - (*this)(-z)) > 1e-12 * std::max(1.0, sup_bound_))
      fail("not symmetric at z=" + fmt(z));
  }
  // adjacent pairs suffice: the bound then holds for every pair of grid
  // points by the triangle inequality
  for (std::size_t i = 0; i + 1 < zs.size(); ++i) {
    if (subdensity_ && (std::abs(zs[i]) > support_ || std::abs(zs[i + 1]) > support_))
      continue;
    const double dz = zs[i + 1] - zs[i];
    if (std::abs(ks[i + 1] - ks[i]) > lipschitz_ * dz * (1.0 + 1e-9) + 1e-13)
      fail("Lipschitz bound " + fmt(lipschitz_) + " violated near z=" + fmt(zs[i]));
  }

  if (!subdensity_) {
    std::vector<double> cuts;
    for (double b : breakpoints_) {
      cuts.push_back(b);
      cuts.push_back(-b);
    }
    const double mass = adaptive_simpson_split(*this, -reach, reach, cuts).value;
    if (std::abs(mass - 1.0) > 1e-8)
      fail("does not integrate to one (mass " + fmt(mass) + ")");
  }
}

double rescale_eval(const Kernel& k, double h, double z)
{
  if (!(h > 0.0))
    throw ParameterError("rescale_eval: bandwidth must be positive");
  return k(z / h) / h;
}

Kernel load_tabulated_kernel(const std::filesystem::path& csv,
                             double lipschitz_const, double sup_bound)
{
  auto [grid, values] = io::read_two_column_csv(csv);
  return Kernel::tabulated(std::move(grid), std::move(values), lipschitz_const,
                           sup_bound, "tabulated(" + csv.filename().string() + ")");
}

Kernel make_optimal_kernel(const Alternative& m0, double rho_star,
                           const OptimalKernelOptions& options)
{
  if (!(std::isfinite(rho_star) && rho_star > 0.0))
    throw ParameterError("make_optimal_kernel: rho* must be positive");
  const double total = m0.total_integral();
  if (!std::isfinite(total) || !(total > 0.0))
    throw ConstructionError("make_optimal_kernel: the alternative must have a "
                            "finite, positive total integral");
  for (double j : m0.jumps())
    if (j > 0.0 && j < rho_star)
      throw ConstructionError("make_optimal_kernel: m0 jumps at t=" + fmt(j) +
                              " inside (0, rho*), K* would not be Lipschitz");

  kern::Optimal o{m0, rho_star, options.tail, 0.5 / total, 0, 0, 0, 0, 0};
  const double inside = m0.integral(0.0, rho_star) / total;
  double residual = 1.0 - inside;
  if (residual < -1e-12)
    throw ConstructionError("make_optimal_kernel: mass on [-rho*, rho*] exceeds one");
  residual = std::max(residual, 0.0);
  o.boundary = o.scale * m0(0.0);
  const double lip_inside = o.scale * m0.lipschitz_per_piece();
  const double sup_inside = o.scale * m0.sup_on(0.0, rho_star);

  std::vector<double> kinks{0.0, rho_star};
  for (double b : m0.breakpoints())
    if (b > 0.0 && b < rho_star)
      kinks.push_back(rho_star - b);

  std::string name = "optimal(" + m0.name() + ",rho*=" + fmt(rho_star) + ")";
  if (options.tail == TailPolicy::none) {
    o.peak = o.boundary;
    o.rise_end = o.fall_end = rho_star;
    const double lip = options.lipschitz_const.value_or(lip_inside);
    const double sup = options.sup_bound.value_or(sup_inside);
    return Kernel(name, std::move(o), lip, sup, rho_star, rho_star,
                  std::move(kinks), true);
  }

  if (residual <= 1e-15) {
    if (o.boundary > 0.0)
      throw ConstructionError("make_optimal_kernel: no residual mass left to "
                              "continue K* from K*(rho*) > 0 down to zero");
    o.peak = 0.0;
    o.rise_end = o.fall_end = rho_star;
    const double lip = options.lipschitz_const.value_or(lip_inside);
    const double sup = options.sup_bound.value_or(sup_inside);
    return Kernel(name, std::move(o), lip, sup, rho_star, rho_star,
                  std::move(kinks), false);
  }

  const double b2 = o.boundary * o.boundary;
  const double lip =
      options.lipschitz_const.value_or(std::max(lip_inside, b2 / residual));
  if (!(lip > 0.0))
    throw ConstructionError("make_optimal_kernel: Lipschitz constant must be positive");
  if (lip * residual < b2 * (1.0 - 1e-12))
    throw ConstructionError(
        "make_optimal_kernel: lipschitz_const " + fmt(lip) +
        " too small to carry the residual mass " + fmt(residual) +
        " from K*(rho*) = " + fmt(o.boundary) + " down to zero");
  o.slope = lip;
  o.peak = std::sqrt(std::max(0.5 * (lip * residual + b2), b2));
  o.rise_end = rho_star + (o.peak - o.boundary) / lip;
  o.fall_end = o.rise_end + o.peak / lip;
  const double needed_sup = std::max(sup_inside, o.peak);
  const double sup = options.sup_bound.value_or(needed_sup);
  if (sup < needed_sup * (1.0 - 1e-12))
    throw ConstructionError("make_optimal_kernel: completion peak " + fmt(o.peak) +
                            " or interior maximum " + fmt(sup_inside) +
                            " exceeds sup_bound " + fmt(sup));
  kinks.push_back(o.rise_end);
  kinks.push_back(o.fall_end);
  const double radius = o.fall_end;
  return Kernel(name, std::move(o), lip, sup, radius, radius, std::move(kinks),
                false);
}

} // namespace kd
