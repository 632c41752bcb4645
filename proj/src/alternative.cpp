#include "kd/alternative.hpp"

#include "kd/error.hpp"
#include "kd/io.hpp"
#include "kd/lambert_w.hpp"
#include "kd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kd {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what)
{
  if (!ok)
    throw ParameterError(what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

double interp(const std::vector<double>& x, const std::vector<double>& y,
              double t)
{
  if (t < x.front() || t > x.back())
    return 0.0;
  auto it = std::upper_bound(x.begin(), x.end(), t);
  if (it == x.end())
    return y.back();
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + w * (y[i] - y[i - 1]);
}

// Exact integrals of the piecewise-linear interpolant (and its square) over
// [a, b] intersected with the grid range.
template <class SegmentRule>
double tabulated_integral(const alt::Tabulated& tab, double a, double b,
                          SegmentRule rule)
{
  const double lo = std::max(a, tab.grid.front());
  const double hi = std::min(b, tab.grid.back());
  if (!(hi > lo))
    return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < tab.grid.size(); ++i) {
    const double p = std::max(lo, tab.grid[i]);
    const double q = std::min(hi, tab.grid[i + 1]);
    if (!(q > p))
      continue;
    sum += rule(q - p, interp(tab.grid, tab.values, p),
                interp(tab.grid, tab.values, q));
  }
  return sum;
}

// Michaelis-Menten pieces via W-antiderivatives; w(t) = [S](t) / km.
double substrate_integral(const alt::MichaelisMenten& mm, double lo, double hi)
{
  const double wl = substrate(lo, mm.substrate0, mm.km, mm.vmax) / mm.km;
  const double wh = substrate(hi, mm.substrate0, mm.km, mm.vmax) / mm.km;
  return mm.km * mm.km / mm.vmax *
         (w_over_y_antiderivative(wl) - w_over_y_antiderivative(wh));
}

double substrate_sq_integral(const alt::MichaelisMenten& mm, double lo,
                             double hi)
{
  const double wl = substrate(lo, mm.substrate0, mm.km, mm.vmax) / mm.km;
  const double wh = substrate(hi, mm.substrate0, mm.km, mm.vmax) / mm.km;
  return mm.km * mm.km * mm.km / mm.vmax *
         (w2_over_y_antiderivative(wl) - w2_over_y_antiderivative(wh));
}

} // namespace

double wright_omega(double u)
{
  if (u < 400.0)
    return lambert_w(std::exp(u));
  // w + log w = u, Newton from the asymptotic guess
  double w = u - std::log(u);
  for (int it = 0; it < 50; ++it) {
    const double step = (w + std::log(w) - u) / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 4e-16 * w)
      break;
  }
  return w;
}

double substrate(double t, double s0, double km, double vmax)
{
  if (!(positive_finite(s0) && positive_finite(km) && positive_finite(vmax)))
    throw ParameterError("substrate: s0, km and vmax must be positive");
  if (!(t >= 0.0))
    throw ParameterError("substrate: t must be nonnegative");
  if (t == 0.0)
    return s0;
  const double u = std::log(s0 / km) + (s0 - vmax * t) / km;
  return km * wright_omega(u);
}

double w_over_y_antiderivative(double w) { return w + 0.5 * w * w; }

double w2_over_y_antiderivative(double w)
{
  return w * w * (0.5 + w / 3.0);
}

Alternative::Alternative(Form form) : form_(std::move(form)) {}

Alternative Alternative::step(double level)
{
  require(positive_finite(level), "step: level must be positive");
  return Alternative(alt::Step{level});
}

Alternative Alternative::truncated_linear(double slope, double horizon)
{
  require(positive_finite(slope), "truncated_linear: slope must be positive");
  require(positive_finite(horizon), "truncated_linear: T must be positive");
  return Alternative(alt::TruncatedLinear{slope, horizon});
}

Alternative Alternative::truncated_exponential(double rate, double horizon)
{
  require(std::isfinite(rate), "truncated_exponential: rate must be finite");
  require(positive_finite(horizon), "truncated_exponential: T must be positive");
  return Alternative(alt::TruncatedExponential{rate, horizon});
}

Alternative Alternative::michaelis_menten(double s0, double km, double vmax,
                                          double horizon)
{
  require(positive_finite(s0) && positive_finite(km) && positive_finite(vmax),
          "michaelis_menten: S0, K_M and v_max must be positive");
  require(positive_finite(horizon), "michaelis_menten: T must be positive");
  return Alternative(alt::MichaelisMenten{s0, km, vmax, horizon});
}

Alternative Alternative::tabulated(std::vector<double> grid,
                                   std::vector<double> values)
{
  require(grid.size() == values.size() && grid.size() >= 2,
          "tabulated alternative: need at least two (t, value) pairs");
  require(grid.front() >= 0.0, "tabulated alternative: grid must start at t >= 0");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(std::isfinite(grid[i]) && std::isfinite(values[i]),
            "tabulated alternative: non-finite entry");
    require(values[i] >= 0.0, "tabulated alternative: values must be nonnegative");
    if (i > 0)
      require(grid[i] > grid[i - 1],
              "tabulated alternative: abscissae must be strictly increasing");
  }
  return Alternative(alt::Tabulated{std::move(grid), std::move(values)});
}

Alternative Alternative::scaled(double kappa) const
{
  require(positive_finite(kappa), "scaled: factor must be positive");
  Alternative out = *this;
  out.amplitude_ *= kappa;
  return out;
}

double Alternative::base(double t) const
{
  if (t < 0.0 || std::isnan(t))
    return 0.0;
  return std::visit(
      overloaded{
          [&](const alt::Step& s) { return s.level; },
          [&](const alt::TruncatedLinear& f) {
            return t > f.horizon ? 0.0 : f.slope * t;
          },
          [&](const alt::TruncatedExponential& f) {
            return t > f.horizon ? 0.0 : std::exp(f.rate * t);
          },
          [&](const alt::MichaelisMenten& f) {
            if (t > f.horizon)
              return 0.0;
            return f.substrate0 - substrate(t, f.substrate0, f.km, f.vmax);
          },
          [&](const alt::Tabulated& f) { return interp(f.grid, f.values, t); }},
      form_);
}

double Alternative::operator()(double t) const { return amplitude_ * base(t); }

double Alternative::support_end() const
{
  return std::visit(
      overloaded{[](const alt::Step&) { return inf; },
                 [](const alt::TruncatedLinear& f) { return f.horizon; },
                 [](const alt::TruncatedExponential& f) { return f.horizon; },
                 [](const alt::MichaelisMenten& f) { return f.horizon; },
                 [](const alt::Tabulated& f) { return f.grid.back(); }},
      form_);
}

double Alternative::integral(double a, double b) const
{
  if (!(a <= b))
    throw ParameterError("integral: requires a <= b");
  const double lo = std::max(a, 0.0);
  const double hi = std::min(b, support_end());
  if (!(hi > lo))
    return 0.0;
  const double v = std::visit(
      overloaded{
          [&](const alt::Step& s) { return s.level * (hi - lo); },
          [&](const alt::TruncatedLinear& f) {
            return 0.5 * f.slope * (hi - lo) * (hi + lo);
          },
          [&](const alt::TruncatedExponential& f) {
            if (f.rate == 0.0)
              return hi - lo;
            return std::exp(f.rate * lo) * std::expm1(f.rate * (hi - lo)) /
                   f.rate;
          },
          [&](const alt::MichaelisMenten& f) {
            return f.substrate0 * (hi - lo) - substrate_integral(f, lo, hi);
          },
          [&](const alt::Tabulated& f) {
            return tabulated_integral(f, lo, hi, [](double w, double p, double q) {
              return 0.5 * w * (p + q);
            });
          }},
      form_);
  return amplitude_ * v;
}

double Alternative::sq_integral(double a, double b) const
{
  if (!(a <= b))
    throw ParameterError("sq_integral: requires a <= b");
  const double lo = std::max(a, 0.0);
  const double hi = std::min(b, support_end());
  if (!(hi > lo))
    return 0.0;
  const double v = std::visit(
      overloaded{
          [&](const alt::Step& s) { return s.level * s.level * (hi - lo); },
          [&](const alt::TruncatedLinear& f) {
            return f.slope * f.slope * (hi * hi * hi - lo * lo * lo) / 3.0;
          },
          [&](const alt::TruncatedExponential& f) {
            if (f.rate == 0.0)
              return hi - lo;
            const double r2 = 2.0 * f.rate;
            return std::exp(r2 * lo) * std::expm1(r2 * (hi - lo)) / r2;
          },
          [&](const alt::MichaelisMenten& f) {
            const double s0 = f.substrate0;
            return s0 * s0 * (hi - lo) - 2.0 * s0 * substrate_integral(f, lo, hi) +
                   substrate_sq_integral(f, lo, hi);
          },
          [&](const alt::Tabulated& f) {
            return tabulated_integral(f, lo, hi, [](double w, double p, double q) {
              return w * (p * p + p * q + q * q) / 3.0;
            });
          }},
      form_);
  return amplitude_ * amplitude_ * v;
}

double Alternative::total_integral() const
{
  return integral(0.0, support_end());
}

double Alternative::sup_on(double a, double b) const
{
  const double lo = std::max(a, 0.0);
  const double hi = std::min(b, support_end());
  if (hi < lo)
    return 0.0;
  const double v = std::visit(
      overloaded{
          [&](const alt::Step& s) { return s.level; },
          [&](const alt::TruncatedLinear& f) { return f.slope * hi; },
          [&](const alt::TruncatedExponential& f) {
            return std::max(std::exp(f.rate * lo), std::exp(f.rate * hi));
          },
          [&](const alt::MichaelisMenten& f) {
            return f.substrate0 - substrate(hi, f.substrate0, f.km, f.vmax);
          },
          [&](const alt::Tabulated& f) {
            double m = std::max(interp(f.grid, f.values, lo),
                                interp(f.grid, f.values, hi));
            for (std::size_t i = 0; i < f.grid.size(); ++i)
              if (f.grid[i] >= lo && f.grid[i] <= hi)
                m = std::max(m, f.values[i]);
            return m;
          }},
      form_);
  return amplitude_ * v;
}

std::vector<double> Alternative::breakpoints() const
{
  return std::visit(
      overloaded{[](const alt::Step&) { return std::vector<double>{0.0}; },
                 [](const alt::Tabulated& f) { return f.grid; },
                 [](const auto& f) { return std::vector<double>{0.0, f.horizon}; }},
      form_);
}

std::vector<double> Alternative::jumps() const
{
  std::vector<double> out;
  if (base(0.0) != 0.0)
    out.push_back(0.0);
  const double end = support_end();
  if (std::isfinite(end) && base(end) != 0.0)
    out.push_back(end);
  if (const auto* tab = std::get_if<alt::Tabulated>(&form_);
      tab && tab->grid.front() > 0.0 && tab->values.front() != 0.0)
    out.insert(out.begin(), tab->grid.front());
  return out;
}

double Alternative::lipschitz_per_piece() const
{
  const double v = std::visit(
      overloaded{
          [](const alt::Step&) { return 0.0; },
          [](const alt::TruncatedLinear& f) { return f.slope; },
          [](const alt::TruncatedExponential& f) {
            return std::abs(f.rate) *
                   std::max(1.0, std::exp(f.rate * f.horizon));
          },
          [](const alt::MichaelisMenten& f) {
            return f.vmax * f.substrate0 / (f.km + f.substrate0);
          },
          [](const alt::Tabulated& f) {
            double l = 0.0;
            for (std::size_t i = 0; i + 1 < f.grid.size(); ++i)
              l = std::max(l, std::abs(f.values[i + 1] - f.values[i]) /
                                  (f.grid[i + 1] - f.grid[i]));
            return l;
          }},
      form_);
  return amplitude_ * v;
}

bool Alternative::nondecreasing_on_support() const
{
  return std::visit(
      overloaded{[](const alt::TruncatedExponential& f) { return f.rate >= 0.0; },
                 [](const alt::Tabulated& f) {
                   return std::is_sorted(f.values.begin(), f.values.end());
                 },
                 [](const auto&) { return true; }},
      form_);
}

std::string Alternative::name() const
{
  std::ostringstream os;
  os.precision(10);
  std::visit(
      overloaded{
          [&](const alt::Step& s) { os << "step(a=" << s.level << ")"; },
          [&](const alt::TruncatedLinear& f) {
            os << "truncated_linear(a=" << f.slope << ",T=" << f.horizon << ")";
          },
          [&](const alt::TruncatedExponential& f) {
            os << "truncated_exponential(lambda=" << f.rate
               << ",T=" << f.horizon << ")";
          },
          [&](const alt::MichaelisMenten& f) {
            os << "michaelis_menten(S0=" << f.substrate0 << ",K_M=" << f.km
               << ",v_max=" << f.vmax << ",T=" << f.horizon << ")";
          },
          [&](const alt::Tabulated& f) {
            os << "tabulated(" << f.grid.size() << " points)";
          }},
      form_);
  if (amplitude_ != 1.0)
    os << "*" << amplitude_;
  return os.str();
}

Alternative load_tabulated_alternative(const std::filesystem::path& csv)
{
  auto [grid, values] = io::read_two_column_csv(csv);
  return Alternative::tabulated(std::move(grid), std::move(values));
}

double integral_by_quadrature(const Alternative& m0, double a, double b)
{
  const auto cuts = m0.breakpoints();
  return adaptive_simpson_split([&](double t) { return m0(t); }, a, b, cuts,
                                {.abs_tol = 1e-12})
      .value;
}

double sq_integral_by_quadrature(const Alternative& m0, double a, double b)
{
  const auto cuts = m0.breakpoints();
  return adaptive_simpson_split(
             [&](double t) {
               const double v = m0(t);
               return v * v;
             },
             a, b, cuts, {.abs_tol = 1e-12})
      .value;
}

const IdentityCheck& WAntiderivativeReport::find(const std::string& id) const
{
  for (const auto& c : checks)
    if (c.identity == id)
      return c;
  throw ParameterError("no identity check named " + id);
}

WAntiderivativeReport w_antiderivative_check(double a, double b, double d,
                                             double lambda)
{
  if (!(a > 0.0 && b >= a && std::isfinite(b)))
    throw ParameterError("w_antiderivative_check: requires 0 < a <= b");
  if (!(positive_finite(d) && std::isfinite(lambda) && lambda != 0.0))
    throw ParameterError("w_antiderivative_check: requires d > 0, lambda != 0");

  WAntiderivativeReport rep{a, b, d, lambda, 1e-8, {}};
  const QuadratureOptions tight{.abs_tol = 1e-13};
  auto quad = [&](auto&& f, double lo, double hi) {
    return adaptive_simpson(f, lo, hi, tight).value;
  };
  auto add = [&](std::string id, double claimed, double reference) {
    const double err = std::abs(claimed - reference);
    rep.checks.push_back({std::move(id), claimed, reference, err,
                          err <= rep.tolerance});
  };

  const double wa = lambert_w(a);
  const double wb = lambert_w(b);
  const double q1 = quad([](double y) { return lambert_w(y) / y; }, a, b);
  const double q2 = quad(
      [](double y) {
        const double w = lambert_w(y);
        return w * w / y;
      },
      a, b);

  auto quoted1 = [](double w) { return w * w * (3.0 + 2.0 * w) / 6.0; };
  auto quoted2 = [](double w) { return 0.5 * w * (2.0 + 3.0 * w); };
  add("quoted_w_over_y", quoted1(wb) - quoted1(wa), q1);
  add("quoted_w2_over_y", quoted2(wb) - quoted2(wa), q2);
  add("quoted_rhs1_as_w2_over_y", quoted1(wb) - quoted1(wa), q2);
  add("derived_w_over_y",
      w_over_y_antiderivative(wb) - w_over_y_antiderivative(wa), q1);
  add("derived_w2_over_y",
      w2_over_y_antiderivative(wb) - w2_over_y_antiderivative(wa), q2);

  const double lhs =
      quad([&](double t) { return lambert_w(d * std::exp(lambda * t)); }, a, b);
  const double ya = d * std::exp(lambda * a);
  const double yb = d * std::exp(lambda * b);
  const double mapped = w_over_y_antiderivative(lambert_w(yb)) -
                        w_over_y_antiderivative(lambert_w(ya));
  add("quoted_substitution", mapped, lhs);
  add("scaled_substitution", mapped / lambda, lhs);
  return rep;
}

} // namespace kd
