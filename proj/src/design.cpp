#include "kd/design.hpp"

#include "kd/error.hpp"
#include "kd/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kd {

namespace {

double interp(const std::vector<double>& x, const std::vector<double>& y,
              double t)
{
  if (t <= x.front())
    return y.front();
  if (t >= x.back())
    return y.back();
  auto it = std::upper_bound(x.begin(), x.end(), t);
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + w * (y[i] - y[i - 1]);
}

} // namespace

TimeDesign TimeDesign::uniform() { return TimeDesign{}; }

TimeDesign TimeDesign::power(double exponent)
{
  if (!(std::isfinite(exponent) && exponent > 0.0))
    throw ParameterError("power design: exponent must be positive");
  TimeDesign d;
  d.kind_ = exponent == 1.0 ? Kind::uniform : Kind::power;
  d.exponent_ = exponent;
  return d;
}

TimeDesign TimeDesign::tabulated_quantile(std::vector<double> p,
                                          std::vector<double> q)
{
  if (p.size() != q.size() || p.size() < 2)
    throw ParameterError("tabulated design: need at least two (p, q) pairs");
  if (p.front() != 0.0 || p.back() != 1.0 || q.front() != 0.0 || q.back() != 1.0)
    throw ParameterError("tabulated design: both columns must run from 0 to 1");
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!(p[i] > p[i - 1]) || !(q[i] > q[i - 1]))
      throw ParameterError("tabulated design: columns must be strictly increasing");
  TimeDesign d;
  d.kind_ = Kind::tabulated;
  d.p_ = std::move(p);
  d.q_ = std::move(q);
  return d;
}

bool TimeDesign::is_uniform() const { return kind_ == Kind::uniform; }

double TimeDesign::cdf(double s) const
{
  s = std::clamp(s, 0.0, 1.0);
  switch (kind_) {
  case Kind::uniform:
    return s;
  case Kind::power:
    return std::pow(s, exponent_);
  case Kind::tabulated:
    return interp(q_, p_, s);
  }
  return s;
}

double TimeDesign::density(double s) const
{
  if (s < 0.0 || s > 1.0)
    return 0.0;
  switch (kind_) {
  case Kind::uniform:
    return 1.0;
  case Kind::power:
    return exponent_ * std::pow(s, exponent_ - 1.0);
  case Kind::tabulated: {
    auto it = std::upper_bound(q_.begin(), q_.end(), s);
    auto i = static_cast<std::size_t>(it - q_.begin());
    i = std::clamp<std::size_t>(i, 1, q_.size() - 1);
    return (p_[i] - p_[i - 1]) / (q_[i] - q_[i - 1]);
  }
  }
  return 1.0;
}

double TimeDesign::quantile(double p) const
{
  p = std::clamp(p, 0.0, 1.0);
  switch (kind_) {
  case Kind::uniform:
    return p;
  case Kind::power:
    return std::pow(p, 1.0 / exponent_);
  case Kind::tabulated:
    return interp(p_, q_, p);
  }
  return p;
}

std::vector<double> TimeDesign::breakpoints() const
{
  if (kind_ != Kind::tabulated)
    return {};
  return {q_.begin() + 1, q_.end() - 1};
}

std::string TimeDesign::name() const
{
  std::ostringstream os;
  os.precision(10);
  switch (kind_) {
  case Kind::uniform:
    return "uniform";
  case Kind::power:
    os << "power(" << exponent_ << ")";
    return os.str();
  case Kind::tabulated:
    os << "tabulated(" << p_.size() << " nodes)";
    return os.str();
  }
  return "uniform";
}

std::vector<double> TimeDesign::sample_times(std::size_t n) const
{
  std::vector<double> t(n);
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = nn * quantile(static_cast<double>(i + 1) / nn);
  return t;
}

TimeDesign load_tabulated_design(const std::string& csv_path)
{
  auto [p, q] = io::read_two_column_csv(csv_path);
  return TimeDesign::tabulated_quantile(std::move(p), std::move(q));
}

} // namespace kd
