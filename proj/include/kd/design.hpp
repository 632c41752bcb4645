#pragma once

#include <string>
#include <vector>

namespace kd {

//! Distribution F_T on [0, 1] placing observation times t_ni = n F_T^{-1}(i/n).
class TimeDesign
{
public:
  enum class Kind
  {
    uniform,
    power,     // F_T(s) = s^k, f_T(s) = k s^(k-1)
    tabulated  // piecewise-linear quantile function
  };

  static TimeDesign uniform();
  static TimeDesign power(double exponent);
  //! Quantile function through (p_i, q_i); both columns strictly increasing
  //! from 0 to 1.
  static TimeDesign tabulated_quantile(std::vector<double> p,
                                       std::vector<double> q);

  double cdf(double s) const;
  double density(double s) const;
  double quantile(double p) const;
  //! Points in (0, 1) where the density jumps.
  std::vector<double> breakpoints() const;

  Kind kind() const { return kind_; }
  double exponent() const { return exponent_; }
  bool is_uniform() const;
  std::string name() const;

  //! n F_T^{-1}(i/n) for i = 1..n.
  std::vector<double> sample_times(std::size_t n) const;

private:
  TimeDesign() = default;

  Kind kind_ = Kind::uniform;
  double exponent_ = 1.0;
  std::vector<double> p_;
  std::vector<double> q_;
};

TimeDesign load_tabulated_design(const std::string& csv_path);

} // namespace kd
