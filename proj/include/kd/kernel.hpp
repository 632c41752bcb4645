#pragma once

#include "kd/alternative.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace kd {

//! How make_optimal_kernel completes the mass outside [-rho*, rho*].
enum class TailPolicy
{
  //! Symmetric piecewise-linear pieces on |z| > rho*: rise from the boundary
  //! value with slope L to a peak, then fall with slope L to zero, sized so
  //! the kernel integrates to one.
  lipschitz_bump,
  //! No completion; the result is a sub-density and flagged as such.
  none
};

struct OptimalKernelOptions
{
  TailPolicy tail = TailPolicy::lipschitz_bump;
  //! Declared bounds; when absent the smallest values compatible with the
  //! construction are used.
  std::optional<double> lipschitz_const;
  std::optional<double> sup_bound;
};

namespace kern {

struct Gaussian
{
};
struct Epanechnikov
{
};
struct Triangular
{
};
struct Laplace
{
  double rate;
};
struct Tabulated
{
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> cumulative; // trapezoid mass up to grid[i]
};
struct Optimal
{
  Alternative alternative;
  double rho_star;
  TailPolicy tail;
  double scale;     // 1 / (2 int_0^inf m0)
  double boundary;  // K*(rho*)
  double peak;      // top of the completion piece
  double rise_end;  // |z| where the completion peaks
  double fall_end;  // |z| where the completion reaches zero
  double slope;     // slope of the completion pieces
};

} // namespace kern

//! A symmetric, Lipschitz probability density with declared Lipschitz
//! constant and sup bound.  Immutable; every constructor validates the
//! declared bounds, symmetry, nonnegativity and unit mass on a dense grid and
//! throws ConstructionError if any of them fails.
class Kernel
{
public:
  using Form = std::variant<kern::Gaussian, kern::Epanechnikov, kern::Triangular,
                            kern::Laplace, kern::Tabulated, kern::Optimal>;

  static Kernel gaussian();
  //! 0.75 (1 - z^2) on [-1, 1]
  static Kernel epanechnikov();
  //! 1 - |z| on [-1, 1]
  static Kernel triangular();
  //! (rate / 2) exp(-rate |z|)
  static Kernel laplace(double rate);
  //! Linear interpolation of (grid, values), zero outside the grid range.
  static Kernel tabulated(std::vector<double> grid, std::vector<double> values,
                          double lipschitz_const, double sup_bound,
                          std::string name = "tabulated");

  double operator()(double z) const;
  double cdf(double z) const;
  double quantile(double p) const;

  const std::string& name() const { return name_; }
  double lipschitz_const() const { return lipschitz_; }
  double sup_bound() const { return sup_bound_; }
  //! Smallest r with K(z) = 0 for |z| > r; +inf for infinite support.
  double support_radius() const { return support_; }
  bool compact() const;
  //! Radius beyond which the mass is below 1e-12 (the support radius for
  //! compact kernels).
  double integration_radius() const { return integration_radius_; }
  //! Nonnegative abscissae where K has kinks.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  bool is_subdensity() const { return subdensity_; }
  const Form& form() const { return form_; }

private:
  Kernel(std::string name, Form form, double lipschitz, double sup_bound,
         double support, double integration_radius,
         std::vector<double> breakpoints, bool subdensity);
  void validate() const;
  double mass_between_zero_and(double x) const;

  friend Kernel make_optimal_kernel(const Alternative&, double,
                                    const OptimalKernelOptions&);

  std::string name_;
  Form form_;
  double lipschitz_;
  double sup_bound_;
  double support_;
  double integration_radius_;
  std::vector<double> breakpoints_;
  bool subdensity_;
};

//! K(z / h) / h
double rescale_eval(const Kernel& k, double h, double z);

//! Tabulated kernel from a two-column (z, K(z)) CSV file.
Kernel load_tabulated_kernel(const std::filesystem::path& csv,
                             double lipschitz_const, double sup_bound);

//! K*(z) = m0(rho* - |z|) / (2 int_0^inf m0) on [-rho*, rho*], completed
//! outside according to the tail policy.
Kernel make_optimal_kernel(const Alternative& m0, double rho_star,
                           const OptimalKernelOptions& options = {});

} // namespace kd
