#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace kd {

//! Generic drift alternatives m0.  Every form vanishes for t < 0 and is
//! nonnegative; truncated forms vanish for t > T.
namespace alt {

struct Step
{
  double level;
};

struct TruncatedLinear
{
  double slope;
  double horizon; // T
};

struct TruncatedExponential
{
  double rate; // m0(t) = exp(rate * t) on [0, T]
  double horizon;
};

struct MichaelisMenten
{
  double substrate0; // S0
  double km;
  double vmax;
  double horizon;
};

struct Tabulated
{
  std::vector<double> grid;
  std::vector<double> values;
};

} // namespace alt

class Alternative
{
public:
  using Form = std::variant<alt::Step, alt::TruncatedLinear,
                            alt::TruncatedExponential, alt::MichaelisMenten,
                            alt::Tabulated>;

  static Alternative step(double level);
  static Alternative truncated_linear(double slope, double horizon);
  static Alternative truncated_exponential(double rate, double horizon);
  static Alternative michaelis_menten(double s0, double km, double vmax,
                                      double horizon);
  static Alternative tabulated(std::vector<double> grid,
                               std::vector<double> values);

  //! m0(t)
  double operator()(double t) const;

  //! Integral of m0 over [a, b]; closed form for every built-in form.
  double integral(double a, double b) const;
  //! Integral of m0^2 over [a, b].
  double sq_integral(double a, double b) const;
  //! Integral of m0 over [0, inf); +inf for the step.
  double total_integral() const;

  //! Upper bound of m0 on [a, b] (exact for the monotone built-ins).
  double sup_on(double a, double b) const;

  //! Kinks and discontinuities, ascending.
  std::vector<double> breakpoints() const;
  //! Discontinuities only.
  std::vector<double> jumps() const;

  double lipschitz_per_piece() const;
  //! T for truncated forms, +inf otherwise.
  double support_end() const;
  bool vanishes_at_origin() const { return (*this)(0.0) == 0.0; }
  //! m0 nondecreasing on [0, support_end()].
  bool nondecreasing_on_support() const;

  double amplitude() const { return amplitude_; }
  //! kappa * m0
  Alternative scaled(double kappa) const;

  const Form& form() const { return form_; }
  std::string name() const;

private:
  explicit Alternative(Form form);
  double base(double t) const;

  Form form_;
  double amplitude_ = 1.0;
};

Alternative load_tabulated_alternative(const std::filesystem::path& csv);

//! Integrals by adaptive quadrature, split at the breakpoints.  Independent
//! of the closed forms used by Alternative::integral / sq_integral.
double integral_by_quadrature(const Alternative& m0, double a, double b);
double sq_integral_by_quadrature(const Alternative& m0, double a, double b);

//! Substrate concentration solving d[S]/dt = -vmax [S] / (km + [S]) with
//! [S](0) = s0:  [S](t) = km W((s0/km) exp((s0 - vmax t) / km)).
double substrate(double t, double s0, double km, double vmax);

//! Antiderivatives of W(y)/y and W(y)^2/y as functions of w = W(y).
double w_over_y_antiderivative(double w);    // w + w^2/2
double w2_over_y_antiderivative(double w);   // w^2/2 + w^3/3

struct IdentityCheck
{
  std::string identity;
  double claimed = 0.0;   // value of the right-hand side as stated
  double reference = 0.0; // adaptive quadrature of the left-hand side
  double abs_error = 0.0;
  bool holds = false;
};

//! Compares closed-form W-antiderivative identities against adaptive
//! quadrature of the integrand.  Identities, by id:
//!   quoted_w_over_y          int W/y dy   = (1/6) W^2 (3 + 2W)
//!   quoted_w2_over_y         int W^2/y dy = (1/2) W (2 + 3W)
//!   quoted_rhs1_as_w2_over_y int W^2/y dy = (1/6) W^2 (3 + 2W)
//!   derived_w_over_y         int W/y dy   = W + W^2/2
//!   derived_w2_over_y        int W^2/y dy = W^2/2 + W^3/3
//!   quoted_substitution      int_a^b W(d e^{lt}) dt = int W(y)/y dy over
//!                            [d e^{la}, d e^{lb}]
//!   scaled_substitution      same with the 1/l Jacobian factor
//! The y-identities use (a, b) as y-limits; the substitutions use them as
//! t-limits.
struct WAntiderivativeReport
{
  double a = 0.0;
  double b = 0.0;
  double d = 0.0;
  double lambda = 0.0;
  double tolerance = 1e-8;
  std::vector<IdentityCheck> checks;

  const IdentityCheck& find(const std::string& identity) const;
};

WAntiderivativeReport w_antiderivative_check(double a, double b, double d,
                                             double lambda);

} // namespace kd
