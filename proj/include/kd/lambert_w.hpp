#pragma once

#include "kd/error.hpp"

#include <cmath>
#include <limits>

namespace kd {

//! Principal branch of the Lambert W function (inverse of w -> w e^w) for
//! x >= -1/e, by Halley iteration.
//!
//! Templated on the scalar so that callers that need residuals below the
//! resolution of double (|w e^w - x| near x = 1e6 is bounded below by the
//! spacing of doubles, about 1.2e-10) can evaluate in long double.
template <class Real>
Real lambert_w(Real x)
{
  using std::abs;
  using std::exp;
  using std::log;
  using std::sqrt;

  const Real e = exp(Real(1));
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real branch = e * x + Real(1); // zero at the branch point x = -1/e

  if (!(x == x))
    throw DomainError("lambert_w: argument is NaN");
  if (branch < Real(0)) {
    if (branch < Real(-8) * eps)
      throw DomainError("lambert_w: argument below -1/e");
    return Real(-1);
  }
  if (x == Real(0))
    return Real(0);

  Real w;
  if (x < Real(-0.25)) {
    // series about the branch point in p = sqrt(2(ex + 1))
    const Real p = sqrt(Real(2) * branch);
    w = Real(-1) + p - p * p / Real(3) + Real(11) / Real(72) * p * p * p;
    if (p < Real(1e-3) * sqrt(sqrt(eps)))
      return w;
  } else if (x <= Real(3)) {
    w = log(Real(1) + x);
  } else {
    const Real l1 = log(x);
    const Real l2 = log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int it = 0; it < 50; ++it) {
    const Real ew = exp(w);
    const Real f = w * ew - x;
    const Real wp1 = w + Real(1);
    const Real denom = ew * wp1 - (w + Real(2)) * f / (Real(2) * wp1);
    if (denom == Real(0))
      break;
    const Real step = f / denom;
    w -= step;
    if (abs(step) <= Real(2) * eps * (abs(w) + eps))
      break;
  }
  return w < Real(-1) ? Real(-1) : w;
}

//! W(e^u) without forming e^u, so that large u do not overflow.
double wright_omega(double u);

} // namespace kd
