#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

namespace kd {

struct QuadratureOptions
{
  double abs_tol = 1e-10;
  //! Hard recursion cap; a branch that reaches it is accepted as is.
  int max_depth = 48;
  //! Levels that are always refined, so that narrow features are not missed
  //! by the first five samples.
  int min_depth = 4;
};

struct QuadratureResult
{
  double value = 0.0;
  std::size_t evaluations = 0;
  bool depth_capped = false;
};

namespace detail {

template <class F>
struct SimpsonState
{
  F& f;
  const QuadratureOptions& opt;
  QuadratureResult& out;

  double recurse(double a, double b, double fa, double fm, double fb,
                 double whole, double tol, int depth)
  {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    out.evaluations += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= opt.max_depth) {
      out.depth_capped = true;
      return left + right + delta / 15.0;
    }
    if (depth >= opt.min_depth && std::abs(delta) <= 15.0 * tol)
      return left + right + delta / 15.0;
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

} // namespace detail

//! Adaptive Simpson quadrature of f over [a, b] with absolute tolerance.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b,
                                  const QuadratureOptions& opt = {})
{
  QuadratureResult out;
  if (a == b)
    return out;
  if (a > b) {
    out = adaptive_simpson(f, b, a, opt);
    out.value = -out.value;
    return out;
  }
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  out.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::SimpsonState<std::remove_reference_t<F>> state{f, opt, out};
  out.value = state.recurse(a, b, fa, fm, fb, whole, opt.abs_tol, 0);
  return out;
}

//! Same as adaptive_simpson, but the interval is first split at every cut
//! point lying strictly inside (a, b).  Use it for integrands with kinks or
//! jumps at known locations.
template <class F>
QuadratureResult adaptive_simpson_split(F&& f, double a, double b,
                                        std::span<const double> cuts,
                                        const QuadratureOptions& opt = {})
{
  if (a > b) {
    auto out = adaptive_simpson_split(f, b, a, cuts, opt);
    out.value = -out.value;
    return out;
  }
  std::vector<double> nodes{a};
  for (double c : cuts)
    if (c > a && c < b)
      nodes.push_back(c);
  nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  QuadratureOptions piece_opt = opt;
  piece_opt.abs_tol = opt.abs_tol / static_cast<double>(nodes.size() - 1);
  QuadratureResult total;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    auto r = adaptive_simpson(f, nodes[i], nodes[i + 1], piece_opt);
    total.value += r.value;
    total.evaluations += r.evaluations;
    total.depth_capped = total.depth_capped || r.depth_capped;
  }
  return total;
}

} // namespace kd
