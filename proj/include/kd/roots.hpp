#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

namespace kd {

struct Bracket
{
  double lo = 0.0;
  double hi = 0.0;
};

//! Bisection for a function that is negative at lo and nonnegative at hi.
//! The invariant f(lo) < 0 <= f(hi) holds for the returned bracket, whose
//! width is at most tol.
template <class F>
Bracket bisect_up_crossing(F&& f, double lo, double hi, double tol,
                           std::size_t* evaluations = nullptr,
                           int max_iter = 200)
{
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (evaluations)
      ++*evaluations;
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

struct ScanHit
{
  std::size_t index = 0; // first grid index with f >= 0
  double lo = 0.0;       // previous grid point (f < 0 there)
  double hi = 0.0;       // the grid point itself
};

struct ScanOutcome
{
  std::optional<ScanHit> hit;
  double last_value = 0.0;
  double previous_value = 0.0;
  std::size_t evaluations = 0;
};

//! Walks x_k = start + k * step (k = 1..n, last point clamped to stop) and
//! reports the first point where f(x_k) >= 0.  f(start) is assumed negative.
template <class F>
ScanOutcome scan_first_crossing(F&& f, double start, double stop, double step)
{
  ScanOutcome out;
  double prev_x = start;
  const auto n = static_cast<std::size_t>(std::ceil((stop - start) / step));
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = k == n ? stop : start + static_cast<double>(k) * step;
    const double v = f(x);
    ++out.evaluations;
    out.previous_value = out.last_value;
    out.last_value = v;
    if (v >= 0.0) {
      out.hit = ScanHit{k, prev_x, x};
      return out;
    }
    prev_x = x;
  }
  return out;
}

} // namespace kd
