#include "kd/lp.hpp"

#include "kd/error.hpp"

#include <cmath>
#include <string>

namespace kd::lp {

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::Index;

constexpr double pivot_eps = 1e-11;
constexpr double cost_eps = 1e-11;
constexpr int degenerate_limit = 50;
constexpr std::size_t pivot_limit = 200000;

struct Simplex
{
  Tableau t;
  std::vector<Index> basis;
  Index rows;      // constraint rows; row `rows` is the objective
  Index rhs;       // rhs column
  std::size_t pivots = 0;

  void pivot(Index r, Index c)
  {
    const double p = t(r, c);
    t.row(r) /= p;
    const Eigen::RowVectorXd prow = t.row(r);
    Eigen::VectorXd col = t.col(c);
    col(r) = 0.0;
    t.noalias() -= col * prow;
    t(r, c) = 1.0;
    basis[static_cast<std::size_t>(r)] = c;
    if (++pivots > pivot_limit)
      throw NumericalError("simplex: pivot limit reached");
  }

  // Optimizes the objective row over entering columns [0, allowed).
  void run(Index allowed)
  {
    int degenerate = 0;
    bool bland = false;
    for (;;) {
      Index enter = -1;
      double best = -cost_eps;
      for (Index j = 0; j < allowed; ++j) {
        const double v = t(rows, j);
        if (v < best) {
          enter = j;
          if (bland)
            break;
          best = v;
        }
      }
      if (enter < 0)
        return;

      Index leave = -1;
      double ratio = 0.0;
      for (Index i = 0; i < rows; ++i) {
        const double a = t(i, enter);
        if (a <= pivot_eps)
          continue;
        const double q = std::max(t(i, rhs), 0.0) / a;
        if (leave < 0 || q < ratio - 1e-12 * std::max(1.0, ratio) ||
            (q <= ratio + 1e-12 * std::max(1.0, ratio) &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          leave = i;
          ratio = q;
        }
      }
      if (leave < 0)
        throw NoSolutionError("simplex: objective is unbounded");

      if (ratio <= 1e-14) {
        if (++degenerate > degenerate_limit)
          bland = true;
      } else {
        degenerate = 0;
      }
      pivot(leave, enter);
    }
  }
};

} // namespace

Solution maximize(const Problem& p)
{
  const Index m = p.A.rows();
  const Index n = p.A.cols();
  if (p.b.size() != m || static_cast<Index>(p.rel.size()) != m || p.c.size() != n)
    throw ParameterError("simplex: inconsistent problem dimensions");

  std::vector<Relation> rel = p.rel;
  std::vector<double> sign(static_cast<std::size_t>(m), 1.0);
  Index n_slack = 0, n_art = 0;
  for (Index i = 0; i < m; ++i) {
    auto& r = rel[static_cast<std::size_t>(i)];
    if (p.b(i) < 0.0) {
      sign[static_cast<std::size_t>(i)] = -1.0;
      if (r == Relation::le)
        r = Relation::ge;
      else if (r == Relation::ge)
        r = Relation::le;
    }
    if (r != Relation::eq)
      ++n_slack;
    if (r != Relation::le)
      ++n_art;
  }

  const Index art0 = n + n_slack;
  const Index cols = art0 + n_art + 1;
  Simplex s;
  s.rows = m;
  s.rhs = cols - 1;
  s.t = Tableau::Zero(m + 1, cols);
  s.basis.assign(static_cast<std::size_t>(m), 0);

  Index next_slack = n, next_art = art0;
  for (Index i = 0; i < m; ++i) {
    const double sg = sign[static_cast<std::size_t>(i)];
    s.t.row(i).head(n) = sg * p.A.row(i);
    s.t(i, s.rhs) = sg * p.b(i);
    switch (rel[static_cast<std::size_t>(i)]) {
    case Relation::le:
      s.t(i, next_slack) = 1.0;
      s.basis[static_cast<std::size_t>(i)] = next_slack++;
      break;
    case Relation::ge:
      s.t(i, next_slack++) = -1.0;
      s.t(i, next_art) = 1.0;
      s.basis[static_cast<std::size_t>(i)] = next_art++;
      break;
    case Relation::eq:
      s.t(i, next_art) = 1.0;
      s.basis[static_cast<std::size_t>(i)] = next_art++;
      break;
    }
  }

  // phase 1: maximize -sum(artificials)
  if (n_art > 0) {
    s.t.row(m).segment(art0, n_art).setOnes();
    for (Index i = 0; i < m; ++i)
      if (s.basis[static_cast<std::size_t>(i)] >= art0)
        s.t.row(m) -= s.t.row(i);
    s.run(art0 + n_art);
    const double scale = std::max(1.0, p.b.cwiseAbs().maxCoeff());
    if (s.t(m, s.rhs) < -1e-9 * scale)
      throw InfeasibleError("simplex: constraint set is infeasible (phase-1 "
                            "residual " + std::to_string(-s.t(m, s.rhs)) + ")");
    for (Index i = 0; i < m; ++i) {
      if (s.basis[static_cast<std::size_t>(i)] < art0)
        continue;
      for (Index j = 0; j < art0; ++j)
        if (std::abs(s.t(i, j)) > 1e-9) {
          s.pivot(i, j);
          break;
        }
      // otherwise the row is redundant; its artificial stays basic at zero
    }
  }

  // phase 2
  s.t.row(m).setZero();
  s.t.row(m).head(n) = -p.c.transpose();
  for (Index i = 0; i < m; ++i) {
    const Index b = s.basis[static_cast<std::size_t>(i)];
    if (b < n && p.c(b) != 0.0)
      s.t.row(m) += p.c(b) * s.t.row(i);
  }
  s.run(art0);

  Solution out;
  out.x = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < m; ++i) {
    const Index b = s.basis[static_cast<std::size_t>(i)];
    if (b < n)
      out.x(b) = s.t(i, s.rhs);
  }
  out.objective = p.c.dot(out.x);
  out.pivots = s.pivots;
  return out;
}

} // namespace kd::lp
