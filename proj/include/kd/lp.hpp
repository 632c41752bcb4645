#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace kd::lp {

enum class Relation
{
  le,
  ge,
  eq
};

//! maximize c^T x subject to A x (rel) b, x >= 0.
struct Problem
{
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<Relation> rel;
  Eigen::VectorXd c;
};

struct Solution
{
  Eigen::VectorXd x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

//! Dense two-phase tableau simplex.  Dantzig pricing with lowest-index
//! tie-breaks, falling back to Bland's rule after a run of degenerate pivots,
//! so the pivot sequence (and the result) is reproducible.
//! Throws InfeasibleError, NoSolutionError (unbounded) or NumericalError
//! (pivot limit).
Solution maximize(const Problem& problem);

} // namespace kd::lp
