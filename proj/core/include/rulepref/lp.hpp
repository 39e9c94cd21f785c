#pragma once

#include <cstddef>
#include <vector>

namespace rulepref::lp {

enum class Relation { less_equal, greater_equal, equal };

struct LpRow {
  std::vector<double> coeffs;
  Relation relation = Relation::greater_equal;
  double rhs = 0.0;
};

// maximize objective·x subject to rows; x_j >= 0 unless free_vars[j].
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<LpRow> rows;
  std::vector<bool> free_vars;  // empty: all nonnegative
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Dense two-phase primal simplex with Bland's rule.
LpSolution solve_linear_program(const LinearProgram& lp, double tolerance = 1e-9);

}  // namespace rulepref::lp
