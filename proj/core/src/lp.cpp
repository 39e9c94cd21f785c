#include "rulepref/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rulepref/error.hpp"

namespace rulepref::lp {

namespace {

constexpr std::size_t kMaxIterations = 200000;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_(rows * (cols + 1), 0.0), basis_(rows) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c, std::vector<double>& obj) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    const double f = obj[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= n_; ++j) obj[j] -= f * at(r, j);
      obj[c] = 0.0;
    }
    basis_[r] = c;
  }

  void remove_row(std::size_t r) {
    t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r * (n_ + 1)),
             t_.begin() + static_cast<std::ptrdiff_t>((r + 1) * (n_ + 1)));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    --m_;
  }

  // Reduced-cost row for maximizing c·x: obj[j] = c_B·T_j - c_j, obj[n] = c_B·b.
  std::vector<double> objective_row(const std::vector<double>& c) const {
    std::vector<double> obj(n_ + 1, 0.0);
    for (std::size_t j = 0; j < n_; ++j) obj[j] = -c[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) obj[j] += cb * at(i, j);
    }
    return obj;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

enum class PhaseResult { optimal, unbounded };

PhaseResult run_simplex(Tableau& t, std::vector<double>& obj, const std::vector<bool>& allowed, double tol,
                        std::size_t& iterations) {
  for (;;) {
    if (++iterations > kMaxIterations) throw NumericalError("simplex iteration limit exceeded");
    std::size_t enter = t.cols();
    for (std::size_t j = 0; j < t.cols(); ++j) {
      if (allowed[j] && obj[j] < -tol) {
        enter = j;
        break;
      }
    }
    if (enter == t.cols()) return PhaseResult::optimal;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, enter);
      if (a > tol) best = std::min(best, t.rhs(i) / a);
    }
    std::size_t leave = t.rows();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, enter);
      if (a <= tol || t.rhs(i) / a > best + tol) continue;
      if (leave == t.rows() || t.basis()[i] < t.basis()[leave]) leave = i;
    }
    if (leave == t.rows()) return PhaseResult::unbounded;
    t.pivot(leave, enter, obj);
  }
}

}  // namespace

LpSolution solve_linear_program(const LinearProgram& lp, double tolerance) {
  const std::size_t nv = lp.num_vars;
  if (lp.objective.size() != nv) throw ContractError("objective length differs from variable count");
  if (!lp.free_vars.empty() && lp.free_vars.size() != nv) throw ContractError("free_vars length mismatch");
  for (const auto& row : lp.rows) {
    if (row.coeffs.size() != nv) throw ContractError("constraint row length differs from variable count");
  }

  // Columns: structural (free variables split as x+ and x-), slack/surplus, artificial.
  std::vector<std::size_t> pos_col(nv), neg_col(nv, SIZE_MAX);
  std::size_t cols = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    pos_col[j] = cols++;
    if (!lp.free_vars.empty() && lp.free_vars[j]) neg_col[j] = cols++;
  }
  const std::size_t structural = cols;

  const std::size_t m = lp.rows.size();
  std::vector<double> sign(m, 1.0);
  std::vector<Relation> rel(m);
  std::size_t slack_count = 0, artificial_count = 0;
  for (std::size_t i = 0; i < m; ++i) {
    rel[i] = lp.rows[i].relation;
    if (lp.rows[i].rhs < 0) {
      sign[i] = -1.0;
      if (rel[i] == Relation::less_equal) {
        rel[i] = Relation::greater_equal;
      } else if (rel[i] == Relation::greater_equal) {
        rel[i] = Relation::less_equal;
      }
    }
    if (rel[i] != Relation::equal) ++slack_count;
    if (rel[i] != Relation::less_equal) ++artificial_count;
  }
  const std::size_t first_artificial = structural + slack_count;
  cols = first_artificial + artificial_count;

  Tableau t(m, cols);
  std::size_t next_slack = structural, next_art = first_artificial;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    for (std::size_t j = 0; j < nv; ++j) {
      const double a = sign[i] * row.coeffs[j];
      t.at(i, pos_col[j]) = a;
      if (neg_col[j] != SIZE_MAX) t.at(i, neg_col[j]) = -a;
    }
    t.rhs(i) = sign[i] * row.rhs;
    if (rel[i] == Relation::less_equal) {
      t.at(i, next_slack) = 1.0;
      t.basis()[i] = next_slack++;
    } else {
      if (rel[i] == Relation::greater_equal) t.at(i, next_slack++) = -1.0;
      t.at(i, next_art) = 1.0;
      t.basis()[i] = next_art++;
    }
  }

  LpSolution result;
  std::vector<bool> allowed(cols, true);

  if (artificial_count > 0) {
    std::vector<double> c1(cols, 0.0);
    for (std::size_t j = first_artificial; j < cols; ++j) c1[j] = -1.0;
    auto obj = t.objective_row(c1);
    run_simplex(t, obj, allowed, tolerance, result.iterations);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      if (t.basis()[i] >= first_artificial) infeasibility += t.rhs(i);
    }
    double scale = 1.0;
    for (const auto& row : lp.rows) scale = std::max(scale, std::abs(row.rhs));
    if (infeasibility > tolerance * scale * 10.0) {
      result.status = LpStatus::infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis; drop redundant rows.
    for (std::size_t i = 0; i < t.rows();) {
      if (t.basis()[i] < first_artificial) {
        ++i;
        continue;
      }
      std::size_t best = cols;
      double best_abs = tolerance;
      for (std::size_t j = 0; j < first_artificial; ++j) {
        if (std::abs(t.at(i, j)) > best_abs) {
          best_abs = std::abs(t.at(i, j));
          best = j;
        }
      }
      if (best == cols) {
        t.remove_row(i);
        continue;
      }
      t.pivot(i, best, obj);
      ++i;
    }
    for (std::size_t j = first_artificial; j < cols; ++j) allowed[j] = false;
  }

  std::vector<double> c2(cols, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    c2[pos_col[j]] = lp.objective[j];
    if (neg_col[j] != SIZE_MAX) c2[neg_col[j]] = -lp.objective[j];
  }
  auto obj = t.objective_row(c2);
  if (run_simplex(t, obj, allowed, tolerance, result.iterations) == PhaseResult::unbounded) {
    result.status = LpStatus::unbounded;
    return result;
  }

  std::vector<double> values(cols, 0.0);
  for (std::size_t i = 0; i < t.rows(); ++i) values[t.basis()[i]] = t.rhs(i);
  result.x.assign(nv, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    result.x[j] = values[pos_col[j]] - (neg_col[j] != SIZE_MAX ? values[neg_col[j]] : 0.0);
    if (lp.free_vars.empty() || !lp.free_vars[j]) result.x[j] = std::max(0.0, result.x[j]);
  }
  result.objective = 0.0;
  for (std::size_t j = 0; j < nv; ++j) result.objective += lp.objective[j] * result.x[j];
  result.status = LpStatus::optimal;
  return result;
}

}  // namespace rulepref::lp
