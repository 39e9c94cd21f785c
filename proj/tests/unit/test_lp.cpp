#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "rulepref/lp.hpp"

namespace rulepref::lp {
namespace {

// Gaussian elimination with partial pivoting; nullopt when singular.
std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-10) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

// Best objective over all basic feasible points of {rows, x >= 0}.
std::optional<double> enumerate_vertices(const LinearProgram& lp) {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (const auto& r : lp.rows) {
    a.push_back(r.coeffs);
    b.push_back(r.rhs);
  }
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    std::vector<double> e(lp.num_vars, 0.0);
    e[j] = 1.0;
    a.push_back(e);
    b.push_back(0.0);
  }
  const std::size_t m = a.size(), n = lp.num_vars;
  std::optional<double> best;
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n) continue;
    bool has_all_equalities = true;
    for (std::size_t i = 0; i < lp.rows.size(); ++i)
      if (lp.rows[i].relation == Relation::equal && !(mask & (1U << i))) has_all_equalities = false;
    if (!has_all_equalities) continue;
    std::vector<std::vector<double>> sa;
    std::vector<double> sb;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1U << i)) {
        sa.push_back(a[i]);
        sb.push_back(b[i]);
      }
    const auto x = solve_square(sa, sb);
    if (!x) continue;
    bool feasible = true;
    for (std::size_t j = 0; j < n; ++j) feasible &= (*x)[j] >= -1e-9;
    for (const auto& r : lp.rows) {
      double lhs = 0;
      for (std::size_t j = 0; j < n; ++j) lhs += r.coeffs[j] * (*x)[j];
      if (r.relation == Relation::greater_equal) feasible &= lhs >= r.rhs - 1e-9;
      if (r.relation == Relation::less_equal) feasible &= lhs <= r.rhs + 1e-9;
      if (r.relation == Relation::equal) feasible &= std::abs(lhs - r.rhs) <= 1e-9;
    }
    if (!feasible) continue;
    double obj = 0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * (*x)[j];
    if (!best || obj > *best) best = obj;
  }
  return best;
}

TEST(Simplex, TextbookMaximum) {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18.
  LinearProgram lp{2, {3, 5}, {{{1, 0}, Relation::less_equal, 4}, {{0, 2}, Relation::less_equal, 12},
                               {{3, 2}, Relation::less_equal, 18}}, {}};
  const auto s = solve_linear_program(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.objective, 36.0, 1e-9);
  EXPECT_NEAR(s.x[0], 2.0, 1e-9);
  EXPECT_NEAR(s.x[1], 6.0, 1e-9);
}

TEST(Simplex, Infeasible) {
  LinearProgram lp{1, {1}, {{{1}, Relation::greater_equal, 2}, {{1}, Relation::less_equal, 1}}, {}};
  EXPECT_EQ(solve_linear_program(lp).status, LpStatus::infeasible);
}

TEST(Simplex, Unbounded) {
  LinearProgram lp{2, {1, 0}, {{{1, -1}, Relation::less_equal, 1}}, {}};
  EXPECT_EQ(solve_linear_program(lp).status, LpStatus::unbounded);
}

TEST(Simplex, EqualityAndFreeVariable) {
  // max t s.t. x + y = 1, x - t >= 0, y - t >= 0; t free.
  LinearProgram lp{3, {0, 0, 1},
                   {{{1, 1, 0}, Relation::equal, 1}, {{1, 0, -1}, Relation::greater_equal, 0},
                    {{0, 1, -1}, Relation::greater_equal, 0}},
                   {false, false, true}};
  const auto s = solve_linear_program(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.objective, 0.5, 1e-9);
  // Free variable attaining a negative optimum.
  lp.rows[1].rhs = 2.0;
  lp.rows[2].rhs = 2.0;
  const auto neg = solve_linear_program(lp);
  ASSERT_EQ(neg.status, LpStatus::optimal);
  EXPECT_NEAR(neg.objective, -1.5, 1e-9);
}

TEST(Simplex, RedundantEqualities) {
  LinearProgram lp{2, {1, 1}, {{{1, 1}, Relation::equal, 1}, {{2, 2}, Relation::equal, 2}}, {}};
  const auto s = solve_linear_program(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-9);
}

TEST(Simplex, DegenerateCycleProneProblem) {
  // Beale's example cycles under the textbook rule.
  LinearProgram lp{4, {0.75, -150, 0.02, -6},
                   {{{0.25, -60, -0.04, 9}, Relation::less_equal, 0},
                    {{0.5, -90, -0.02, 3}, Relation::less_equal, 0},
                    {{0, 0, 1, 0}, Relation::less_equal, 1}},
                   {}};
  const auto s = solve_linear_program(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.objective, 0.05, 1e-9);
}

TEST(SimplexProperty, MatchesVertexEnumeration) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    const std::size_t m = 1 + rng() % 5;
    LinearProgram lp;
    lp.num_vars = n;
    for (std::size_t j = 0; j < n; ++j) lp.objective.push_back(u(rng));
    for (std::size_t i = 0; i < m; ++i) {
      LpRow r;
      for (std::size_t j = 0; j < n; ++j) r.coeffs.push_back(u(rng));
      const auto kind = rng() % 5;
      r.relation = kind < 2 ? Relation::less_equal : kind < 4 ? Relation::greater_equal : Relation::equal;
      r.rhs = u(rng);
      lp.rows.push_back(r);
    }
    // A box row keeps every instance bounded.
    lp.rows.push_back({std::vector<double>(n, 1.0), Relation::less_equal, 3.0});
    const auto oracle = enumerate_vertices(lp);
    const auto s = solve_linear_program(lp);
    if (!oracle) {
      EXPECT_EQ(s.status, LpStatus::infeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(s.status, LpStatus::optimal) << "trial " << trial;
    EXPECT_NEAR(s.objective, *oracle, 1e-7) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

}  // namespace
}  // namespace rulepref::lp
