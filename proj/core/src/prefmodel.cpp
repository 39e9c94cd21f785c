#include "rulepref/prefmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "rulepref/error.hpp"
#include "rulepref/lp.hpp"

namespace rulepref::prefmodel {

std::vector<double> RuleFeatureVector::coefficients() const {
  std::vector<double> a(conditions.size() + 3);
  for (std::size_t j = 0; j < conditions.size(); ++j) a[j] = conditions[j] ? 1.0 : 0.0;
  a[conditions.size()] = support;
  a[conditions.size() + 1] = confirmation;
  a[conditions.size() + 2] = -complexity_normalized;
  return a;
}

RuleFeatureVector rule_features(const rulegen::Rule& rule, std::size_t d) {
  if (d == 0) throw ContractError("feature count must be positive");
  RuleFeatureVector rv;
  rv.conditions.assign(d, 0);
  for (const auto& c : rule.antecedent) {
    if (c.feature >= d) throw ContractError("condition feature index out of range");
    rv.conditions[c.feature] = 1;
  }
  rv.support = rule.metrics.support;
  rv.confirmation = rule.metrics.confirmation;
  rv.complexity_normalized = static_cast<double>(rule.metrics.complexity) / static_cast<double>(d);
  return rv;
}

FeatureMap feature_map(std::span<const rulegen::Rule> rules, std::size_t d) {
  FeatureMap out;
  for (const auto& r : rules) out.emplace(r.id, rule_features(r, d));
  return out;
}

WeightVector::WeightVector(std::vector<double> flat, double tolerance) : w_(std::move(flat)) {
  if (w_.size() < 4) throw ContractError("weight vector needs d + 3 >= 4 components");
  double sum = 0.0;
  for (double v : w_) {
    if (!std::isfinite(v) || v < -tolerance) throw ContractError("weights must be finite and nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) throw ContractError("weights must sum to 1");
  for (double& v : w_) v = std::max(0.0, v);
}

WeightVector WeightVector::uniform(std::size_t num_features) {
  const std::size_t n = num_features + 3;
  return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

nlohmann::json weights_to_json(const WeightVector& w, const data::FeatureSchema& schema) {
  if (w.num_features() != schema.size()) throw ContractError("weight vector does not match the schema");
  nlohmann::json cond = nlohmann::json::object();
  for (std::size_t j = 0; j < schema.size(); ++j) cond[schema[j].name] = w.cond(j);
  return {{"cond", cond}, {"supp", w.supp()}, {"conf", w.conf()}, {"comp", w.comp()}};
}

WeightVector weights_from_json(const nlohmann::json& j, const data::FeatureSchema& schema, bool normalize) {
  try {
    std::vector<double> flat(schema.size() + 3, 0.0);
    const auto& cond = j.at("cond");
    for (auto it = cond.begin(); it != cond.end(); ++it) {
      const auto idx = schema.index_of(it.key());
      if (!idx) throw DataError("weight for unknown feature '" + it.key() + "'");
      flat[*idx] = it.value().get<double>();
    }
    flat[schema.size()] = j.at("supp").get<double>();
    flat[schema.size() + 1] = j.at("conf").get<double>();
    flat[schema.size() + 2] = j.at("comp").get<double>();
    if (normalize) {
      const double total = std::accumulate(flat.begin(), flat.end(), 0.0);
      if (!(total > 0.0)) throw DataError("weights sum to zero");
      for (double& v : flat) v /= total;
    }
    return WeightVector(std::move(flat), 1e-6);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid weight vector JSON: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("invalid weight vector: ") + e.what());
  }
}

double prus_score(const RuleFeatureVector& rv, const WeightVector& w) {
  if (rv.num_features() != w.num_features()) throw ContractError("rule features and weights differ in dimension");
  double s = 0.0;
  for (std::size_t j = 0; j < rv.conditions.size(); ++j) {
    if (rv.conditions[j]) s += w.cond(j);
  }
  return s + w.supp() * rv.support + w.conf() * rv.confirmation - w.comp() * rv.complexity_normalized;
}

ReferenceRanking::ReferenceRanking(std::vector<RuleId> ids) : ids_(std::move(ids)) {
  if (ids_.size() < 2) throw ContractError("a reference ranking needs at least 2 rules");
  std::set<RuleId> seen;
  for (RuleId id : ids_) {
    if (!seen.insert(id).second) throw ContractError("duplicate rule id " + std::to_string(id) + " in ranking");
  }
}

bool ReferenceRanking::contains(RuleId id) const { return std::find(ids_.begin(), ids_.end(), id) != ids_.end(); }

std::string_view to_string(PolytopeMode mode) { return mode == PolytopeMode::max_margin ? "max-margin" : "interior"; }

std::size_t PreferencePolytope::ranking_rows() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const PolytopeRow& r) { return r.kind == PolytopeRow::Kind::ranking; }));
}

double PreferencePolytope::min_slack(std::span<const double> w) const {
  if (w.size() != dims) throw ContractError("point dimension differs from polytope");
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    double v = -r.rhs;
    for (std::size_t i = 0; i < dims; ++i) v += r.coeffs[i] * w[i];
    slack = std::min(slack, v);
  }
  return slack;
}

bool PreferencePolytope::contains(std::span<const double> w, double tolerance) const {
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  return std::abs(sum - 1.0) <= tolerance && min_slack(w) >= -tolerance;
}

PreferencePolytope build_polytope(const ReferenceRanking& reference, const FeatureMap& features, PolytopeMode mode) {
  if (reference.size() < 2) throw ContractError("a reference ranking needs at least 2 rules");
  std::vector<std::vector<double>> coeffs;
  std::set<RuleId> seen;
  for (RuleId id : reference.ids()) {
    if (!seen.insert(id).second) throw ContractError("duplicate rule id " + std::to_string(id) + " in ranking");
    const auto it = features.find(id);
    if (it == features.end()) throw ContractError("rule " + std::to_string(id) + " is not among the candidates");
    coeffs.push_back(it->second.coefficients());
  }
  PreferencePolytope p;
  p.dims = coeffs.front().size();
  p.mode = mode;
  for (std::size_t k = 0; k + 1 < coeffs.size(); ++k) {
    if (coeffs[k + 1].size() != p.dims) throw ContractError("rule feature vectors differ in dimension");
    PolytopeRow row;
    row.kind = PolytopeRow::Kind::ranking;
    row.coeffs.resize(p.dims);
    for (std::size_t i = 0; i < p.dims; ++i) row.coeffs[i] = coeffs[k][i] - coeffs[k + 1][i];
    row.eps_coeff = mode == PolytopeMode::max_margin ? -1.0 : 0.0;
    p.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < p.dims; ++i) {
    PolytopeRow row;
    row.kind = PolytopeRow::Kind::bound;
    row.coeffs.assign(p.dims, 0.0);
    row.coeffs[i] = 1.0;
    row.eps_coeff = mode == PolytopeMode::interior ? -1.0 : 0.0;
    p.rows.push_back(std::move(row));
  }
  return p;
}

nlohmann::json polytope_to_json(const PreferencePolytope& polytope) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : polytope.rows) {
    rows.push_back({{"kind", r.kind == PolytopeRow::Kind::ranking ? "ranking" : "bound"},
                    {"coeffs", r.coeffs},
                    {"eps", r.eps_coeff},
                    {"rhs", r.rhs}});
  }
  return {{"dims", polytope.dims}, {"mode", to_string(polytope.mode)}, {"rows", rows}, {"sum", 1.0}};
}

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::weak:
      return "weak";
    case LpStatus::infeasible:
      break;
  }
  return "infeasible";
}

LpResult solve_lp(const PreferencePolytope& polytope, double tolerance) {
  const std::size_t n = polytope.dims;
  lp::LinearProgram lp;
  lp.num_vars = n + 1;
  lp.objective.assign(n + 1, 0.0);
  lp.objective[n] = 1.0;
  lp.free_vars.assign(n + 1, false);
  lp.free_vars[n] = true;
  for (const auto& r : polytope.rows) {
    // Plain nonnegativity is carried by the variable bounds.
    if (r.kind == PolytopeRow::Kind::bound && r.eps_coeff == 0.0 && r.rhs == 0.0) continue;
    lp::LpRow row;
    row.coeffs = r.coeffs;
    row.coeffs.push_back(r.eps_coeff);
    row.relation = lp::Relation::greater_equal;
    row.rhs = r.rhs;
    lp.rows.push_back(std::move(row));
  }
  lp::LpRow sum;
  sum.coeffs.assign(n + 1, 1.0);
  sum.coeffs[n] = 0.0;
  sum.relation = lp::Relation::equal;
  sum.rhs = 1.0;
  lp.rows.push_back(std::move(sum));

  const auto sol = lp::solve_linear_program(lp, tolerance);
  LpResult out;
  out.iterations = sol.iterations;
  if (sol.status == lp::LpStatus::unbounded) throw NumericalError("margin LP is unbounded");
  if (sol.status != lp::LpStatus::optimal) return out;
  out.epsilon = sol.x[n];
  if (out.epsilon < -tolerance) return out;
  std::vector<double> w(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  out.weights = WeightVector(std::move(w), 1e-7);
  out.status = out.epsilon > tolerance ? LpStatus::optimal : LpStatus::weak;
  return out;
}

std::vector<ScoredRule> rank_rules(const FeatureMap& candidates, const WeightVector& w) {
  std::vector<ScoredRule> out;
  out.reserve(candidates.size());
  for (const auto& [id, rv] : candidates) out.push_back({id, prus_score(rv, w)});
  std::stable_sort(out.begin(), out.end(), [](const ScoredRule& a, const ScoredRule& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return out;
}

}  // namespace rulepref::prefmodel
