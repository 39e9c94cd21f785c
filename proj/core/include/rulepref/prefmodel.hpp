#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rulepref/data.hpp"
#include "rulepref/rulegen.hpp"

namespace rulepref::prefmodel {

using rulegen::RuleId;

// Quantities PRUS consumes for one rule.
struct RuleFeatureVector {
  std::vector<std::uint8_t> conditions;  // indicator per feature
  double support = 0.0;
  double confirmation = 0.0;
  double complexity_normalized = 0.0;  // complexity / d

  std::size_t num_features() const noexcept { return conditions.size(); }
  // Coefficients a(r) with PRUS(r) = a(r)·w in the flat weight layout
  // [cond_1..cond_d, supp, conf, comp].
  std::vector<double> coefficients() const;
};

RuleFeatureVector rule_features(const rulegen::Rule& rule, std::size_t d);

using FeatureMap = std::map<RuleId, RuleFeatureVector>;

FeatureMap feature_map(std::span<const rulegen::Rule> rules, std::size_t d);

class WeightVector {
 public:
  WeightVector() = default;
  // Validates nonnegativity and unit sum within `tolerance`.
  explicit WeightVector(std::vector<double> flat, double tolerance = 1e-9);

  static WeightVector uniform(std::size_t num_features);

  std::size_t size() const noexcept { return w_.size(); }
  std::size_t num_features() const noexcept { return w_.size() - 3; }
  double cond(std::size_t j) const { return w_.at(j); }
  double supp() const { return w_[w_.size() - 3]; }
  double conf() const { return w_[w_.size() - 2]; }
  double comp() const { return w_[w_.size() - 1]; }
  const std::vector<double>& flat() const noexcept { return w_; }

  bool operator==(const WeightVector&) const = default;

 private:
  std::vector<double> w_;
};

nlohmann::json weights_to_json(const WeightVector& w, const data::FeatureSchema& schema);
// With `normalize`, rounded printed weights are rescaled to unit sum first.
WeightVector weights_from_json(const nlohmann::json& j, const data::FeatureSchema& schema, bool normalize = false);

double prus_score(const RuleFeatureVector& rv, const WeightVector& w);

class ReferenceRanking {
 public:
  ReferenceRanking() = default;
  explicit ReferenceRanking(std::vector<RuleId> ids);

  const std::vector<RuleId>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool contains(RuleId id) const;

  bool operator==(const ReferenceRanking&) const = default;

 private:
  std::vector<RuleId> ids_;
};

enum class PolytopeMode { max_margin, interior };

std::string_view to_string(PolytopeMode mode);

// coeffs·w + eps_coeff·ε >= rhs
struct PolytopeRow {
  enum class Kind { ranking, bound };
  Kind kind = Kind::ranking;
  std::vector<double> coeffs;
  double eps_coeff = 0.0;
  double rhs = 0.0;
};

// Rows over the (d+3)-dimensional weight space plus the implicit Σw = 1.
struct PreferencePolytope {
  std::size_t dims = 0;
  PolytopeMode mode = PolytopeMode::max_margin;
  std::vector<PolytopeRow> rows;

  std::size_t ranking_rows() const;
  // Membership in the compatible region (every row with ε = 0, unit sum).
  bool contains(std::span<const double> w, double tolerance = 1e-9) const;
  // Smallest slack over the rows evaluated at ε = 0.
  double min_slack(std::span<const double> w) const;
};

PreferencePolytope build_polytope(const ReferenceRanking& reference, const FeatureMap& features, PolytopeMode mode);

nlohmann::json polytope_to_json(const PreferencePolytope& polytope);

enum class LpStatus { optimal, weak, infeasible };

std::string_view to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::optional<WeightVector> weights;
  double epsilon = 0.0;
  std::size_t iterations = 0;
};

// Maximizes ε over the polytope. |ε| within tolerance is `weak`; a negative
// optimum is `infeasible`.
LpResult solve_lp(const PreferencePolytope& polytope, double tolerance = 1e-9);

struct ScoredRule {
  RuleId id = 0;
  double score = 0.0;

  bool operator==(const ScoredRule&) const = default;
};

// Score descending, then id ascending.
std::vector<ScoredRule> rank_rules(const FeatureMap& candidates, const WeightVector& w);

}  // namespace rulepref::prefmodel
