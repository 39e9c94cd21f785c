#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "rulepref/apriori.hpp"
#include "rulepref/blackbox.hpp"
#include "rulepref/data.hpp"
#include "rulepref/discretize.hpp"

namespace rulepref::rulegen {

using RuleId = std::uint32_t;

struct Condition {
  std::size_t feature = 0;
  std::string feature_name;
  std::variant<data::Interval, std::string> payload;
  ItemId item = 0;

  bool satisfied_by(const data::Value& value) const;
  // Human-readable form, e.g. "Bare Nuclei ∈ 1–3" (bounds to 2 decimals).
  std::string to_text() const;
  bool operator==(const Condition&) const = default;
};

struct RuleMetrics {
  double support = 0.0;
  double confirmation = 0.0;
  std::size_t complexity = 0;
  double confidence = 0.0;
  std::size_t support_count = 0;

  bool operator==(const RuleMetrics&) const = default;
};

struct Rule {
  RuleId id = 0;
  std::vector<Condition> antecedent;  // ordered by feature index
  int consequent = 0;
  RuleMetrics metrics;

  bool covers(const data::Instance& instance) const;
  bool operator==(const Rule&) const = default;
};

struct InductionParams {
  std::size_t min_support_count = 1;
  double min_confirmation = 0.0;
  double min_confidence = 1.0;
  std::size_t num_bins = 3;
  std::size_t max_length = 0;  // 0: up to d conditions

  void validate() const;
};

void to_json(nlohmann::json& j, const InductionParams& p);
void from_json(const nlohmann::json& j, InductionParams& p);

struct Provenance {
  std::uint64_t dataset_hash = 0;
  std::size_t rows = 0;
  std::size_t class_counts[2] = {0, 0};
  InductionParams params;
  // Set when a class had no instances, so P(C|not c) was defined as 0.
  bool degenerate_complement = false;
};

// Immutable candidate rule set with a per-item inverted index.
class RuleSet {
 public:
  RuleSet() = default;
  RuleSet(data::FeatureSchema schema, data::DiscretizationSchema discretization, std::vector<Rule> rules,
          Provenance provenance);

  const data::FeatureSchema& schema() const noexcept { return schema_; }
  const data::DiscretizationSchema& discretization() const noexcept { return discretization_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return rules_.size(); }
  const Rule& rule(RuleId id) const;
  bool contains(RuleId id) const { return by_id_.count(id) > 0; }
  // Positions (into rules()) of the rules having `item` in their antecedent.
  const std::vector<std::size_t>& rules_with_item(ItemId item) const;

 private:
  data::FeatureSchema schema_;
  data::DiscretizationSchema discretization_;
  std::vector<Rule> rules_;
  Provenance provenance_;
  std::vector<std::vector<std::size_t>> index_;
  std::map<RuleId, std::size_t> by_id_;
};

// P(C|c) - P(C|not c). A class with no complement instances contributes a
// zero second term.
double compute_confirmation(std::size_t antecedent_count_in_class, std::size_t class_count,
                            std::size_t antecedent_count_outside_class, std::size_t complement_count);

// Forms (C, c) for every frequent antecedent and class, keeping those that
// pass every threshold. Ids are assigned in presentation order: complexity
// ascending, support descending, then canonical antecedent and class.
RuleSet induce_rules(const std::vector<FrequentItemset>& itemsets, const std::vector<data::ItemVector>& itemized,
                     const data::Dataset& relabeled, const data::DiscretizationSchema& discretization,
                     const InductionParams& params);

// Discretize, itemize, mine and induce in one step over relabeled data.
RuleSet mine_rules(const data::Dataset& relabeled, const InductionParams& params);

// R_x: rules whose every condition holds on the instance's raw values and
// whose consequent equals predicted_label, in presentation order.
std::vector<Rule> covering_rules(const RuleSet& rules, const data::Instance& instance, int predicted_label);

struct ClassCoverage {
  std::vector<std::size_t> counts;  // |R_x| per instance of that predicted class
  double mean = 0.0;
  double median = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
};

struct CoverageStatistics {
  std::vector<std::size_t> per_instance;  // in dataset order
  std::vector<int> predicted;
  ClassCoverage by_class[2];
};

CoverageStatistics coverage_statistics(const RuleSet& rules, const data::Dataset& dataset,
                                       const blackbox::LabelProvider& model);

// Presentation order: complexity ascending, support descending, id.
bool presentation_before(const Rule& a, const Rule& b);

void to_json(nlohmann::json& j, const Condition& c);
void to_json(nlohmann::json& j, const Rule& r);
void to_json(nlohmann::json& j, const RuleSet& rules);
RuleSet rule_set_from_json(const nlohmann::json& j);

}  // namespace rulepref::rulegen
