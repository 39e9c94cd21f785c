#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rulepref/hit_and_run.hpp"
#include "rulepref/prefmodel.hpp"

namespace rulepref::prefmodel {

enum class Strategy { max_eps, hr_centroid, hr_first_rules };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view text);
const std::vector<Strategy>& all_strategies();

struct StrategyResult {
  Strategy strategy = Strategy::max_eps;
  bool available = true;
  std::string unavailable_reason;
  std::vector<ScoredRule> ranking;  // empty for first rules
  std::optional<WeightVector> weights;
  std::optional<double> epsilon;
  bool weak = false;
  std::vector<RuleId> first_rules;
};

struct FitOptions {
  std::vector<Strategy> strategies = all_strategies();
  SamplerOptions sampler;
};

struct FitResult {
  LpResult max_margin;
  std::optional<LpResult> interior;
  std::vector<double> sampler_start;
  std::vector<StrategyResult> results;  // in requested order

  const StrategyResult* find(Strategy s) const;
};

// Fits every requested strategy to the reference ranking and ranks all
// candidates. Throws InfeasibleError when no compatible additive model exists.
FitResult personalize(const FeatureMap& candidates, const ReferenceRanking& reference, const FitOptions& options);

}  // namespace rulepref::prefmodel
