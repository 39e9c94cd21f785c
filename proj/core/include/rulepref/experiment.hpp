#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rulepref/blackbox.hpp"
#include "rulepref/data.hpp"
#include "rulepref/hit_and_run.hpp"
#include "rulepref/personalize.hpp"
#include "rulepref/rulegen.hpp"

namespace rulepref::evalsuite {

inline constexpr const char* kRandomBaseline = "random";

struct ExperimentConfig {
  std::string dataset_id = "dataset";
  std::vector<prefmodel::Strategy> strategies = prefmodel::all_strategies();
  std::size_t k = 10;
  std::size_t instances_per_class = 50;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  prefmodel::SamplerOptions sampler;
  std::vector<std::size_t> k_sweep;  // empty: only k
  // Minimum |R_x| for an instance to be sampled; 0 picks max(k_max + 1, 10).
  std::size_t min_covering = 0;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const;
  std::vector<std::size_t> k_values() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct TrialResult {
  std::size_t instance = 0;  // dataset row
  std::size_t trial = 0;
  std::string strategy;
  int predicted_class = 0;
  std::size_t k = 0;
  std::size_t n_covering = 0;
  std::optional<double> tau_ranking;
  std::optional<double> tau_weights;
  double jaccard_top5 = 0.0;
  double jaccard_top10 = 0.0;
  std::optional<std::size_t> discovered_above_best_ref;
  std::optional<std::size_t> discovered_in_top5;
  std::optional<double> epsilon;
  bool weak = false;
  bool reference_consistent = true;
  std::optional<std::size_t> first_rules_size;

  bool operator==(const TrialResult&) const = default;
};

struct ExclusionCounts {
  std::size_t infeasible = 0;
  std::size_t unavailable = 0;  // sampler strategies that could not run
  std::size_t inconsistent = 0;
};

struct ExperimentResult {
  std::vector<TrialResult> trials;
  ExclusionCounts excluded;
  std::size_t eligible[2] = {0, 0};
  std::size_t sampled[2] = {0, 0};
};

struct Artifacts {
  const data::Dataset& dataset;
  const blackbox::LabelProvider& model;
  const rulegen::RuleSet& rules;
};

// Every (instance, trial, k) draws its user and reference from seeds derived
// from the master seed, so the table is independent of thread scheduling.
ExperimentResult run_experiment(const ExperimentConfig& config, const Artifacts& artifacts);

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials);
std::vector<TrialResult> read_trials_csv(std::istream& in);

// Per strategy/class/k summaries, Wilcoxon comparisons between strategies
// (paired per instance after averaging trials), and the k sweep.
nlohmann::json aggregate(const std::vector<TrialResult>& trials);
void write_summary_csv(std::ostream& out, const std::vector<TrialResult>& trials);

}  // namespace rulepref::evalsuite
