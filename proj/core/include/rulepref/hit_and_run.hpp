#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rulepref/prefmodel.hpp"

namespace rulepref::prefmodel {

struct SamplerOptions {
  std::size_t samples = 10000;
  std::size_t burn_in = 1000;
  std::size_t thinning = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const SamplerOptions& o);
void from_json(const nlohmann::json& j, SamplerOptions& o);

struct WeightSampleSet {
  std::size_t dims = 0;
  std::vector<double> values;  // row-major, one sample per row
  SamplerOptions options;
  std::vector<double> start;

  std::size_t size() const noexcept { return dims == 0 ? 0 : values.size() / dims; }
  bool empty() const noexcept { return values.empty(); }
  std::span<const double> sample(std::size_t i) const { return {values.data() + i * dims, dims}; }
};

// Uniform sampling of the compatible region (ranking rows at ε = 0, w >= 0,
// Σw = 1). `start` must satisfy every row strictly.
WeightSampleSet hit_and_run(const PreferencePolytope& polytope, std::span<const double> start,
                            const SamplerOptions& options);

WeightVector centroid(const WeightSampleSet& samples);

// Rules ranked first under at least one sample; rules tied at the top all
// count. Sorted by id.
std::vector<RuleId> first_rules(const WeightSampleSet& samples, const FeatureMap& candidates);

nlohmann::json samples_to_json(const WeightSampleSet& samples);

}  // namespace rulepref::prefmodel
