#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rulepref/data.hpp"

namespace rulepref::data {

// Closed-open interval [lower, upper), or [lower, upper] when upper_closed.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool upper_closed = false;

  bool contains(double v) const noexcept {
    return v >= lower && (upper_closed ? v <= upper : v < upper);
  }
  bool operator==(const Interval&) const = default;
};

// Bins of one feature. Numeric: observed [min, max] split at strictly
// increasing interior cuts; every interval is left-closed, the last one is
// also right-closed. Categorical: the observed categories, sorted.
struct FeatureBins {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> cuts;
  std::vector<std::string> categories;

  std::size_t bin_count() const noexcept {
    return kind == FeatureKind::numeric ? cuts.size() + 1 : categories.size();
  }
  Interval interval(std::size_t bin) const;
  bool operator==(const FeatureBins&) const = default;
};

using ItemId = std::uint32_t;

class DiscretizationSchema {
 public:
  DiscretizationSchema() = default;
  DiscretizationSchema(std::vector<FeatureBins> features, std::size_t num_bins);

  const std::vector<FeatureBins>& features() const noexcept { return features_; }
  const FeatureBins& feature(std::size_t j) const { return features_.at(j); }
  std::size_t size() const noexcept { return features_.size(); }
  std::size_t num_bins() const noexcept { return num_bins_; }

  // Item universe: one item per (feature, bin), numbered feature-major.
  std::size_t item_count() const noexcept { return offsets_.back(); }
  ItemId item(std::size_t feature, std::size_t bin) const;
  std::size_t item_feature(ItemId item) const;
  std::size_t item_bin(ItemId item) const;

  bool operator==(const DiscretizationSchema& other) const {
    return features_ == other.features_ && num_bins_ == other.num_bins_;
  }

 private:
  std::vector<FeatureBins> features_;
  std::size_t num_bins_ = 0;
  std::vector<std::size_t> offsets_{0};
};

// One item per feature. out_of_range[j] is set when a numeric value fell
// outside the observed training range and was clamped to a boundary bin.
struct ItemVector {
  std::vector<ItemId> items;
  std::vector<bool> out_of_range;

  bool any_out_of_range() const;
};

// Empirical quantile at probability p in [0, 1] by linear interpolation
// between order statistics of `sorted`.
double quantile_sorted(const std::vector<double>& sorted, double p);

DiscretizationSchema fit_discretizer(const Dataset& dataset, std::size_t num_bins);

// Throws DataError for a category unseen at fit time.
ItemVector itemize(const Instance& instance, const DiscretizationSchema& schema);
std::vector<ItemVector> itemize_all(const Dataset& dataset, const DiscretizationSchema& schema);

void to_json(nlohmann::json& j, const DiscretizationSchema& schema);
void from_json(const nlohmann::json& j, DiscretizationSchema& schema);

}  // namespace rulepref::data
