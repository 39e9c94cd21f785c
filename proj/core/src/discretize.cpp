#include "rulepref/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rulepref/error.hpp"

namespace rulepref::data {

Interval FeatureBins::interval(std::size_t bin) const {
  if (kind != FeatureKind::numeric) throw ContractError("feature '" + name + "' is categorical");
  if (bin > cuts.size()) throw ContractError("bin index out of range for feature '" + name + "'");
  const double lo = bin == 0 ? min : cuts[bin - 1];
  const bool last = bin == cuts.size();
  const double hi = last ? max : cuts[bin];
  return {lo, hi, last};
}

DiscretizationSchema::DiscretizationSchema(std::vector<FeatureBins> features, std::size_t num_bins)
    : features_(std::move(features)), num_bins_(num_bins) {
  offsets_.assign(1, 0);
  for (const auto& f : features_) {
    if (f.kind == FeatureKind::numeric) {
      if (!(f.min <= f.max)) throw DataError("feature '" + f.name + "': min exceeds max");
      for (std::size_t k = 0; k < f.cuts.size(); ++k) {
        const double lo = k == 0 ? f.min : f.cuts[k - 1];
        if (!(f.cuts[k] > lo) || !(f.cuts[k] < f.max)) {
          throw DataError("feature '" + f.name + "': cuts must be strictly increasing inside (min, max)");
        }
      }
    } else if (f.categories.empty()) {
      throw DataError("feature '" + f.name + "': no categories");
    }
    offsets_.push_back(offsets_.back() + f.bin_count());
  }
}

ItemId DiscretizationSchema::item(std::size_t feature, std::size_t bin) const {
  if (feature >= features_.size() || bin >= features_[feature].bin_count()) {
    throw ContractError("item (feature, bin) out of range");
  }
  return static_cast<ItemId>(offsets_[feature] + bin);
}

std::size_t DiscretizationSchema::item_feature(ItemId item) const {
  if (item >= item_count()) throw ContractError("unknown item id");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), static_cast<std::size_t>(item));
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

std::size_t DiscretizationSchema::item_bin(ItemId item) const {
  return item - offsets_[item_feature(item)];
}

bool ItemVector::any_out_of_range() const {
  return std::find(out_of_range.begin(), out_of_range.end(), true) != out_of_range.end();
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw ContractError("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

DiscretizationSchema fit_discretizer(const Dataset& dataset, std::size_t num_bins) {
  if (num_bins < 2) throw ContractError("num_bins must be at least 2");
  const auto& schema = dataset.schema();
  std::vector<FeatureBins> bins;
  bins.reserve(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    FeatureBins fb;
    fb.name = schema[j].name;
    fb.kind = schema[j].kind;
    if (fb.kind == FeatureKind::numeric) {
      std::vector<double> values;
      values.reserve(dataset.n());
      for (const auto& row : dataset.rows()) values.push_back(std::get<double>(row[j]));
      std::sort(values.begin(), values.end());
      fb.min = values.front();
      fb.max = values.back();
      for (std::size_t k = 1; k < num_bins; ++k) {
        const double edge = quantile_sorted(values, static_cast<double>(k) / static_cast<double>(num_bins));
        // Duplicate edges merge; edges at the range ends would leave empty bins.
        if (edge > fb.min && edge < fb.max && (fb.cuts.empty() || edge > fb.cuts.back())) {
          fb.cuts.push_back(edge);
        }
      }
    } else {
      std::set<std::string> seen;
      for (const auto& row : dataset.rows()) seen.insert(std::get<std::string>(row[j]));
      fb.categories.assign(seen.begin(), seen.end());
    }
    bins.push_back(std::move(fb));
  }
  return DiscretizationSchema(std::move(bins), num_bins);
}

ItemVector itemize(const Instance& instance, const DiscretizationSchema& schema) {
  if (instance.size() != schema.size()) throw ContractError("instance width does not match discretization");
  ItemVector out;
  out.items.reserve(schema.size());
  out.out_of_range.assign(schema.size(), false);
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& fb = schema.feature(j);
    std::size_t bin = 0;
    if (fb.kind == FeatureKind::numeric) {
      const double* v = std::get_if<double>(&instance[j]);
      if (!v) throw ContractError("feature '" + fb.name + "' expects a numeric value");
      if (std::isnan(*v)) throw DataError("feature '" + fb.name + "' is NaN");
      if (*v < fb.min) {
        bin = 0;
        out.out_of_range[j] = true;
      } else if (*v > fb.max) {
        bin = fb.cuts.size();
        out.out_of_range[j] = true;
      } else {
        bin = static_cast<std::size_t>(std::upper_bound(fb.cuts.begin(), fb.cuts.end(), *v) - fb.cuts.begin());
      }
    } else {
      const std::string* c = std::get_if<std::string>(&instance[j]);
      if (!c) throw ContractError("feature '" + fb.name + "' expects a category");
      const auto it = std::lower_bound(fb.categories.begin(), fb.categories.end(), *c);
      if (it == fb.categories.end() || *it != *c) {
        throw DataError("unseen category '" + *c + "' for feature '" + fb.name + "'");
      }
      bin = static_cast<std::size_t>(it - fb.categories.begin());
    }
    out.items.push_back(schema.item(j, bin));
  }
  return out;
}

std::vector<ItemVector> itemize_all(const Dataset& dataset, const DiscretizationSchema& schema) {
  std::vector<ItemVector> out;
  out.reserve(dataset.n());
  for (const auto& row : dataset.rows()) out.push_back(itemize(row, schema));
  return out;
}

void to_json(nlohmann::json& j, const DiscretizationSchema& schema) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : schema.features()) {
    nlohmann::json fj = {{"name", f.name}, {"kind", to_string(f.kind)}};
    if (f.kind == FeatureKind::numeric) {
      std::vector<double> edges{f.min};
      edges.insert(edges.end(), f.cuts.begin(), f.cuts.end());
      if (f.max > f.min) edges.push_back(f.max);
      fj["edges"] = edges;
    } else {
      fj["categories"] = f.categories;
    }
    features.push_back(std::move(fj));
  }
  j = {{"num_bins", schema.num_bins()}, {"features", features}};
}

void from_json(const nlohmann::json& j, DiscretizationSchema& schema) {
  try {
    std::vector<FeatureBins> bins;
    for (const auto& fj : j.at("features")) {
      FeatureBins fb;
      fb.name = fj.at("name").get<std::string>();
      fb.kind = feature_kind_from_string(fj.at("kind").get<std::string>());
      if (fb.kind == FeatureKind::numeric) {
        const auto edges = fj.at("edges").get<std::vector<double>>();
        if (edges.empty()) throw DataError("feature '" + fb.name + "' has no edges");
        fb.min = edges.front();
        fb.max = edges.back();
        if (edges.size() > 2) fb.cuts.assign(edges.begin() + 1, edges.end() - 1);
      } else {
        fb.categories = fj.at("categories").get<std::vector<std::string>>();
        std::sort(fb.categories.begin(), fb.categories.end());
      }
      bins.push_back(std::move(fb));
    }
    schema = DiscretizationSchema(std::move(bins), j.at("num_bins").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid discretization JSON: ") + e.what());
  }
}

}  // namespace rulepref::data
