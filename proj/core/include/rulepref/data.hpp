#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace rulepref::data {

enum class FeatureKind { numeric, categorical };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view text);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;

  bool operator==(const FeatureSpec&) const = default;
};

// Ordered, typed feature columns plus the name of the binary label column.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::vector<FeatureSpec> features, std::string label_name);

  const std::vector<FeatureSpec>& features() const noexcept { return features_; }
  const FeatureSpec& operator[](std::size_t j) const { return features_.at(j); }
  std::size_t size() const noexcept { return features_.size(); }
  const std::string& label_name() const noexcept { return label_name_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool operator==(const FeatureSchema& other) const {
    return features_ == other.features_ && label_name_ == other.label_name_;
  }

 private:
  std::vector<FeatureSpec> features_;
  std::string label_name_;
  std::unordered_map<std::string, std::size_t> index_;
};

// A cell value: real for numeric features, category string for categorical.
using Value = std::variant<double, std::string>;
using Instance = std::vector<Value>;

// Checks that `instance` has one value per feature of the matching kind.
// Full-string decimal parse (leading '+' and surrounding blanks allowed).
std::optional<double> parse_real(std::string_view cell);
// Shortest text that parses back to the same double.
std::string format_real(double v);

void check_conforms(const Instance& instance, const FeatureSchema& schema);

// Class-name mapping: names[c] is the raw label string of class c.
struct LabelMapping {
  std::array<std::string, 2> names{"0", "1"};

  bool operator==(const LabelMapping&) const = default;
};

class Dataset {
 public:
  Dataset(FeatureSchema schema, std::vector<Instance> rows, std::vector<int> labels,
          LabelMapping label_names = {});

  const FeatureSchema& schema() const noexcept { return schema_; }
  const std::vector<Instance>& rows() const noexcept { return rows_; }
  const Instance& row(std::size_t i) const { return rows_.at(i); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int label(std::size_t i) const { return labels_.at(i); }
  std::size_t n() const noexcept { return rows_.size(); }
  std::size_t d() const noexcept { return schema_.size(); }
  const LabelMapping& label_names() const noexcept { return label_names_; }

  std::size_t class_count(int c) const;

  // Same rows and schema, new labels.
  Dataset with_labels(std::vector<int> labels) const;
  // Rows selected by index, in the given order.
  Dataset subset(const std::vector<std::size_t>& indices) const;

  // FNV-1a over schema, values and labels; stable across runs and platforms.
  std::uint64_t content_hash() const;

 private:
  FeatureSchema schema_;
  std::vector<Instance> rows_;
  std::vector<int> labels_;
  LabelMapping label_names_;
};

struct LoadOptions {
  std::optional<FeatureSchema> schema;       // overrides inference when present
  std::optional<std::string> label_column;   // default: schema label, else last column
  std::optional<LabelMapping> label_mapping; // default: lexicographic
};

struct LoadReport {
  Dataset dataset;
  std::size_t dropped_missing = 0;
};

// Cells equal to "", "?", "NA" or "NaN" (after trimming) count as missing;
// rows containing one are dropped and counted.
LoadReport load_dataset(std::istream& in, const LoadOptions& options = {});
LoadReport load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

void write_csv(std::ostream& out, const Dataset& dataset);

// Schema override file: {"features": [{"name", "kind"}], "label": name}.
void to_json(nlohmann::json& j, const FeatureSchema& schema);
void from_json(const nlohmann::json& j, FeatureSchema& schema);

// Instance payload: {feature_name: value, ...}. Numeric features accept
// numbers or numeric strings; categorical features accept strings or numbers.
Instance instance_from_json(const nlohmann::json& j, const FeatureSchema& schema);
nlohmann::json instance_to_json(const Instance& instance, const FeatureSchema& schema);

}  // namespace rulepref::data
