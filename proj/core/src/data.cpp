#include "rulepref/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <system_error>

#include "rulepref/csv.hpp"
#include "rulepref/error.hpp"

namespace rulepref::data {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool is_missing(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "?" || cell == "NA" || cell == "NaN";
}

std::string cell_text(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) return format_real(*d);
  return std::get<std::string>(v);
}

}  // namespace

std::optional<double> parse_real(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return v;
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::numeric ? "numeric" : "categorical";
}

FeatureKind feature_kind_from_string(std::string_view text) {
  if (text == "numeric") return FeatureKind::numeric;
  if (text == "categorical") return FeatureKind::categorical;
  throw DataError("unknown feature kind '" + std::string(text) + "'");
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features, std::string label_name)
    : features_(std::move(features)), label_name_(std::move(label_name)) {
  if (features_.empty()) throw ContractError("feature schema needs at least one feature");
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (!index_.emplace(features_[j].name, j).second) {
      throw DataError("duplicate feature name '" + features_[j].name + "'");
    }
  }
  if (index_.count(label_name_)) throw DataError("label column '" + label_name_ + "' is also a feature");
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void check_conforms(const Instance& instance, const FeatureSchema& schema) {
  if (instance.size() != schema.size()) {
    throw ContractError("instance has " + std::to_string(instance.size()) + " values, schema expects " +
                        std::to_string(schema.size()));
  }
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const bool numeric = std::holds_alternative<double>(instance[j]);
    if (numeric != (schema[j].kind == FeatureKind::numeric)) {
      throw ContractError("value of feature '" + schema[j].name + "' does not match its kind");
    }
  }
}

Dataset::Dataset(FeatureSchema schema, std::vector<Instance> rows, std::vector<int> labels,
                 LabelMapping label_names)
    : schema_(std::move(schema)),
      rows_(std::move(rows)),
      labels_(std::move(labels)),
      label_names_(std::move(label_names)) {
  if (rows_.empty()) throw DataError("empty dataset");
  if (rows_.size() != labels_.size()) throw ContractError("row and label counts differ");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    check_conforms(rows_[i], schema_);
    if (labels_[i] != 0 && labels_[i] != 1) throw ContractError("labels must be 0 or 1");
  }
}

std::size_t Dataset::class_count(int c) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), c));
}

Dataset Dataset::with_labels(std::vector<int> labels) const {
  return Dataset(schema_, rows_, std::move(labels), label_names_);
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Instance> rows;
  std::vector<int> labels;
  rows.reserve(indices.size());
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    rows.push_back(rows_.at(i));
    labels.push_back(labels_.at(i));
  }
  return Dataset(schema_, std::move(rows), std::move(labels), label_names_);
}

std::uint64_t Dataset::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& f : schema_.features()) {
    feed(f.name);
    feed(to_string(f.kind));
  }
  feed(schema_.label_name());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const auto& v : rows_[i]) feed(cell_text(v));
    feed(labels_[i] ? "1" : "0");
  }
  return h;
}

LoadReport load_dataset(std::istream& in, const LoadOptions& options) {
  const auto records = csv::read_records(in);
  if (records.empty()) throw DataError("empty dataset: no header row");
  const auto& header = records.front().fields;
  const std::size_t width = header.size();

  std::string label_name;
  if (options.label_column) {
    label_name = *options.label_column;
  } else if (options.schema) {
    label_name = options.schema->label_name();
  } else {
    label_name = std::string(trim(header.back()));
  }

  std::optional<std::size_t> label_col;
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < width; ++c) {
    const std::string name(trim(header[c]));
    if (name == label_name) {
      label_col = c;
    } else {
      feature_cols.push_back(c);
      feature_names.push_back(name);
    }
  }
  if (!label_col) throw DataError("missing label column '" + label_name + "'");
  if (feature_cols.empty()) throw DataError("dataset has no feature columns");

  // Column layout of the result follows the schema when one is given.
  std::vector<std::size_t> column_of_feature = feature_cols;
  if (options.schema) {
    const auto& schema = *options.schema;
    column_of_feature.clear();
    for (const auto& f : schema.features()) {
      const auto it = std::find(feature_names.begin(), feature_names.end(), f.name);
      if (it == feature_names.end()) throw DataError("schema feature '" + f.name + "' missing from CSV header");
      column_of_feature.push_back(feature_cols[static_cast<std::size_t>(it - feature_names.begin())]);
    }
    feature_names.clear();
    for (const auto& f : schema.features()) feature_names.push_back(f.name);
  }

  std::vector<const csv::LineRecord*> kept;
  std::size_t dropped = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != width) {
      throw DataError("malformed CSV row " + std::to_string(r) + " (line " + std::to_string(rec.line) +
                      "): expected " + std::to_string(width) + " fields, got " +
                      std::to_string(rec.fields.size()));
    }
    const bool missing =
        is_missing(rec.fields[*label_col]) ||
        std::any_of(column_of_feature.begin(), column_of_feature.end(),
                    [&](std::size_t c) { return is_missing(rec.fields[c]); });
    if (missing) {
      ++dropped;
    } else {
      kept.push_back(&rec);
    }
  }
  if (kept.empty()) throw DataError("empty dataset: no complete rows");

  FeatureSchema schema;
  if (options.schema) {
    schema = FeatureSchema(options.schema->features(), label_name);
  } else {
    std::vector<FeatureSpec> specs;
    for (std::size_t j = 0; j < column_of_feature.size(); ++j) {
      const bool numeric = std::all_of(kept.begin(), kept.end(), [&](const csv::LineRecord* rec) {
        return parse_real(rec->fields[column_of_feature[j]]).has_value();
      });
      specs.push_back({feature_names[j], numeric ? FeatureKind::numeric : FeatureKind::categorical});
    }
    schema = FeatureSchema(std::move(specs), label_name);
  }

  std::set<std::string> distinct;
  for (const auto* rec : kept) distinct.insert(std::string(trim(rec->fields[*label_col])));
  LabelMapping mapping;
  if (options.label_mapping) {
    mapping = *options.label_mapping;
    for (const auto& v : distinct) {
      if (v != mapping.names[0] && v != mapping.names[1]) {
        throw DataError("label value '" + v + "' is not in the supplied label mapping");
      }
    }
  } else if (distinct.size() > 2) {
    throw DataError("non-binary label: column '" + label_name + "' has " + std::to_string(distinct.size()) +
                    " distinct values");
  } else if (distinct.size() == 2) {
    mapping.names = {*distinct.begin(), *distinct.rbegin()};
  } else {
    const std::string only = *distinct.begin();
    mapping.names = only == "1" ? std::array<std::string, 2>{"0", "1"} : std::array<std::string, 2>{only, "1"};
  }

  std::vector<Instance> rows;
  std::vector<int> labels;
  rows.reserve(kept.size());
  labels.reserve(kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto& rec = *kept[r];
    Instance inst;
    inst.reserve(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const std::string_view cell = trim(rec.fields[column_of_feature[j]]);
      if (schema[j].kind == FeatureKind::numeric) {
        const auto v = parse_real(cell);
        if (!v) {
          throw DataError("malformed CSV row at line " + std::to_string(rec.line) + ": feature '" +
                          schema[j].name + "' expects a number, got '" + std::string(cell) + "'");
        }
        inst.emplace_back(*v);
      } else {
        inst.emplace_back(std::string(cell));
      }
    }
    rows.push_back(std::move(inst));
    labels.push_back(std::string(trim(rec.fields[*label_col])) == mapping.names[1] ? 1 : 0);
  }
  return {Dataset(std::move(schema), std::move(rows), std::move(labels), mapping), dropped};
}

LoadReport load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file " + path.string());
  return load_dataset(in, options);
}

void write_csv(std::ostream& out, const Dataset& dataset) {
  csv::Record header;
  for (const auto& f : dataset.schema().features()) header.push_back(f.name);
  header.push_back(dataset.schema().label_name());
  csv::write_record(out, header);
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    csv::Record rec;
    for (const auto& v : dataset.row(i)) rec.push_back(cell_text(v));
    rec.push_back(dataset.label_names().names[static_cast<std::size_t>(dataset.label(i))]);
    csv::write_record(out, rec);
  }
}

void to_json(nlohmann::json& j, const FeatureSchema& schema) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : schema.features()) {
    features.push_back({{"name", f.name}, {"kind", to_string(f.kind)}});
  }
  j = {{"features", features}, {"label", schema.label_name()}};
}

void from_json(const nlohmann::json& j, FeatureSchema& schema) {
  try {
    std::vector<FeatureSpec> specs;
    for (const auto& f : j.at("features")) {
      specs.push_back({f.at("name").get<std::string>(), feature_kind_from_string(f.at("kind").get<std::string>())});
    }
    schema = FeatureSchema(std::move(specs), j.at("label").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid feature schema JSON: ") + e.what());
  }
}

Instance instance_from_json(const nlohmann::json& j, const FeatureSchema& schema) {
  if (!j.is_object()) throw DataError("instance payload must be a JSON object");
  Instance inst;
  inst.reserve(schema.size());
  for (const auto& f : schema.features()) {
    const auto it = j.find(f.name);
    if (it == j.end()) throw DataError("instance is missing feature '" + f.name + "'");
    if (f.kind == FeatureKind::numeric) {
      if (it->is_number()) {
        inst.emplace_back(it->get<double>());
      } else if (it->is_string()) {
        const auto v = parse_real(it->get<std::string>());
        if (!v) throw DataError("feature '" + f.name + "' expects a number");
        inst.emplace_back(*v);
      } else {
        throw DataError("feature '" + f.name + "' expects a number");
      }
    } else {
      if (it->is_string()) {
        inst.emplace_back(it->get<std::string>());
      } else if (it->is_number_integer()) {
        inst.emplace_back(std::to_string(it->get<long long>()));
      } else if (it->is_number()) {
        inst.emplace_back(format_real(it->get<double>()));
      } else {
        throw DataError("feature '" + f.name + "' expects a category string");
      }
    }
  }
  for (const auto& item : j.items()) {
    if (!schema.index_of(item.key()) && item.key() != schema.label_name()) {
      throw DataError("unknown feature '" + item.key() + "'");
    }
  }
  return inst;
}

nlohmann::json instance_to_json(const Instance& instance, const FeatureSchema& schema) {
  check_conforms(instance, schema);
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t f = 0; f < schema.size(); ++f) {
    std::visit([&](const auto& v) { j[schema[f].name] = v; }, instance[f]);
  }
  return j;
}

}  // namespace rulepref::data
