#include "rulepref/rulegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <tuple>

#include "rulepref/error.hpp"

namespace rulepref::rulegen {

using data::FeatureKind;

namespace {

std::string format_bound(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

Condition make_condition(const data::DiscretizationSchema& disc, ItemId item) {
  Condition c;
  c.feature = disc.item_feature(item);
  c.item = item;
  const auto& fb = disc.feature(c.feature);
  c.feature_name = fb.name;
  const std::size_t bin = disc.item_bin(item);
  if (fb.kind == FeatureKind::numeric) {
    c.payload = fb.interval(bin);
  } else {
    c.payload = fb.categories[bin];
  }
  return c;
}

}  // namespace

bool Condition::satisfied_by(const data::Value& value) const {
  if (const auto* iv = std::get_if<data::Interval>(&payload)) {
    const double* v = std::get_if<double>(&value);
    return v && iv->contains(*v);
  }
  const std::string* s = std::get_if<std::string>(&value);
  return s && *s == std::get<std::string>(payload);
}

std::string Condition::to_text() const {
  if (const auto* iv = std::get_if<data::Interval>(&payload)) {
    return feature_name + " ∈ " + format_bound(iv->lower) + "–" + format_bound(iv->upper);
  }
  return feature_name + " = " + std::get<std::string>(payload);
}

bool Rule::covers(const data::Instance& instance) const {
  return std::all_of(antecedent.begin(), antecedent.end(), [&](const Condition& c) {
    return c.feature < instance.size() && c.satisfied_by(instance[c.feature]);
  });
}

void InductionParams::validate() const {
  if (min_support_count == 0) throw ContractError("min_support_count must be at least 1");
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) throw ContractError("min_confidence must lie in [0, 1]");
  if (!(min_confirmation >= -1.0 && min_confirmation <= 1.0)) {
    throw ContractError("min_confirmation must lie in [-1, 1]");
  }
  if (num_bins < 2) throw ContractError("num_bins must be at least 2");
}

void to_json(nlohmann::json& j, const InductionParams& p) {
  j = {{"min_support_count", p.min_support_count},
       {"min_confirmation", p.min_confirmation},
       {"min_confidence", p.min_confidence},
       {"num_bins", p.num_bins},
       {"max_length", p.max_length}};
}

void from_json(const nlohmann::json& j, InductionParams& p) {
  try {
    if (j.contains("min_support_count")) p.min_support_count = j.at("min_support_count").get<std::size_t>();
    if (j.contains("min_confirmation")) p.min_confirmation = j.at("min_confirmation").get<double>();
    if (j.contains("min_confidence")) p.min_confidence = j.at("min_confidence").get<double>();
    if (j.contains("num_bins")) p.num_bins = j.at("num_bins").get<std::size_t>();
    if (j.contains("max_length")) p.max_length = j.at("max_length").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid induction parameters: ") + e.what());
  }
}

RuleSet::RuleSet(data::FeatureSchema schema, data::DiscretizationSchema discretization, std::vector<Rule> rules,
                 Provenance provenance)
    : schema_(std::move(schema)),
      discretization_(std::move(discretization)),
      rules_(std::move(rules)),
      provenance_(provenance),
      index_(discretization_.item_count()) {
  if (discretization_.size() != schema_.size()) throw ContractError("discretization does not match the schema");
  for (std::size_t pos = 0; pos < rules_.size(); ++pos) {
    const auto& r = rules_[pos];
    if (!by_id_.emplace(r.id, pos).second) throw DataError("duplicate rule id " + std::to_string(r.id));
    if (r.antecedent.empty()) throw DataError("rule " + std::to_string(r.id) + " has an empty antecedent");
    if (r.metrics.complexity != r.antecedent.size()) {
      throw DataError("rule " + std::to_string(r.id) + ": complexity differs from antecedent length");
    }
    for (std::size_t k = 0; k < r.antecedent.size(); ++k) {
      const auto& c = r.antecedent[k];
      if (k > 0 && c.feature <= r.antecedent[k - 1].feature) {
        throw DataError("rule " + std::to_string(r.id) + ": conditions must have distinct, ordered features");
      }
      if (c.item >= index_.size() || discretization_.item_feature(c.item) != c.feature) {
        throw DataError("rule " + std::to_string(r.id) + ": condition item outside the discretization");
      }
      index_[c.item].push_back(pos);
    }
  }
}

const Rule& RuleSet::rule(RuleId id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) throw NotFoundError("unknown rule id " + std::to_string(id));
  return rules_[it->second];
}

const std::vector<std::size_t>& RuleSet::rules_with_item(ItemId item) const { return index_.at(item); }

double compute_confirmation(std::size_t antecedent_count_in_class, std::size_t class_count,
                            std::size_t antecedent_count_outside_class, std::size_t complement_count) {
  if (class_count == 0) throw ContractError("confirmation needs a nonempty class");
  if (antecedent_count_in_class > class_count || antecedent_count_outside_class > complement_count) {
    throw ContractError("antecedent counts exceed class sizes");
  }
  const double in_class = static_cast<double>(antecedent_count_in_class) / static_cast<double>(class_count);
  const double outside = complement_count == 0 ? 0.0
                                               : static_cast<double>(antecedent_count_outside_class) /
                                                     static_cast<double>(complement_count);
  return in_class - outside;
}

bool presentation_before(const Rule& a, const Rule& b) {
  if (a.metrics.complexity != b.metrics.complexity) return a.metrics.complexity < b.metrics.complexity;
  if (a.metrics.support != b.metrics.support) return a.metrics.support > b.metrics.support;
  return a.id < b.id;
}

RuleSet induce_rules(const std::vector<FrequentItemset>& itemsets, const std::vector<data::ItemVector>& itemized,
                     const data::Dataset& relabeled, const data::DiscretizationSchema& discretization,
                     const InductionParams& params) {
  params.validate();
  const std::size_t n = relabeled.n();
  if (itemized.size() != n) throw ContractError("itemized rows do not match the dataset");

  std::vector<TidSet> item_tids(discretization.item_count(), TidSet(n));
  TidSet positive(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (ItemId item : itemized[r].items) item_tids[item].set(r);
    if (relabeled.label(r) == 1) positive.set(r);
  }
  const std::size_t class_count[2] = {n - positive.count(), positive.count()};
  const std::size_t max_length = params.max_length == 0 ? relabeled.d() : params.max_length;

  struct Candidate {
    const FrequentItemset* itemset;
    int consequent;
    RuleMetrics metrics;
  };
  std::vector<Candidate> candidates;
  for (const auto& fi : itemsets) {
    if (fi.items.empty() || fi.items.size() > max_length) continue;
    TidSet tids = item_tids[fi.items.front()];
    for (std::size_t k = 1; k < fi.items.size(); ++k) tids &= item_tids[fi.items[k]];
    const std::size_t covered = tids.count();
    const std::size_t covered_pos = tids.intersection_count(positive);
    const std::size_t covered_by_class[2] = {covered - covered_pos, covered_pos};
    for (int c = 0; c < 2; ++c) {
      if (class_count[c] == 0) continue;
      const std::size_t hits = covered_by_class[c];
      if (hits < params.min_support_count || covered == 0) continue;
      const double confidence = static_cast<double>(hits) / static_cast<double>(covered);
      if (confidence < params.min_confidence) continue;
      const double confirmation =
          compute_confirmation(hits, class_count[c], covered_by_class[1 - c], class_count[1 - c]);
      if (confirmation < params.min_confirmation) continue;
      candidates.push_back({&fi, c,
                            RuleMetrics{static_cast<double>(hits) / static_cast<double>(n), confirmation,
                                        fi.items.size(), confidence, hits}});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.metrics.complexity != b.metrics.complexity) return a.metrics.complexity < b.metrics.complexity;
    if (a.metrics.support != b.metrics.support) return a.metrics.support > b.metrics.support;
    return std::tie(a.itemset->items, a.consequent) < std::tie(b.itemset->items, b.consequent);
  });

  std::vector<Rule> rules;
  rules.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    Rule r;
    r.id = static_cast<RuleId>(i);
    r.consequent = candidates[i].consequent;
    r.metrics = candidates[i].metrics;
    for (ItemId item : candidates[i].itemset->items) r.antecedent.push_back(make_condition(discretization, item));
    rules.push_back(std::move(r));
  }

  Provenance prov;
  prov.dataset_hash = relabeled.content_hash();
  prov.rows = n;
  prov.class_counts[0] = class_count[0];
  prov.class_counts[1] = class_count[1];
  prov.params = params;
  prov.degenerate_complement = class_count[0] == 0 || class_count[1] == 0;
  return RuleSet(relabeled.schema(), discretization, std::move(rules), prov);
}

RuleSet mine_rules(const data::Dataset& relabeled, const InductionParams& params) {
  params.validate();
  const auto disc = data::fit_discretizer(relabeled, params.num_bins);
  const auto itemized = data::itemize_all(relabeled, disc);
  const std::size_t max_length = params.max_length == 0 ? relabeled.d() : params.max_length;
  const auto itemsets = mine_frequent_itemsets(itemized, disc, params.min_support_count, max_length);
  return induce_rules(itemsets, itemized, relabeled, disc, params);
}

std::vector<Rule> covering_rules(const RuleSet& rules, const data::Instance& instance, int predicted_label) {
  data::check_conforms(instance, rules.schema());
  const auto iv = data::itemize(instance, rules.discretization());
  std::vector<std::uint32_t> hits(rules.size(), 0);
  for (std::size_t j = 0; j < iv.items.size(); ++j) {
    // A clamped out-of-range value does not satisfy the boundary interval.
    if (iv.out_of_range[j]) continue;
    for (std::size_t pos : rules.rules_with_item(iv.items[j])) ++hits[pos];
  }
  std::vector<Rule> out;
  for (std::size_t pos = 0; pos < rules.size(); ++pos) {
    const auto& r = rules.rules()[pos];
    if (r.consequent == predicted_label && hits[pos] == r.antecedent.size()) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), presentation_before);
  return out;
}

CoverageStatistics coverage_statistics(const RuleSet& rules, const data::Dataset& dataset,
                                       const blackbox::LabelProvider& model) {
  CoverageStatistics stats;
  for (const auto& row : dataset.rows()) {
    const int label = model.predict(row).label;
    const std::size_t count = covering_rules(rules, row, label).size();
    stats.per_instance.push_back(count);
    stats.predicted.push_back(label);
    stats.by_class[label].counts.push_back(count);
  }
  for (auto& cc : stats.by_class) {
    if (cc.counts.empty()) continue;
    auto sorted = cc.counts;
    std::sort(sorted.begin(), sorted.end());
    cc.min = sorted.front();
    cc.max = sorted.back();
    cc.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    const std::size_t mid = sorted.size() / 2;
    cc.median = sorted.size() % 2 ? static_cast<double>(sorted[mid])
                                  : 0.5 * static_cast<double>(sorted[mid - 1] + sorted[mid]);
  }
  return stats;
}

void to_json(nlohmann::json& j, const Condition& c) {
  j = {{"feature", c.feature_name}};
  if (const auto* iv = std::get_if<data::Interval>(&c.payload)) {
    j["lower"] = iv->lower;
    j["upper"] = iv->upper;
    j["closure"] = iv->upper_closed ? "[]" : "[)";
  } else {
    j["category"] = std::get<std::string>(c.payload);
  }
  j["text"] = c.to_text();
}

void to_json(nlohmann::json& j, const Rule& r) {
  j = {{"id", r.id},
       {"conditions", r.antecedent},
       {"class", r.consequent},
       {"support", r.metrics.support},
       {"support_count", r.metrics.support_count},
       {"confirmation", r.metrics.confirmation},
       {"complexity", r.metrics.complexity},
       {"confidence", r.metrics.confidence}};
}

void to_json(nlohmann::json& j, const RuleSet& rules) {
  const auto& p = rules.provenance();
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(p.dataset_hash));
  std::vector<const Rule*> ordered;
  for (const auto& r : rules.rules()) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const Rule* a, const Rule* b) { return presentation_before(*a, *b); });
  nlohmann::json arr = nlohmann::json::array();
  for (const Rule* r : ordered) arr.push_back(*r);
  j = {{"provenance",
        {{"dataset_hash", hash},
         {"rows", p.rows},
         {"class_counts", {p.class_counts[0], p.class_counts[1]}},
         {"params", p.params},
         {"degenerate_complement", p.degenerate_complement}}},
       {"schema", rules.schema()},
       {"discretization", rules.discretization()},
       {"rules", arr}};
}

RuleSet rule_set_from_json(const nlohmann::json& j) {
  try {
    const auto schema = j.at("schema").get<data::FeatureSchema>();
    const auto disc = j.at("discretization").get<data::DiscretizationSchema>();
    const auto& pj = j.at("provenance");
    Provenance prov;
    prov.dataset_hash = std::stoull(pj.at("dataset_hash").get<std::string>(), nullptr, 16);
    prov.rows = pj.at("rows").get<std::size_t>();
    prov.class_counts[0] = pj.at("class_counts").at(0).get<std::size_t>();
    prov.class_counts[1] = pj.at("class_counts").at(1).get<std::size_t>();
    prov.params = pj.at("params").get<InductionParams>();
    prov.degenerate_complement = pj.value("degenerate_complement", false);

    std::vector<Rule> rules;
    for (const auto& rj : j.at("rules")) {
      Rule r;
      r.id = rj.at("id").get<RuleId>();
      r.consequent = rj.at("class").get<int>();
      if (r.consequent != 0 && r.consequent != 1) throw DataError("rule class must be 0 or 1");
      r.metrics.support = rj.at("support").get<double>();
      r.metrics.support_count = rj.at("support_count").get<std::size_t>();
      r.metrics.confirmation = rj.at("confirmation").get<double>();
      r.metrics.complexity = rj.at("complexity").get<std::size_t>();
      r.metrics.confidence = rj.at("confidence").get<double>();
      for (const auto& cj : rj.at("conditions")) {
        const auto name = cj.at("feature").get<std::string>();
        const auto f = schema.index_of(name);
        if (!f) throw DataError("rule " + std::to_string(r.id) + " references unknown feature '" + name + "'");
        const auto& fb = disc.feature(*f);
        std::optional<std::size_t> bin;
        if (fb.kind == FeatureKind::numeric) {
          const data::Interval want{cj.at("lower").get<double>(), cj.at("upper").get<double>(),
                                    cj.at("closure").get<std::string>() == "[]"};
          for (std::size_t b = 0; b < fb.bin_count() && !bin; ++b) {
            if (fb.interval(b) == want) bin = b;
          }
        } else {
          const auto cat = cj.at("category").get<std::string>();
          const auto it = std::find(fb.categories.begin(), fb.categories.end(), cat);
          if (it != fb.categories.end()) bin = static_cast<std::size_t>(it - fb.categories.begin());
        }
        if (!bin) throw DataError("rule " + std::to_string(r.id) + ": condition on '" + name +
                                  "' does not match any discretization bin");
        r.antecedent.push_back(make_condition(disc, disc.item(*f, *bin)));
      }
      std::sort(r.antecedent.begin(), r.antecedent.end(),
                [](const Condition& a, const Condition& b) { return a.feature < b.feature; });
      rules.push_back(std::move(r));
    }
    return RuleSet(schema, disc, std::move(rules), prov);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid rule set JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid rule set JSON: ") + e.what());
  }
}

}  // namespace rulepref::rulegen
