#include "rulepref/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include "rulepref/csv.hpp"
#include "rulepref/error.hpp"
#include "rulepref/metrics.hpp"
#include "rulepref/random.hpp"
#include "rulepref/simulation.hpp"
#include "rulepref/wilcoxon.hpp"

namespace rulepref::evalsuite {

using prefmodel::RuleId;
using prefmodel::Strategy;

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw ContractError("experiment needs at least one strategy");
  if (trials == 0) throw ContractError("trials must be at least 1");
  if (instances_per_class == 0) throw ContractError("instances_per_class must be at least 1");
  for (std::size_t kk : k_values()) {
    if (kk < 2) throw ContractError("reference length k must be at least 2");
  }
  sampler.validate();
}

std::vector<std::size_t> ExperimentConfig::k_values() const {
  if (k_sweep.empty()) return {k};
  return k_sweep;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  std::vector<std::string> names;
  for (Strategy s : c.strategies) names.emplace_back(prefmodel::to_string(s));
  j = {{"dataset_id", c.dataset_id},
       {"strategies", names},
       {"k", c.k},
       {"instances_per_class", c.instances_per_class},
       {"trials", c.trials},
       {"seed", c.seed},
       {"sampler", c.sampler},
       {"k_sweep", c.k_sweep},
       {"min_covering", c.min_covering},
       {"threads", c.threads}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  try {
    if (j.contains("dataset_id")) c.dataset_id = j.at("dataset_id").get<std::string>();
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.push_back(prefmodel::strategy_from_string(s.get<std::string>()));
    }
    if (j.contains("k")) c.k = j.at("k").get<std::size_t>();
    if (j.contains("instances_per_class")) c.instances_per_class = j.at("instances_per_class").get<std::size_t>();
    if (j.contains("trials")) c.trials = j.at("trials").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("sampler")) c.sampler = j.at("sampler").get<prefmodel::SamplerOptions>();
    if (j.contains("k_sweep")) c.k_sweep = j.at("k_sweep").get<std::vector<std::size_t>>();
    if (j.contains("min_covering")) c.min_covering = j.at("min_covering").get<std::size_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid experiment config: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("invalid experiment config: ") + e.what());
  }
}

namespace {

struct Task {
  std::size_t row;
  int cls;
  std::size_t trial;
  std::size_t k;
};

struct TaskOutput {
  std::vector<TrialResult> rows;
  ExclusionCounts excluded;
};

std::vector<std::uint32_t> ids_of(const std::vector<prefmodel::ScoredRule>& ranking) {
  std::vector<std::uint32_t> ids;
  ids.reserve(ranking.size());
  for (const auto& s : ranking) ids.push_back(s.id);
  return ids;
}

bool reference_respected(const prefmodel::FeatureMap& rx, const prefmodel::ReferenceRanking& ref,
                         const prefmodel::WeightVector& w, double margin) {
  for (std::size_t i = 0; i + 1 < ref.size(); ++i) {
    const double a = prefmodel::prus_score(rx.at(ref.ids()[i]), w);
    const double b = prefmodel::prus_score(rx.at(ref.ids()[i + 1]), w);
    if (a - b < margin - 1e-9) return false;
  }
  return true;
}

TaskOutput run_task(const ExperimentConfig& config, const Task& task, const prefmodel::FeatureMap& rx,
                    std::size_t d) {
  TaskOutput out;
  const auto user = simulate_user(d + 3, derive_seed(config.seed, {task.row, task.trial, 1}));
  const auto truth_weights = user.weights();
  const auto truth = ids_of(prefmodel::rank_rules(rx, truth_weights));
  const auto reference =
      reference_from_user(user, rx, task.k, derive_seed(config.seed, {task.row, task.trial, task.k, 2}));
  const std::vector<std::uint32_t> ref_ids(reference.ids().begin(), reference.ids().end());

  prefmodel::FitOptions options;
  options.strategies = config.strategies;
  options.sampler = config.sampler;
  options.sampler.seed = derive_seed(config.seed, {task.row, task.trial, task.k, 3});
  prefmodel::FitResult fit;
  try {
    fit = prefmodel::personalize(rx, reference, options);
  } catch (const InfeasibleError&) {
    ++out.excluded.infeasible;
    return out;
  }

  auto base = [&] {
    TrialResult r;
    r.instance = task.row;
    r.trial = task.trial;
    r.predicted_class = task.cls;
    r.k = task.k;
    r.n_covering = rx.size();
    return r;
  };
  auto fill_ranked = [&](TrialResult& r, const std::vector<std::uint32_t>& ranking) {
    r.tau_ranking = kendall_tau_a(ranking, truth);
    r.jaccard_top5 = jaccard_top_k(ranking, truth, std::min<std::size_t>(5, truth.size()));
    r.jaccard_top10 = jaccard_top_k(ranking, truth, std::min<std::size_t>(10, truth.size()));
    const auto dc = discovery_counts(ranking, ref_ids);
    r.discovered_above_best_ref = dc.above_best_ref;
    r.discovered_in_top5 = dc.new_in_top5;
  };

  for (const auto& sr : fit.results) {
    if (!sr.available) {
      ++out.excluded.unavailable;
      continue;
    }
    TrialResult r = base();
    r.strategy = std::string(prefmodel::to_string(sr.strategy));
    if (sr.strategy == Strategy::hr_first_rules) {
      const std::vector<std::uint32_t> fr(sr.first_rules.begin(), sr.first_rules.end());
      const std::span<const std::uint32_t> t(truth);
      r.jaccard_top5 = jaccard(fr, t.first(std::min<std::size_t>(5, t.size())));
      r.jaccard_top10 = jaccard(fr, t.first(std::min<std::size_t>(10, t.size())));
      r.first_rules_size = fr.size();
    } else {
      fill_ranked(r, ids_of(sr.ranking));
      r.tau_weights = kendall_tau_b(sr.weights->flat(), truth_weights.flat());
      r.epsilon = sr.epsilon;
      r.weak = sr.weak;
      const double margin = sr.strategy == Strategy::max_eps ? std::max(0.0, *sr.epsilon) : 0.0;
      r.reference_consistent = reference_respected(rx, reference, *sr.weights, margin);
      if (!r.reference_consistent) ++out.excluded.inconsistent;
    }
    out.rows.push_back(std::move(r));
  }

  TrialResult baseline = base();
  baseline.strategy = kRandomBaseline;
  std::vector<std::uint32_t> perm(truth);
  Rng rng(derive_seed(config.seed, {task.row, task.trial, task.k, 4}));
  std::shuffle(perm.begin(), perm.end(), rng);
  fill_ranked(baseline, perm);
  out.rows.push_back(std::move(baseline));
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const Artifacts& artifacts) {
  config.validate();
  const auto& rules = artifacts.rules;
  if (!(rules.schema() == artifacts.dataset.schema())) throw ContractError("rule set schema differs from dataset");
  const auto ks = config.k_values();
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
  const std::size_t min_cov = config.min_covering > 0 ? config.min_covering : std::max<std::size_t>(k_max + 1, 10);
  if (min_cov < k_max) throw ContractError("min_covering is below the largest k");
  const std::size_t d = artifacts.dataset.d();

  ExperimentResult result;
  std::vector<std::size_t> eligible[2];
  for (std::size_t i = 0; i < artifacts.dataset.n(); ++i) {
    const auto& row = artifacts.dataset.row(i);
    const int label = artifacts.model.predict(row).label;
    if (rulegen::covering_rules(rules, row, label).size() >= min_cov) eligible[label].push_back(i);
  }

  std::vector<Task> tasks;
  std::map<std::size_t, prefmodel::FeatureMap> rx_of;
  for (int c = 0; c < 2; ++c) {
    result.eligible[c] = eligible[c].size();
    Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(c), 0}));
    std::shuffle(eligible[c].begin(), eligible[c].end(), rng);
    eligible[c].resize(std::min(eligible[c].size(), config.instances_per_class));
    std::sort(eligible[c].begin(), eligible[c].end());
    result.sampled[c] = eligible[c].size();
    for (std::size_t row : eligible[c]) {
      const auto covering = rulegen::covering_rules(rules, artifacts.dataset.row(row), c);
      rx_of.emplace(row, prefmodel::feature_map(covering, d));
      for (std::size_t kk : ks) {
        for (std::size_t t = 0; t < config.trials; ++t) tasks.push_back({row, c, t, kk});
      }
    }
  }
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    return std::tie(a.k, a.row, a.trial) < std::tie(b.k, b.row, b.trial);
  });

  std::vector<TaskOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        outputs[i] = run_task(config, tasks[i], rx_of.at(tasks[i].row), d);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = tasks.size();
        return;
      }
    }
  };
  std::size_t threads = config.threads > 0 ? config.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  for (auto& o : outputs) {
    result.excluded.infeasible += o.excluded.infeasible;
    result.excluded.unavailable += o.excluded.unavailable;
    result.excluded.inconsistent += o.excluded.inconsistent;
    for (auto& r : o.rows) result.trials.push_back(std::move(r));
  }
  return result;
}

namespace {

const std::vector<std::string> kColumns = {"instance",
                                           "trial",
                                           "strategy",
                                           "class",
                                           "k",
                                           "n_covering",
                                           "tau_ranking",
                                           "tau_weights",
                                           "jaccard_top5",
                                           "jaccard_top10",
                                           "discovered_above_best_ref",
                                           "discovered_in_top5",
                                           "epsilon",
                                           "weak",
                                           "reference_consistent",
                                           "first_rules_size"};

template <typename T>
std::string opt_text(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return data::format_real(*v);
  } else {
    return std::to_string(*v);
  }
}

double parse_required(const std::string& cell, std::size_t line) {
  const auto v = data::parse_real(cell);
  if (!v) throw DataError("trial table line " + std::to_string(line) + ": invalid number '" + cell + "'");
  return *v;
}

std::size_t parse_count(const std::string& cell, std::size_t line) {
  const double v = parse_required(cell, line);
  if (v < 0 || v != std::floor(v)) {
    throw DataError("trial table line " + std::to_string(line) + ": invalid count '" + cell + "'");
  }
  return static_cast<std::size_t>(v);
}

std::optional<double> parse_optional(const std::string& cell, std::size_t line) {
  if (cell.empty()) return std::nullopt;
  return parse_required(cell, line);
}

std::optional<std::size_t> parse_optional_count(const std::string& cell, std::size_t line) {
  if (cell.empty()) return std::nullopt;
  return parse_count(cell, line);
}

bool parse_bool(const std::string& cell, std::size_t line) {
  if (cell == "1" || cell == "true") return true;
  if (cell == "0" || cell == "false") return false;
  throw DataError("trial table line " + std::to_string(line) + ": invalid flag '" + cell + "'");
}

}  // namespace

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials) {
  csv::write_record(out, kColumns);
  for (const auto& t : trials) {
    csv::write_record(out, {std::to_string(t.instance), std::to_string(t.trial), t.strategy,
                            std::to_string(t.predicted_class), std::to_string(t.k), std::to_string(t.n_covering),
                            opt_text(t.tau_ranking), opt_text(t.tau_weights), data::format_real(t.jaccard_top5),
                            data::format_real(t.jaccard_top10), opt_text(t.discovered_above_best_ref),
                            opt_text(t.discovered_in_top5), opt_text(t.epsilon), t.weak ? "1" : "0",
                            t.reference_consistent ? "1" : "0", opt_text(t.first_rules_size)});
  }
}

std::vector<TrialResult> read_trials_csv(std::istream& in) {
  const auto records = csv::read_records(in);
  if (records.empty()) throw DataError("trial table is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records.front().fields.size(); ++i) col[records.front().fields[i]] = i;
  for (const auto& c : kColumns) {
    if (!col.count(c)) throw DataError("trial table is missing column '" + c + "'");
  }
  std::vector<TrialResult> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != records.front().fields.size()) {
      throw DataError("malformed trial table row " + std::to_string(r) + " (line " + std::to_string(rec.line) + ")");
    }
    auto f = [&](const char* name) -> const std::string& { return rec.fields[col.at(name)]; };
    TrialResult t;
    t.instance = parse_count(f("instance"), rec.line);
    t.trial = parse_count(f("trial"), rec.line);
    t.strategy = f("strategy");
    t.predicted_class = static_cast<int>(parse_count(f("class"), rec.line));
    if (t.predicted_class > 1) throw DataError("trial table line " + std::to_string(rec.line) + ": class must be 0/1");
    t.k = parse_count(f("k"), rec.line);
    t.n_covering = parse_count(f("n_covering"), rec.line);
    t.tau_ranking = parse_optional(f("tau_ranking"), rec.line);
    t.tau_weights = parse_optional(f("tau_weights"), rec.line);
    t.jaccard_top5 = parse_required(f("jaccard_top5"), rec.line);
    t.jaccard_top10 = parse_required(f("jaccard_top10"), rec.line);
    t.discovered_above_best_ref = parse_optional_count(f("discovered_above_best_ref"), rec.line);
    t.discovered_in_top5 = parse_optional_count(f("discovered_in_top5"), rec.line);
    t.epsilon = parse_optional(f("epsilon"), rec.line);
    t.weak = parse_bool(f("weak"), rec.line);
    t.reference_consistent = parse_bool(f("reference_consistent"), rec.line);
    t.first_rules_size = parse_optional_count(f("first_rules_size"), rec.line);
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

using MetricFn = std::optional<double> (*)(const TrialResult&);

const std::vector<std::pair<std::string, MetricFn>>& metric_table() {
  static const std::vector<std::pair<std::string, MetricFn>> table = {
      {"tau_ranking", [](const TrialResult& t) { return t.tau_ranking; }},
      {"tau_weights", [](const TrialResult& t) { return t.tau_weights; }},
      {"jaccard_top5", [](const TrialResult& t) { return std::optional<double>(t.jaccard_top5); }},
      {"jaccard_top10", [](const TrialResult& t) { return std::optional<double>(t.jaccard_top10); }},
      {"discovered_above_best_ref",
       [](const TrialResult& t) {
         return t.discovered_above_best_ref ? std::optional<double>(static_cast<double>(*t.discovered_above_best_ref))
                                            : std::nullopt;
       }},
      {"discovered_in_top5",
       [](const TrialResult& t) {
         return t.discovered_in_top5 ? std::optional<double>(static_cast<double>(*t.discovered_in_top5))
                                     : std::nullopt;
       }},
  };
  return table;
}

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
};

Summary summarize(std::vector<double> v) {
  Summary s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  return s;
}

// Strategies in first-appearance order.
std::vector<std::string> strategies_of(const std::vector<TrialResult>& trials) {
  std::vector<std::string> out;
  for (const auto& t : trials) {
    if (std::find(out.begin(), out.end(), t.strategy) == out.end()) out.push_back(t.strategy);
  }
  return out;
}

std::string class_key(int scope) { return scope < 0 ? "all" : std::to_string(scope); }

struct GroupRow {
  std::size_t k;
  std::string strategy;
  int scope;
  std::string metric;
  Summary summary;
};

std::vector<GroupRow> group_rows(const std::vector<TrialResult>& trials) {
  std::set<std::size_t> ks;
  for (const auto& t : trials) ks.insert(t.k);
  std::vector<GroupRow> rows;
  for (std::size_t k : ks) {
    for (const auto& s : strategies_of(trials)) {
      for (int scope : {-1, 0, 1}) {
        for (const auto& [name, fn] : metric_table()) {
          std::vector<double> v;
          for (const auto& t : trials) {
            if (t.k != k || t.strategy != s || (scope >= 0 && t.predicted_class != scope)) continue;
            if (const auto x = fn(t)) v.push_back(*x);
          }
          if (v.empty()) continue;
          rows.push_back({k, s, scope, name, summarize(std::move(v))});
        }
      }
    }
  }
  return rows;
}

}  // namespace

nlohmann::json aggregate(const std::vector<TrialResult>& trials) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : group_rows(trials)) {
    groups.push_back({{"k", g.k},
                      {"strategy", g.strategy},
                      {"class", class_key(g.scope)},
                      {"metric", g.metric},
                      {"n", g.summary.n},
                      {"mean", g.summary.mean},
                      {"median", g.summary.median}});
  }

  std::set<std::size_t> ks;
  for (const auto& t : trials) ks.insert(t.k);
  const auto strategies = strategies_of(trials);
  nlohmann::json comparisons = nlohmann::json::array();
  for (std::size_t k : ks) {
    for (int scope : {-1, 0, 1}) {
      for (std::size_t a = 0; a < strategies.size(); ++a) {
        for (std::size_t b = a + 1; b < strategies.size(); ++b) {
          for (const auto& [name, fn] : metric_table()) {
            // Per-instance means over trials, paired on instances present for both.
            std::map<std::size_t, std::pair<double, std::size_t>> ma, mb;
            for (const auto& t : trials) {
              if (t.k != k || (scope >= 0 && t.predicted_class != scope)) continue;
              const auto x = fn(t);
              if (!x) continue;
              if (t.strategy == strategies[a]) {
                ma[t.instance].first += *x;
                ++ma[t.instance].second;
              } else if (t.strategy == strategies[b]) {
                mb[t.instance].first += *x;
                ++mb[t.instance].second;
              }
            }
            std::vector<double> va, vb;
            for (const auto& [inst, acc] : ma) {
              const auto it = mb.find(inst);
              if (it == mb.end()) continue;
              va.push_back(acc.first / static_cast<double>(acc.second));
              vb.push_back(it->second.first / static_cast<double>(it->second.second));
            }
            if (va.empty()) continue;
            nlohmann::json c = {{"k", k},
                                {"class", class_key(scope)},
                                {"a", strategies[a]},
                                {"b", strategies[b]},
                                {"metric", name},
                                {"pairs", va.size()}};
            try {
              const auto w = wilcoxon_signed_rank(va, vb);
              c["statistic"] = w.statistic;
              c["w_plus"] = w.w_plus;
              c["w_minus"] = w.w_minus;
              c["n"] = w.n;
              c["p_value"] = w.p_value;
              c["exact"] = w.exact;
              c["significant"] = {{"0.05", w.significant_05}, {"0.01", w.significant_01}, {"0.001", w.significant_001}};
            } catch (const ContractError& e) {
              c["error"] = e.what();
            }
            comparisons.push_back(std::move(c));
          }
        }
      }
    }
  }

  nlohmann::json sweep = nlohmann::json::object();
  for (const auto& s : strategies) {
    std::vector<double> kv, means;
    for (std::size_t k : ks) {
      std::vector<double> v;
      for (const auto& t : trials) {
        if (t.k == k && t.strategy == s && t.tau_ranking) v.push_back(*t.tau_ranking);
      }
      if (v.empty()) continue;
      kv.push_back(static_cast<double>(k));
      means.push_back(summarize(v).mean);
    }
    if (kv.empty()) continue;
    nlohmann::json entry = {{"k", kv}, {"mean_tau_ranking", means}};
    if (kv.size() >= 2) {
      const auto rho = spearman(kv, means);
      entry["spearman"] = rho ? nlohmann::json(*rho) : nlohmann::json(nullptr);
    }
    sweep[s] = std::move(entry);
  }

  std::size_t inconsistent = 0;
  for (const auto& t : trials) inconsistent += t.reference_consistent ? 0 : 1;
  return {{"rows", trials.size()},
          {"inconsistent_rows", inconsistent},
          {"groups", groups},
          {"comparisons", comparisons},
          {"sweep", sweep}};
}

void write_summary_csv(std::ostream& out, const std::vector<TrialResult>& trials) {
  csv::write_record(out, {"k", "strategy", "class", "metric", "n", "mean", "median"});
  for (const auto& g : group_rows(trials)) {
    csv::write_record(out, {std::to_string(g.k), g.strategy, class_key(g.scope), g.metric, std::to_string(g.summary.n),
                            data::format_real(g.summary.mean), data::format_real(g.summary.median)});
  }
}

}  // namespace rulepref::evalsuite
