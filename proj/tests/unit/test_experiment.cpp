#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "rulepref/error.hpp"
#include "rulepref/experiment.hpp"
#include "test_support.hpp"

namespace rulepref::evalsuite {
namespace {

struct Fixture {
  data::Dataset dataset = data::load_dataset(testing::data_dir() / "wisconsin_original.csv").dataset;
  blackbox::MlpModel model = [this] {
    blackbox::MlpHyperparams hp;
    hp.epochs = 20;
    hp.batch_size = 64;
    hp.learning_rate = 3e-3;
    return blackbox::train_mlp(dataset, hp).model;
  }();
  rulegen::RuleSet rules = [this] {
    rulegen::InductionParams p;
    p.min_support_count = 3;
    return rulegen::mine_rules(blackbox::relabel(dataset, model), p);
  }();
  Artifacts artifacts() const { return {dataset, model, rules}; }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.k = 5;
  c.instances_per_class = 3;
  c.trials = 2;
  c.seed = 17;
  c.sampler.samples = 300;
  c.sampler.burn_in = 50;
  c.threads = 1;
  return c;
}

TEST(ExperimentConfig, Validation) {
  auto c = small_config();
  c.k = 1;
  EXPECT_THROW(c.validate(), ContractError);
  c = small_config();
  c.trials = 0;
  EXPECT_THROW(c.validate(), ContractError);
  c = small_config();
  c.k_sweep = {4, 6};
  EXPECT_EQ(c.k_values(), (std::vector<std::size_t>{4, 6}));
  const nlohmann::json j = c;
  EXPECT_EQ(j.get<ExperimentConfig>().k_values(), c.k_values());
}

TEST(RunExperiment, ProducesTrialsPerStrategyAndBaseline) {
  const auto r = run_experiment(small_config(), fixture().artifacts());
  EXPECT_EQ(r.sampled[0], 3u);
  EXPECT_EQ(r.sampled[1], 3u);
  // 6 instances x 2 trials x (3 strategies + baseline), minus exclusions.
  const std::size_t expected = 6 * 2 * 4 - r.excluded.infeasible * 4 - r.excluded.unavailable;
  EXPECT_EQ(r.trials.size(), expected);
  for (const auto& t : r.trials) {
    EXPECT_EQ(t.k, 5u);
    EXPECT_GE(t.n_covering, 10u);
    EXPECT_GE(t.jaccard_top5, 0.0);
    EXPECT_LE(t.jaccard_top5, 1.0);
    if (t.tau_ranking) {
      EXPECT_GE(*t.tau_ranking, -1.0);
      EXPECT_LE(*t.tau_ranking, 1.0);
    }
    if (t.strategy == "hr-first-rules") {
      EXPECT_TRUE(t.first_rules_size.has_value());
      EXPECT_FALSE(t.tau_ranking.has_value());
    }
    if (t.strategy == "max-eps") EXPECT_TRUE(t.reference_consistent);
  }
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  auto c = small_config();
  const auto a = run_experiment(c, fixture().artifacts());
  c.threads = 3;
  const auto b = run_experiment(c, fixture().artifacts());
  EXPECT_EQ(a.trials, b.trials);
  c.seed = 18;
  EXPECT_NE(run_experiment(c, fixture().artifacts()).trials, a.trials);
}

TEST(RunExperiment, SweepCoversEveryK) {
  auto c = small_config();
  c.k_sweep = {3, 6};
  c.trials = 1;
  const auto r = run_experiment(c, fixture().artifacts());
  std::set<std::size_t> ks;
  for (const auto& t : r.trials) ks.insert(t.k);
  EXPECT_EQ(ks, (std::set<std::size_t>{3, 6}));
}

TEST(TrialsCsv, RoundTrip) {
  const auto r = run_experiment(small_config(), fixture().artifacts());
  std::stringstream ss;
  write_trials_csv(ss, r.trials);
  const auto back = read_trials_csv(ss);
  ASSERT_EQ(back.size(), r.trials.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i], r.trials[i]) << "row " << i;
}

TEST(Aggregate, GroupsAndComparisons) {
  auto c = small_config();
  c.instances_per_class = 4;
  const auto r = run_experiment(c, fixture().artifacts());
  const auto agg = aggregate(r.trials);
  EXPECT_EQ(agg.at("rows").get<std::size_t>(), r.trials.size());
  bool saw_all = false;
  for (const auto& g : agg.at("groups")) {
    if (g.at("class") == "all" && g.at("strategy") == "max-eps" && g.at("metric") == "tau_ranking") {
      saw_all = true;
      EXPECT_GE(g.at("mean").get<double>(), -1.0);
    }
  }
  EXPECT_TRUE(saw_all);
  EXPECT_FALSE(agg.at("comparisons").empty());
  std::stringstream ss;
  write_summary_csv(ss, r.trials);
  EXPECT_NE(ss.str().find("max-eps"), std::string::npos);
}

}  // namespace
}  // namespace rulepref::evalsuite
