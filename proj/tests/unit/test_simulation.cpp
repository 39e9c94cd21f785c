#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rulepref/error.hpp"
#include "rulepref/random.hpp"
#include "rulepref/simulation.hpp"
#include "test_support.hpp"

namespace rulepref::evalsuite {
namespace {

TEST(SimulateUser, SingleDimension) {
  for (std::uint64_t s = 0; s < 5; ++s) EXPECT_EQ(simulate_user(1, s).u_true, std::vector<double>{1.0});
}

TEST(SimulateUser, DeterministicAndNormalized) {
  const auto a = simulate_user(12, 42), b = simulate_user(12, 42);
  EXPECT_EQ(a.u_true, b.u_true);
  EXPECT_NE(simulate_user(12, 43).u_true, a.u_true);
  double s = 0;
  for (double v : a.u_true) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_NO_THROW(a.weights());
}

TEST(SimulateUser, ComponentMeans) {
  std::vector<double> m(12, 0.0);
  const int users = 10000;
  for (int i = 0; i < users; ++i) {
    const auto u = simulate_user(12, derive_seed(1, {static_cast<std::uint64_t>(i)}));
    for (std::size_t j = 0; j < 12; ++j) m[j] += u.u_true[j];
  }
  for (double v : m) EXPECT_NEAR(v / users, 1.0 / 12.0, 0.005);
}

TEST(ReferenceFromUser, WorkedReferenceFromUserWeights) {
  const auto rules = testing::worked_rules();
  const auto all = prefmodel::feature_map(rules.rules(), rules.schema().size());
  prefmodel::FeatureMap starred;
  for (auto id : testing::reference_order()) starred[id] = all.at(id);
  SimulatedUser user{testing::user_weights(rules.schema()).flat(), 0};
  const auto ref = reference_from_user(user, starred, starred.size(), 123);
  EXPECT_EQ(ref.ids(), testing::reference_order());
}

TEST(ReferenceFromUser, SubsetIsSortedByUserScore) {
  const auto rules = testing::worked_rules();
  const auto fm = prefmodel::feature_map(rules.rules(), rules.schema().size());
  const auto user = simulate_user(12, 5);
  const auto w = user.weights();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ref = reference_from_user(user, fm, 6, seed);
    ASSERT_EQ(ref.size(), 6u);
    for (std::size_t k = 0; k + 1 < ref.size(); ++k)
      EXPECT_GE(prefmodel::prus_score(fm.at(ref.ids()[k]), w), prefmodel::prus_score(fm.at(ref.ids()[k + 1]), w));
  }
  EXPECT_THROW(reference_from_user(user, fm, 1, 0), ContractError);
  EXPECT_THROW(reference_from_user(user, fm, 16, 0), ContractError);
  EXPECT_EQ(reference_from_user(user, fm, 15, 0).size(), 15u);
}

TEST(ReferenceFromUser, SamplesUniformly) {
  prefmodel::FeatureMap fm;
  for (prefmodel::RuleId id = 0; id < 6; ++id) fm[id] = prefmodel::RuleFeatureVector{{1}, 0.1 * id, 0.0, 1.0};
  const auto user = simulate_user(4, 1);
  std::vector<int> hits(6, 0);
  const int draws = 6000;
  for (int i = 0; i < draws; ++i) {
    const auto ref = reference_from_user(user, fm, 2, static_cast<std::uint64_t>(i));
    for (auto id : ref.ids()) ++hits[id];
  }
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(draws), 1.0 / 3.0, 0.03);
}

TEST(BalancedAccuracy, Basics) {
  EXPECT_DOUBLE_EQ(balanced_accuracy({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(balanced_accuracy({0, 0, 0, 1}, {0, 0, 0, 0}), 0.5);
  EXPECT_DOUBLE_EQ(balanced_accuracy({0, 0, 1, 1}, {0, 1, 1, 1}), 0.75);
}

TEST(CrossValidate, WisconsinIsAccurate) {
  const auto ds = data::load_dataset(testing::data_dir() / "wisconsin_original.csv").dataset;
  blackbox::MlpHyperparams hp;
  hp.epochs = 30;
  hp.batch_size = 64;
  hp.learning_rate = 3e-3;
  const auto cv = cross_validate_mlp(ds, hp, 5, 9);
  ASSERT_EQ(cv.folds.size(), 5u);
  EXPECT_GT(cv.accuracy_mean, 0.9);
  EXPECT_GT(cv.balanced_mean, 0.9);
  EXPECT_GE(cv.accuracy_std, 0.0);
  const auto again = cross_validate_mlp(ds, hp, 5, 9);
  EXPECT_EQ(again.accuracy_mean, cv.accuracy_mean);
}

}  // namespace
}  // namespace rulepref::evalsuite
