#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rulepref/blackbox.hpp"
#include "rulepref/error.hpp"
#include "test_support.hpp"

namespace rulepref::blackbox {
namespace {

using data::FeatureKind;

TEST(Predict, ThresholdIsInclusive) {
  const data::FeatureSchema s({{"a", FeatureKind::numeric}}, "y");
  EXPECT_EQ(ConstantModel(s, 0.90, 0.9).predict({1.0}).label, 1);
  EXPECT_EQ(ConstantModel(s, 0.89999, 0.9).predict({1.0}).label, 0);
}

TEST(Hyperparams, Validation) {
  MlpHyperparams hp;
  hp.epochs = 0;
  EXPECT_THROW(hp.validate(), ContractError);
  hp = {};
  hp.decision_threshold = 1.0;
  EXPECT_THROW(hp.validate(), ContractError);
  hp = {};
  hp.class_weight_positive = 0.0;
  EXPECT_THROW(hp.validate(), ContractError);
}

TEST(Hyperparams, JsonUsesClassWeightPair) {
  const auto hp = nlohmann::json{{"learning_rate", 3e-3}, {"batch_size", 512}, {"class_weights", {1.0, 9.0}}, {"threshold", 0.5}}
                      .get<MlpHyperparams>();
  EXPECT_DOUBLE_EQ(hp.learning_rate, 3e-3);
  EXPECT_DOUBLE_EQ(hp.class_weight_positive, 9.0);
  const nlohmann::json back = hp;
  EXPECT_EQ(back.get<MlpHyperparams>().batch_size, 512u);
}

// Finite-difference check of the analytic gradient on a 2-input, width-1
// network: 2 + 1 hidden parameters and 1 + 1 output parameters.
TEST(Network, GradientMatchesFiniteDifferences) {
  Network net({DenseLayer{2, 1, {0.7, -0.4}, {0.3}}, DenseLayer{1, 1, {1.3}, {-0.2}}});
  ASSERT_EQ(net.parameter_count(), 5u);
  const std::vector<double> inputs = {0.5, 1.0, -1.5, 0.25, 2.0, -0.5};
  const std::vector<int> targets = {1, 0, 1};
  const std::vector<double> weights = {1.0, 3.5, 1.0};
  const Network::Batch batch{inputs, targets, weights};
  std::vector<double> grad, input_grad;
  net.loss_and_gradient(batch, grad, &input_grad);
  const auto theta = net.parameters();
  const double h = 1e-6;
  for (std::size_t p = 0; p < theta.size(); ++p) {
    auto plus = theta, minus = theta;
    plus[p] += h;
    minus[p] -= h;
    std::vector<double> tmp;
    Network a = net, b = net;
    a.set_parameters(plus);
    b.set_parameters(minus);
    const double numeric = (a.loss_and_gradient(batch, tmp, nullptr) - b.loss_and_gradient(batch, tmp, nullptr)) / (2 * h);
    EXPECT_NEAR(grad[p], numeric, 1e-7) << "parameter " << p;
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto plus = inputs, minus = inputs;
    plus[i] += h;
    minus[i] -= h;
    std::vector<double> tmp;
    const double numeric = (net.loss_and_gradient({plus, targets, weights}, tmp, nullptr) -
                            net.loss_and_gradient({minus, targets, weights}, tmp, nullptr)) /
                           (2 * h);
    EXPECT_NEAR(input_grad[i], numeric, 1e-7) << "input " << i;
  }
}

TEST(Network, LossIsWeightedBce) {
  Network net({DenseLayer{1, 1, {0.0}, {0.0}}});
  const std::vector<double> x = {1.0, 2.0};
  const std::vector<int> y = {1, 0};
  const std::vector<double> w = {2.0, 1.0};
  std::vector<double> g;
  // logit 0 everywhere: per-sample BCE = log 2.
  EXPECT_NEAR(net.loss_and_gradient({x, y, w}, g, nullptr), (2.0 + 1.0) * std::log(2.0) / 2.0, 1e-12);
}

data::Dataset separable_toy() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<data::Instance> rows;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    const double a = u(rng), b = u(rng);
    const int y = a + b > 0 ? 1 : 0;
    // Push points away from the boundary.
    const double shift = y ? 0.3 : -0.3;
    rows.push_back({a + shift, b + shift});
    labels.push_back(y);
  }
  return data::Dataset(data::FeatureSchema({{"a", FeatureKind::numeric}, {"b", FeatureKind::numeric}}, "y"), rows,
                       labels);
}

TEST(TrainMlp, FitsSeparableToy) {
  const auto ds = separable_toy();
  MlpHyperparams hp;
  hp.epochs = 200;
  hp.batch_size = 4;
  hp.learning_rate = 1e-2;
  const auto trained = train_mlp(ds, hp);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) correct += trained.model.predict(ds.row(i)).label == ds.label(i);
  EXPECT_EQ(correct, ds.n());
  EXPECT_EQ(trained.report.epoch_loss.size(), 200u);
  EXPECT_LT(trained.report.epoch_loss.back(), trained.report.epoch_loss.front());
}

TEST(TrainMlp, DeterministicForSeed) {
  const auto ds = separable_toy();
  MlpHyperparams hp;
  hp.epochs = 5;
  hp.batch_size = 3;
  const auto a = train_mlp(ds, hp);
  const auto b = train_mlp(ds, hp);
  EXPECT_EQ(a.model.network().parameters(), b.model.network().parameters());
  hp.seed = 9;
  EXPECT_NE(train_mlp(ds, hp).model.network().parameters(), a.model.network().parameters());
}

data::Dataset mixed_toy() {
  const data::FeatureSchema s({{"x", FeatureKind::numeric}, {"c", FeatureKind::categorical}}, "y");
  std::vector<data::Instance> rows;
  std::vector<int> labels;
  const char* cats[] = {"red", "green", "blue"};
  for (int i = 0; i < 30; ++i) {
    rows.push_back({static_cast<double>(i % 7), std::string(cats[i % 3])});
    labels.push_back(i % 3 == 0 ? 1 : 0);
  }
  return data::Dataset(s, rows, labels);
}

TEST(TrainMlp, EmbeddingsAndShapes) {
  const auto ds = mixed_toy();
  MlpHyperparams hp;
  hp.epochs = 150;
  hp.batch_size = 8;
  hp.learning_rate = 1e-2;
  const auto trained = train_mlp(ds, hp);
  const auto& m = trained.model;
  EXPECT_EQ(m.input_size(), 1u + 2u);
  ASSERT_EQ(m.network().layers().size(), 3u);
  EXPECT_EQ(m.network().layers()[0].out, 32u);
  EXPECT_EQ(m.network().layers()[1].out, 32u);
  EXPECT_EQ(m.embeddings().at(1).categories, (std::vector<std::string>{"blue", "green", "red"}));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) correct += m.predict(ds.row(i)).label == ds.label(i);
  EXPECT_EQ(correct, ds.n());
  EXPECT_THROW(m.predict({1.0, std::string("purple")}), DataError);
  EXPECT_THROW(m.predict({1.0}), ContractError);
}

TEST(MlpModel, JsonRoundTripPredictsIdentically) {
  const auto ds = mixed_toy();
  MlpHyperparams hp;
  hp.epochs = 3;
  const auto trained = train_mlp(ds, hp);
  const nlohmann::json j = trained.model;
  const auto back = model_from_json(nlohmann::json::parse(j.dump()));
  for (const auto& row : ds.rows()) EXPECT_EQ(back->probability(row), trained.model.probability(row));
}

TEST(Relabel, ReplacesLabelsWithPredictions) {
  const auto ds = separable_toy();
  const ConstantModel all_positive(ds.schema(), 0.7);
  const auto r = relabel(ds, all_positive);
  EXPECT_EQ(r.class_count(1), ds.n());
  const ConstantModel other(data::FeatureSchema({{"zz", FeatureKind::numeric}}, "y"), 0.7);
  EXPECT_THROW(relabel(ds, other), ContractError);
}

TEST(TrainMlp, DivergenceReportsEpoch) {
  const auto ds = separable_toy();
  MlpHyperparams hp;
  hp.learning_rate = 1e300;
  hp.epochs = 50;
  try {
    train_mlp(ds, hp);
    FAIL() << "expected divergence";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

}  // namespace
}  // namespace rulepref::blackbox
