#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rulepref/data.hpp"
#include "rulepref/network.hpp"

namespace rulepref::blackbox {

struct Prediction {
  double probability = 0.0;
  int label = 0;
};

// Anything that maps an instance to a positive-class probability and a
// label. The rule and preference machinery only depends on this.
class LabelProvider {
 public:
  virtual ~LabelProvider() = default;
  virtual const data::FeatureSchema& schema() const = 0;
  virtual double probability(const data::Instance& instance) const = 0;
  virtual double threshold() const = 0;

  // label = 1 iff probability >= threshold.
  Prediction predict(const data::Instance& instance) const;
};

// Fixed-probability classifier; useful as a stand-in black box.
class ConstantModel final : public LabelProvider {
 public:
  ConstantModel(data::FeatureSchema schema, double probability, double threshold = 0.5);
  const data::FeatureSchema& schema() const override { return schema_; }
  double probability(const data::Instance&) const override { return probability_; }
  double threshold() const override { return threshold_; }

 private:
  data::FeatureSchema schema_;
  double probability_;
  double threshold_;
};

struct MlpHyperparams {
  double learning_rate = 1e-3;
  std::size_t batch_size = 512;
  double class_weight_negative = 1.0;
  double class_weight_positive = 1.0;
  double decision_threshold = 0.5;
  double weight_decay = 1e-5;
  std::size_t epochs = 100;
  std::size_t hidden_width = 32;
  std::size_t embedding_dim = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const MlpHyperparams& hp);
// Missing keys keep their defaults. "class_weights" is a two-element array.
void from_json(const nlohmann::json& j, MlpHyperparams& hp);

struct TrainingReport {
  std::vector<double> epoch_loss;  // class-weighted BCE, mean over samples
};

// Two-hidden-layer MLP over standardized numeric features and learnable
// categorical embeddings.
class MlpModel final : public LabelProvider {
 public:
  struct Standardization {
    double mean = 0.0;
    double stddev = 1.0;
  };
  struct Embedding {
    std::vector<std::string> categories;  // sorted
    std::vector<double> table;            // categories x dim, row-major
  };

  MlpModel(data::FeatureSchema schema, std::size_t embedding_dim, double threshold,
           std::vector<Standardization> standardization, std::map<std::size_t, Embedding> embeddings,
           Network network);

  const data::FeatureSchema& schema() const override { return schema_; }
  double probability(const data::Instance& instance) const override;
  double threshold() const override { return threshold_; }

  const Network& network() const noexcept { return network_; }
  std::size_t embedding_dim() const noexcept { return embedding_dim_; }
  const std::vector<Standardization>& standardization() const noexcept { return standardization_; }
  const std::map<std::size_t, Embedding>& embeddings() const noexcept { return embeddings_; }

  // Network input for an instance: numeric features standardized, each
  // categorical feature replaced by its embedding row, in schema order.
  std::vector<double> encode(const data::Instance& instance) const;
  std::size_t input_size() const noexcept;

 private:
  friend struct MlpTrainer;
  data::FeatureSchema schema_;
  std::size_t embedding_dim_;
  double threshold_;
  std::vector<Standardization> standardization_;
  std::map<std::size_t, Embedding> embeddings_;  // keyed by feature index
  Network network_;
};

struct TrainedMlp {
  MlpModel model;
  TrainingReport report;
};

// Minibatch AdamW on class-weighted BCE. Deterministic for a given seed.
TrainedMlp train_mlp(const data::Dataset& dataset, const MlpHyperparams& hp);

// Every label replaced by the black box's prediction.
data::Dataset relabel(const data::Dataset& dataset, const LabelProvider& model);

void to_json(nlohmann::json& j, const MlpModel& model);
MlpModel mlp_model_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const ConstantModel& model);
// Dispatches on "kind" ("mlp" or "constant").
std::unique_ptr<LabelProvider> model_from_json(const nlohmann::json& j);

}  // namespace rulepref::blackbox
