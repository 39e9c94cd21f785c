#pragma once

#include <cstdint>
#include <vector>

#include "rulepref/blackbox.hpp"
#include "rulepref/data.hpp"
#include "rulepref/prefmodel.hpp"

namespace rulepref::evalsuite {

struct SimulatedUser {
  std::vector<double> u_true;  // iid U(0,1), normalized to sum 1
  std::uint64_t seed = 0;

  prefmodel::WeightVector weights() const { return prefmodel::WeightVector(u_true); }
};

SimulatedUser simulate_user(std::size_t dims, std::uint64_t seed);

// k distinct rules drawn uniformly from rx, ordered by the user's scores
// (ties by id).
prefmodel::ReferenceRanking reference_from_user(const SimulatedUser& user, const prefmodel::FeatureMap& rx,
                                                std::size_t k, std::uint64_t seed);

struct FoldScore {
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
};

struct CvSummary {
  std::vector<FoldScore> folds;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;  // sample standard deviation
  double balanced_mean = 0.0;
  double balanced_std = 0.0;
};

double balanced_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);

// Stratified k-fold cross-validation of the MLP.
CvSummary cross_validate_mlp(const data::Dataset& dataset, const blackbox::MlpHyperparams& hp, std::size_t folds,
                             std::uint64_t seed);

}  // namespace rulepref::evalsuite
