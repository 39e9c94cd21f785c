#include "rulepref/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rulepref/error.hpp"
#include "rulepref/random.hpp"

namespace rulepref::evalsuite {

SimulatedUser simulate_user(std::size_t dims, std::uint64_t seed) {
  if (dims == 0) throw ContractError("a simulated user needs at least one weight");
  Rng rng(seed);
  SimulatedUser user;
  user.seed = seed;
  user.u_true.resize(dims);
  double total = 0.0;
  for (auto& v : user.u_true) {
    v = uniform01(rng);
    total += v;
  }
  if (total == 0.0) {
    std::fill(user.u_true.begin(), user.u_true.end(), 1.0 / static_cast<double>(dims));
  } else {
    for (auto& v : user.u_true) v /= total;
  }
  return user;
}

prefmodel::ReferenceRanking reference_from_user(const SimulatedUser& user, const prefmodel::FeatureMap& rx,
                                                std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ContractError("a reference ranking needs at least 2 rules");
  if (k > rx.size()) throw ContractError("k exceeds the number of covering rules");
  std::vector<prefmodel::RuleId> ids;
  for (const auto& entry : rx) ids.push_back(entry.first);
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(k);
  const auto w = user.weights();
  std::vector<prefmodel::ScoredRule> scored;
  for (auto id : ids) scored.push_back({id, prefmodel::prus_score(rx.at(id), w)});
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  std::vector<prefmodel::RuleId> ordered;
  for (const auto& s : scored) ordered.push_back(s.id);
  return prefmodel::ReferenceRanking(std::move(ordered));
}

double balanced_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size() || truth.empty()) throw ContractError("label vectors must match and be nonempty");
  double recall_sum = 0.0;
  int classes = 0;
  for (int c = 0; c < 2; ++c) {
    std::size_t total = 0, hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] != c) continue;
      ++total;
      if (predicted[i] == c) ++hit;
    }
    if (total == 0) continue;
    recall_sum += static_cast<double>(hit) / static_cast<double>(total);
    ++classes;
  }
  return recall_sum / classes;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& stddev) {
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

CvSummary cross_validate_mlp(const data::Dataset& dataset, const blackbox::MlpHyperparams& hp, std::size_t folds,
                             std::uint64_t seed) {
  if (folds < 2) throw ContractError("cross-validation needs at least 2 folds");
  hp.validate();
  const std::size_t n = dataset.n();
  if (folds > n) throw ContractError("more folds than rows");
  std::vector<std::size_t> fold_of(n);
  Rng rng(seed);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (dataset.label(i) == c) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i) fold_of[members[i]] = i % folds;
  }

  CvSummary summary;
  std::vector<double> acc, bal;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(i);
    const auto train_set = dataset.subset(train);
    if (train_set.class_count(0) == 0 || train_set.class_count(1) == 0) {
      throw ContractError("fold " + std::to_string(f) + ": a class is absent from the training split");
    }
    auto fold_hp = hp;
    fold_hp.seed = derive_seed(hp.seed, {f});
    const auto trained = blackbox::train_mlp(train_set, fold_hp);
    std::vector<int> truth, predicted;
    std::size_t correct = 0;
    for (std::size_t i : test) {
      const int p = trained.model.predict(dataset.row(i)).label;
      truth.push_back(dataset.label(i));
      predicted.push_back(p);
      if (p == dataset.label(i)) ++correct;
    }
    FoldScore score;
    score.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    score.balanced_accuracy = balanced_accuracy(truth, predicted);
    summary.folds.push_back(score);
    acc.push_back(score.accuracy);
    bal.push_back(score.balanced_accuracy);
  }
  mean_std(acc, summary.accuracy_mean, summary.accuracy_std);
  mean_std(bal, summary.balanced_mean, summary.balanced_std);
  return summary;
}

}  // namespace rulepref::evalsuite
