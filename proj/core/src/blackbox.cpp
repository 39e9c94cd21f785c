#include "rulepref/blackbox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rulepref/error.hpp"
#include "rulepref/random.hpp"

namespace rulepref::blackbox {

using data::FeatureKind;

Prediction LabelProvider::predict(const data::Instance& instance) const {
  const double p = probability(instance);
  return {p, p >= threshold() ? 1 : 0};
}

ConstantModel::ConstantModel(data::FeatureSchema schema, double probability, double threshold)
    : schema_(std::move(schema)), probability_(probability), threshold_(threshold) {
  if (!(probability >= 0.0 && probability <= 1.0)) throw ContractError("probability must lie in [0, 1]");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ContractError("threshold must lie in (0, 1)");
}

void MlpHyperparams::validate() const {
  if (!(learning_rate > 0.0)) throw ContractError("learning_rate must be positive");
  if (batch_size == 0) throw ContractError("batch_size must be positive");
  if (!(class_weight_negative > 0.0) || !(class_weight_positive > 0.0)) {
    throw ContractError("class weights must be positive");
  }
  if (!(decision_threshold > 0.0 && decision_threshold < 1.0)) {
    throw ContractError("decision_threshold must lie strictly inside (0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw ContractError("weight_decay must be nonnegative");
  if (epochs == 0) throw ContractError("epochs must be positive");
  if (hidden_width == 0) throw ContractError("hidden_width must be positive");
  if (embedding_dim == 0) throw ContractError("embedding_dim must be positive");
}

void to_json(nlohmann::json& j, const MlpHyperparams& hp) {
  j = {{"learning_rate", hp.learning_rate},
       {"batch_size", hp.batch_size},
       {"class_weights", {hp.class_weight_negative, hp.class_weight_positive}},
       {"threshold", hp.decision_threshold},
       {"weight_decay", hp.weight_decay},
       {"epochs", hp.epochs},
       {"hidden_width", hp.hidden_width},
       {"embedding_dim", hp.embedding_dim},
       {"seed", hp.seed}};
}

void from_json(const nlohmann::json& j, MlpHyperparams& hp) {
  try {
    if (j.contains("learning_rate")) hp.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("batch_size")) hp.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("class_weights")) {
      const auto& w = j.at("class_weights");
      if (!w.is_array() || w.size() != 2) throw DataError("class_weights must be a two-element array");
      hp.class_weight_negative = w[0].get<double>();
      hp.class_weight_positive = w[1].get<double>();
    }
    if (j.contains("threshold")) hp.decision_threshold = j.at("threshold").get<double>();
    if (j.contains("decision_threshold")) hp.decision_threshold = j.at("decision_threshold").get<double>();
    if (j.contains("weight_decay")) hp.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("epochs")) hp.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("hidden_width")) hp.hidden_width = j.at("hidden_width").get<std::size_t>();
    if (j.contains("embedding_dim")) hp.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    if (j.contains("seed")) hp.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid hyperparameter JSON: ") + e.what());
  }
}

MlpModel::MlpModel(data::FeatureSchema schema, std::size_t embedding_dim, double threshold,
                   std::vector<Standardization> standardization, std::map<std::size_t, Embedding> embeddings,
                   Network network)
    : schema_(std::move(schema)),
      embedding_dim_(embedding_dim),
      threshold_(threshold),
      standardization_(std::move(standardization)),
      embeddings_(std::move(embeddings)),
      network_(std::move(network)) {
  if (standardization_.size() != schema_.size()) throw ContractError("standardization must cover every feature");
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    const bool categorical = schema_[j].kind == FeatureKind::categorical;
    const auto it = embeddings_.find(j);
    if (categorical != (it != embeddings_.end())) {
      throw ContractError("embedding tables must exist exactly for categorical features");
    }
    if (categorical && it->second.table.size() != it->second.categories.size() * embedding_dim_) {
      throw ContractError("embedding table for '" + schema_[j].name + "' has the wrong shape");
    }
  }
  if (network_.input_size() != input_size()) throw ContractError("network input width does not match encoding");
  if (!(threshold_ > 0.0 && threshold_ < 1.0)) throw ContractError("threshold must lie in (0, 1)");
}

std::size_t MlpModel::input_size() const noexcept {
  return schema_.size() - embeddings_.size() + embeddings_.size() * embedding_dim_;
}

std::vector<double> MlpModel::encode(const data::Instance& instance) const {
  data::check_conforms(instance, schema_);
  std::vector<double> x;
  x.reserve(input_size());
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    if (schema_[j].kind == FeatureKind::numeric) {
      const auto& s = standardization_[j];
      x.push_back((std::get<double>(instance[j]) - s.mean) / s.stddev);
    } else {
      const auto& emb = embeddings_.at(j);
      const auto& cat = std::get<std::string>(instance[j]);
      const auto it = std::lower_bound(emb.categories.begin(), emb.categories.end(), cat);
      if (it == emb.categories.end() || *it != cat) {
        throw DataError("unseen category '" + cat + "' for feature '" + schema_[j].name + "'");
      }
      const auto row = static_cast<std::size_t>(it - emb.categories.begin());
      x.insert(x.end(), emb.table.begin() + static_cast<std::ptrdiff_t>(row * embedding_dim_),
               emb.table.begin() + static_cast<std::ptrdiff_t>((row + 1) * embedding_dim_));
    }
  }
  return x;
}

double MlpModel::probability(const data::Instance& instance) const {
  return sigmoid(network_.logit(encode(instance)));
}

namespace {

// AdamW with decoupled weight decay, PyTorch defaults for betas and eps.
class AdamW {
 public:
  AdamW(std::size_t n, double lr, double weight_decay)
      : lr_(lr), wd_(weight_decay), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= lr_ * wd_ * params[i];
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      const double mhat = m_[i] / bc1;
      const double vhat = v_[i] / bc2;
      params[i] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  double wd_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

DenseLayer init_layer(std::size_t in, std::size_t out, Rng& rng) {
  DenseLayer layer{in, out, std::vector<double>(in * out), std::vector<double>(out)};
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& w : layer.weights) w = (2.0 * uniform01(rng) - 1.0) * bound;
  for (auto& b : layer.bias) b = (2.0 * uniform01(rng) - 1.0) * bound;
  return layer;
}

}  // namespace

struct MlpTrainer {
  static TrainedMlp run(const data::Dataset& dataset, const MlpHyperparams& hp) {
    hp.validate();
    const auto& schema = dataset.schema();
    Rng rng(hp.seed);

    std::vector<MlpModel::Standardization> stdz(schema.size());
    std::map<std::size_t, MlpModel::Embedding> embeddings;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (schema[j].kind == FeatureKind::numeric) {
        double mean = 0.0;
        for (const auto& row : dataset.rows()) mean += std::get<double>(row[j]);
        mean /= static_cast<double>(dataset.n());
        double var = 0.0;
        for (const auto& row : dataset.rows()) {
          const double dv = std::get<double>(row[j]) - mean;
          var += dv * dv;
        }
        var /= static_cast<double>(dataset.n());
        stdz[j] = {mean, var > 0.0 ? std::sqrt(var) : 1.0};
      } else {
        MlpModel::Embedding emb;
        for (const auto& row : dataset.rows()) emb.categories.push_back(std::get<std::string>(row[j]));
        std::sort(emb.categories.begin(), emb.categories.end());
        emb.categories.erase(std::unique(emb.categories.begin(), emb.categories.end()), emb.categories.end());
        emb.table.resize(emb.categories.size() * hp.embedding_dim);
        for (auto& v : emb.table) v = uniform01(rng) - 0.5;
        embeddings.emplace(j, std::move(emb));
      }
    }
    const std::size_t input = schema.size() - embeddings.size() + embeddings.size() * hp.embedding_dim;
    std::vector<DenseLayer> layers;
    layers.push_back(init_layer(input, hp.hidden_width, rng));
    layers.push_back(init_layer(hp.hidden_width, hp.hidden_width, rng));
    layers.push_back(init_layer(hp.hidden_width, 1, rng));

    MlpModel model(schema, hp.embedding_dim, hp.decision_threshold, std::move(stdz), std::move(embeddings),
                   Network(std::move(layers)));

    // Flat parameter layout: network parameters, then embedding tables in
    // feature order.
    std::vector<double> params = model.network_.parameters();
    const std::size_t net_params = params.size();
    std::vector<std::pair<std::size_t, std::size_t>> emb_offsets;  // (feature, offset)
    for (auto& [j, emb] : model.embeddings_) {
      emb_offsets.emplace_back(j, params.size());
      params.insert(params.end(), emb.table.begin(), emb.table.end());
    }
    // Input offset of each feature in the encoded vector.
    std::vector<std::size_t> input_offset(schema.size());
    for (std::size_t j = 0, off = 0; j < schema.size(); ++j) {
      input_offset[j] = off;
      off += schema[j].kind == FeatureKind::numeric ? 1 : hp.embedding_dim;
    }
    // Category index per (row, categorical feature).
    std::vector<std::vector<std::size_t>> category_index(dataset.n(), std::vector<std::size_t>(schema.size(), 0));
    for (std::size_t i = 0; i < dataset.n(); ++i) {
      for (const auto& [j, emb] : model.embeddings_) {
        const auto& cat = std::get<std::string>(dataset.row(i)[j]);
        category_index[i][j] =
            static_cast<std::size_t>(std::lower_bound(emb.categories.begin(), emb.categories.end(), cat) -
                                     emb.categories.begin());
      }
    }

    AdamW opt(params.size(), hp.learning_rate, hp.weight_decay);
    std::vector<std::size_t> order(dataset.n());
    std::iota(order.begin(), order.end(), 0);
    TrainingReport report;
    std::vector<double> inputs, sample_weights, net_grad, input_grad, grad(params.size());
    std::vector<int> targets;

    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double epoch_total = 0.0;
      for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
        const std::size_t stop = std::min(order.size(), start + hp.batch_size);
        const std::size_t rows = stop - start;
        inputs.clear();
        targets.clear();
        sample_weights.clear();
        for (std::size_t k = start; k < stop; ++k) {
          const std::size_t i = order[k];
          const auto x = model.encode(dataset.row(i));
          inputs.insert(inputs.end(), x.begin(), x.end());
          const int y = dataset.label(i);
          targets.push_back(y);
          sample_weights.push_back(y ? hp.class_weight_positive : hp.class_weight_negative);
        }
        const double loss = model.network_.loss_and_gradient({inputs, targets, sample_weights}, net_grad,
                                                             emb_offsets.empty() ? nullptr : &input_grad);
        epoch_total += loss * static_cast<double>(rows);

        std::fill(grad.begin(), grad.end(), 0.0);
        std::copy(net_grad.begin(), net_grad.end(), grad.begin());
        for (const auto& [j, offset] : emb_offsets) {
          for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t cat = category_index[order[start + r]][j];
            for (std::size_t k = 0; k < hp.embedding_dim; ++k) {
              grad[offset + cat * hp.embedding_dim + k] += input_grad[r * input + input_offset[j] + k];
            }
          }
        }
        opt.step(params, grad);
        model.network_.set_parameters(std::span<const double>(params).first(net_params));
        for (const auto& [j, offset] : emb_offsets) {
          auto& table = model.embeddings_.at(j).table;
          std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(offset), table.size(), table.begin());
        }
      }
      const double epoch_loss = epoch_total / static_cast<double>(dataset.n());
      if (!std::isfinite(epoch_loss)) {
        throw NumericalError("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      report.epoch_loss.push_back(epoch_loss);
    }
    return {std::move(model), std::move(report)};
  }
};

TrainedMlp train_mlp(const data::Dataset& dataset, const MlpHyperparams& hp) {
  return MlpTrainer::run(dataset, hp);
}

data::Dataset relabel(const data::Dataset& dataset, const LabelProvider& model) {
  if (!(dataset.schema() == model.schema())) throw ContractError("dataset schema does not match the model schema");
  std::vector<int> labels;
  labels.reserve(dataset.n());
  for (const auto& row : dataset.rows()) labels.push_back(model.predict(row).label);
  return dataset.with_labels(std::move(labels));
}

void to_json(nlohmann::json& j, const MlpModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.network().layers()) {
    layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  }
  nlohmann::json stdz = nlohmann::json::object();
  nlohmann::json emb = nlohmann::json::object();
  const auto& schema = model.schema();
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (schema[f].kind == FeatureKind::numeric) {
      stdz[schema[f].name] = {{"mean", model.standardization()[f].mean},
                              {"std", model.standardization()[f].stddev}};
    } else {
      const auto& e = model.embeddings().at(f);
      nlohmann::json table = nlohmann::json::object();
      for (std::size_t c = 0; c < e.categories.size(); ++c) {
        table[e.categories[c]] = std::vector<double>(
            e.table.begin() + static_cast<std::ptrdiff_t>(c * model.embedding_dim()),
            e.table.begin() + static_cast<std::ptrdiff_t>((c + 1) * model.embedding_dim()));
      }
      emb[schema[f].name] = std::move(table);
    }
  }
  j = {{"kind", "mlp"},
       {"schema", schema},
       {"threshold", model.threshold()},
       {"embedding_dim", model.embedding_dim()},
       {"standardization", stdz},
       {"embeddings", emb},
       {"layers", layers}};
}

MlpModel mlp_model_from_json(const nlohmann::json& j) {
  try {
    const auto schema = j.at("schema").get<data::FeatureSchema>();
    const auto dim = j.at("embedding_dim").get<std::size_t>();
    std::vector<MlpModel::Standardization> stdz(schema.size());
    std::map<std::size_t, MlpModel::Embedding> embeddings;
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const auto& name = schema[f].name;
      if (schema[f].kind == FeatureKind::numeric) {
        const auto& s = j.at("standardization").at(name);
        stdz[f] = {s.at("mean").get<double>(), s.at("std").get<double>()};
      } else {
        MlpModel::Embedding e;
        for (const auto& item : j.at("embeddings").at(name).items()) {  // keys iterate sorted
          e.categories.push_back(item.key());
          const auto row = item.value().get<std::vector<double>>();
          if (row.size() != dim) throw DataError("embedding row for '" + item.key() + "' has the wrong width");
          e.table.insert(e.table.end(), row.begin(), row.end());
        }
        embeddings.emplace(f, std::move(e));
      }
    }
    std::vector<DenseLayer> layers;
    for (const auto& lj : j.at("layers")) {
      layers.push_back({lj.at("in").get<std::size_t>(), lj.at("out").get<std::size_t>(),
                        lj.at("weights").get<std::vector<double>>(), lj.at("bias").get<std::vector<double>>()});
    }
    return MlpModel(schema, dim, j.at("threshold").get<double>(), std::move(stdz), std::move(embeddings),
                    Network(std::move(layers)));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid model JSON: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("invalid model JSON: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const ConstantModel& model) {
  j = {{"kind", "constant"},
       {"schema", model.schema()},
       {"probability", model.probability({})},
       {"threshold", model.threshold()}};
}

std::unique_ptr<LabelProvider> model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw DataError("model JSON needs a \"kind\"");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "mlp") return std::make_unique<MlpModel>(mlp_model_from_json(j));
  if (kind == "constant") {
    try {
      return std::make_unique<ConstantModel>(j.at("schema").get<data::FeatureSchema>(), j.at("probability").get<double>(),
                                             j.value("threshold", 0.5));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("invalid constant model JSON: ") + e.what());
    }
  }
  throw DataError("unknown model kind '" + kind + "'");
}

}  // namespace rulepref::blackbox
