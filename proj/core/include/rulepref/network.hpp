#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rulepref::blackbox {

// Fully connected layer; weights are (out x in), row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

// Feed-forward network with ReLU after every hidden layer and a single
// logit output. Parameters are addressable as one flat vector (layer by
// layer: weights, then bias) so optimizers and gradient checks can treat
// the network uniformly.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<DenseLayer> layers);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::size_t input_size() const noexcept { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t parameter_count() const noexcept;

  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  double logit(std::span<const double> input) const;

  // Mean class-weighted binary cross-entropy over a batch, and its gradient
  // w.r.t. the flat parameters (into param_grad) and w.r.t. each input row
  // (into input_grad, batch x input_size, when non-null).
  struct Batch {
    std::span<const double> inputs;      // rows x input_size
    std::span<const int> targets;        // 0/1
    std::span<const double> sample_weights;
  };
  double loss_and_gradient(const Batch& batch, std::vector<double>& param_grad,
                           std::vector<double>* input_grad) const;

 private:
  std::vector<DenseLayer> layers_;
};

// Numerically stable log(1 + exp(x)).
double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

}  // namespace rulepref::blackbox
