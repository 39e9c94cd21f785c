#include "rulepref/network.hpp"

#include <algorithm>
#include <cmath>

#include "rulepref/error.hpp"

namespace rulepref::blackbox {

double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Network::Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ContractError("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      throw ContractError("layer " + std::to_string(l) + " has inconsistent shapes");
    }
    if (l > 0 && layer.in != layers_[l - 1].out) throw ContractError("layer widths do not chain");
  }
  if (layers_.back().out != 1) throw ContractError("output layer must have a single unit");
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> Network::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void Network::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ContractError("parameter vector has the wrong size");
  std::size_t k = 0;
  for (auto& l : layers_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(k), l.weights.size(), l.weights.begin());
    k += l.weights.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(k), l.bias.size(), l.bias.begin());
    k += l.bias.size();
  }
}

double Network::logit(std::span<const double> input) const {
  if (input.size() != input_size()) throw ContractError("network input has the wrong size");
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    next.assign(layer.out, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double z = layer.bias[o];
      const double* w = layer.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) z += w[i] * cur[i];
      next[o] = (l + 1 < layers_.size()) ? std::max(z, 0.0) : z;
    }
    cur.swap(next);
  }
  return cur[0];
}

double Network::loss_and_gradient(const Batch& batch, std::vector<double>& param_grad,
                                  std::vector<double>* input_grad) const {
  const std::size_t width = input_size();
  const std::size_t rows = batch.targets.size();
  if (rows == 0 || batch.inputs.size() != rows * width || batch.sample_weights.size() != rows) {
    throw ContractError("batch shapes are inconsistent");
  }
  param_grad.assign(parameter_count(), 0.0);
  if (input_grad) input_grad->assign(rows * width, 0.0);

  std::vector<std::size_t> offsets;  // flat offset of each layer's weights
  std::size_t off = 0;
  for (const auto& l : layers_) {
    offsets.push_back(off);
    off += l.weights.size() + l.bias.size();
  }

  const std::size_t depth = layers_.size();
  std::vector<std::vector<double>> acts(depth + 1);  // acts[0] = input, acts[l+1] = output of layer l
  std::vector<double> delta, prev_delta;
  double total = 0.0;
  const double scale = 1.0 / static_cast<double>(rows);

  for (std::size_t r = 0; r < rows; ++r) {
    acts[0].assign(batch.inputs.begin() + static_cast<std::ptrdiff_t>(r * width),
                   batch.inputs.begin() + static_cast<std::ptrdiff_t>((r + 1) * width));
    for (std::size_t l = 0; l < depth; ++l) {
      const auto& layer = layers_[l];
      auto& out = acts[l + 1];
      out.assign(layer.out, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        double z = layer.bias[o];
        const double* w = layer.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) z += w[i] * acts[l][i];
        out[o] = (l + 1 < depth) ? std::max(z, 0.0) : z;
      }
    }
    const double z = acts[depth][0];
    const double y = batch.targets[r] ? 1.0 : 0.0;
    const double sw = batch.sample_weights[r];
    total += sw * (softplus(z) - y * z);

    delta.assign(1, sw * (sigmoid(z) - y) * scale);
    for (std::size_t l = depth; l-- > 0;) {
      const auto& layer = layers_[l];
      double* gw = param_grad.data() + offsets[l];
      double* gb = gw + layer.weights.size();
      prev_delta.assign(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        gb[o] += d;
        const double* w = layer.weights.data() + o * layer.in;
        double* g = gw + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) {
          g[i] += d * acts[l][i];
          prev_delta[i] += d * w[i];
        }
      }
      if (l > 0) {
        // ReLU derivative of the previous layer's pre-activation.
        for (std::size_t i = 0; i < layer.in; ++i) {
          if (acts[l][i] <= 0.0) prev_delta[i] = 0.0;
        }
      } else if (input_grad) {
        std::copy(prev_delta.begin(), prev_delta.end(), input_grad->begin() + static_cast<std::ptrdiff_t>(r * width));
      }
      delta.swap(prev_delta);
    }
  }
  return total * scale;
}

}  // namespace rulepref::blackbox
