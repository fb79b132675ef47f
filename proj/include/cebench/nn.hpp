// SPDX-License-Identifier: Apache-2.0
//
// CNN model descriptions and runtime: the 7-layer 2D U-net ("2du") and the
// 7-layer 3D feed-forward ("3dff") channel estimators, a connectivity
// abstraction that also names res-net/dense-net (extension points, not
// built here), parameter/MAC counters, He-style init, AdamW, and a binary
// checkpoint format.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cebench/grid.hpp"
#include "cebench/rng.hpp"
#include "cebench/tensor.hpp"

namespace cebench {

enum class Connectivity { FeedForward, UNet, ResNet, DenseNet };

const char* to_string(Connectivity c);

struct LayerSpec {
  int k_f = 1;  // kernel extent along frequency
  int k_t = 1;  // along time
  int k_a = 1;  // along rx antennas (3D only)
  int in_ch = 0;
  int out_ch = 0;
  bool gelu = true;
};

/// Skip edge: the output of layer `src` is concatenated (channel-wise, in
/// front of the serial input) into the input of layer `dst`. 0-based.
struct SkipEdge {
  int src = 0;
  int dst = 0;
};

struct ModelSpec {
  int conv_dims = 2;  // 2 or 3
  Connectivity connectivity = Connectivity::FeedForward;
  std::vector<LayerSpec> layers;
  std::vector<SkipEdge> skips;
};

/// 7 layers, kernels (7x5)x4 (5x5)x2 (3x3), channels 2-10-10-10-20-30-15 in
/// and 10-10-10-10-20-5-2 out; u-net concatenations feed layer 3's output
/// into layer 5, layer 2's into layer 6 and layer 1's into layer 7
/// (1-based), which is exactly where the 20/30/15 input widths come from.
/// GELU on layers 1-6, linear output layer.
ModelSpec build_2du();

/// 7 serially connected layers of 3D kernels (7x5x5)x4 (5x5x5)x2 (3x3x3),
/// channel chain 2-10-10-10-10-20-5-2. GELU on layers 1-6.
ModelSpec build_3dff();

/// Checks channel bookkeeping: each layer's in_ch must equal its serial
/// predecessor's out_ch plus all concatenated skip channels. Throws on
/// imbalance or malformed skip edges.
void validate_spec(const ModelSpec& spec);

/// Total parameter count: sum over layers of prod(kernel)*in*out + out.
std::int64_t count_params(const ModelSpec& spec);

/// Multiply-accumulate count of one model invocation on a grid with the
/// given spatial extents (n_rx ignored for 2D specs). Same-padding keeps
/// every layer at the input's spatial size, so the count is
/// sum_l prod(kernel_l)*in_l*out_l * (spatial positions).
std::int64_t count_macs(const ModelSpec& spec, int n_sc, int n_symb, int n_rx = 1);

template <typename T>
struct Model {
  ModelSpec spec;
  std::vector<TensorPtr<T>> weights;  // per layer
  std::vector<TensorPtr<T>> biases;

  /// He-style uniform fan-in init for the weights, zero biases.
  static Model random_init(const ModelSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    Model m;
    m.spec = spec;
    Rng rng(derive_seed(seed, 0xC0FFEE));
    for (const LayerSpec& l : spec.layers) {
      std::vector<int> wsh = spec.conv_dims == 2
                                 ? std::vector<int>{l.out_ch, l.in_ch, l.k_t, l.k_f}
                                 : std::vector<int>{l.out_ch, l.in_ch, l.k_a, l.k_t, l.k_f};
      auto w = make_tensor<T>(wsh, true);
      const double fan_in = static_cast<double>(l.in_ch) * l.k_f * l.k_t * l.k_a;
      const double bound = std::sqrt(6.0 / fan_in);
      for (T& v : w->data) v = static_cast<T>(rng.uniform(-bound, bound));
      m.weights.push_back(w);
      m.biases.push_back(make_tensor<T>({l.out_ch}, true));
    }
    return m;
  }

  /// Forward pass through the connectivity graph. Input shape {C,S,F} for
  /// 2D specs, {C,A,S,F} for 3D.
  TensorPtr<T> forward(Graph<T>& g, const TensorPtr<T>& input) const {
    if (spec.connectivity != Connectivity::FeedForward &&
        spec.connectivity != Connectivity::UNet)
      throw std::invalid_argument("forward: connectivity not implemented");
    std::vector<TensorPtr<T>> outs(spec.layers.size());
    TensorPtr<T> cur = input;
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
      for (const SkipEdge& e : spec.skips)
        if (e.dst == static_cast<int>(k)) cur = g.concat_channels(outs[e.src], cur);
      cur = spec.conv_dims == 2 ? g.conv2d(cur, weights[k], biases[k])
                                : g.conv3d(cur, weights[k], biases[k]);
      if (spec.layers[k].gelu) cur = g.gelu(cur);
      outs[k] = cur;
    }
    return cur;
  }

  /// All parameters in checkpoint order: per layer, weights then bias.
  std::vector<TensorPtr<T>> parameters() const {
    std::vector<TensorPtr<T>> out;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      out.push_back(weights[k]);
      out.push_back(biases[k]);
    }
    return out;
  }

  /// Weight tensors only; this is what the L2 term regularizes.
  std::vector<TensorPtr<T>> weight_tensors() const { return weights; }

  void zero_grad() const {
    for (const auto& p : parameters()) p->zero_grad();
  }
};

/// AdamW: decoupled weight decay, bias-corrected moments.
template <typename T>
class AdamW {
 public:
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  /// params update: p -= lr * (mhat / (sqrt(vhat) + eps) + weight_decay * p).
  /// Throws std::runtime_error (with the offending tensor index) on a
  /// non-finite gradient.
  void step(const std::vector<TensorPtr<T>>& params) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p->size(), T(0));
        v_.emplace_back(p->size(), T(0));
      }
    }
    if (m_.size() != params.size())
      throw std::invalid_argument("adamw: parameter list changed between steps");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Tensor<T>& p = *params[k];
      if (p.grad.size() != p.data.size())
        throw std::invalid_argument("adamw: parameter has no gradient");
      for (std::size_t i = 0; i < p.data.size(); ++i) {
        const double g = static_cast<double>(p.grad[i]);
        if (!std::isfinite(g))
          throw std::runtime_error("adamw: non-finite gradient in parameter tensor " +
                                   std::to_string(k) + " at element " + std::to_string(i));
        double m = beta1 * static_cast<double>(m_[k][i]) + (1.0 - beta1) * g;
        double v = beta2 * static_cast<double>(v_[k][i]) + (1.0 - beta2) * g * g;
        m_[k][i] = static_cast<T>(m);
        v_[k][i] = static_cast<T>(v);
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        const double upd = lr * (mhat / (std::sqrt(vhat) + eps) +
                                 weight_decay * static_cast<double>(p.data[i]));
        p.data[i] = static_cast<T>(static_cast<double>(p.data[i]) - upd);
      }
    }
  }

  std::int64_t step_count() const { return t_; }

 private:
  std::int64_t t_ = 0;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
};

/// Checkpoint: magic "MCNN", version, layer table, the grid dims the model
/// was trained for, then all parameters as little-endian 32-bit floats in
/// layer order (weights then biases).
void save_checkpoint(const std::string& path, const Model<float>& model,
                     const GridDims& train_dims);

struct LoadedCheckpoint {
  Model<float> model;
  GridDims train_dims;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

/// Header-only peek used by the CLI `inspect` subcommand.
struct CheckpointInfo {
  ModelSpec spec;
  GridDims train_dims;
  std::int64_t n_params = 0;
};
CheckpointInfo inspect_checkpoint(const std::string& path);

}  // namespace cebench
