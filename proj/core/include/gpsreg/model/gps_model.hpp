// Copyright 2026 The gpsreg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpsreg/autodiff/ops.hpp"
#include "gpsreg/autodiff/param_set.hpp"
#include "gpsreg/edgereg/reg_config.hpp"
#include "gpsreg/graph/graph.hpp"
#include "gpsreg/posenc/encoding.hpp"

namespace gpsreg {

enum class Task { kRegression, kBinaryClassification };

Task parse_task(const std::string& name);
std::string to_string(Task task);

struct ModelConfig {
  std::size_t num_layers = 3;
  std::size_t hidden = 32;
  std::size_t d_in = 1;
  std::size_t d_out = 1;
  double dropout = 0.1;
  RegConfig reg;
  EncodingConfig encoding;
  Task task = Task::kRegression;

  void validate() const;
};

/// Parameter path for a layer-local tensor, e.g. layer_param(0, "attn.WQ")
/// gives "layer0.attn.WQ".
std::string layer_param(std::size_t layer, const std::string& leaf);

/// Query/key/value projections of one single-head attention block.
struct AttentionWeights {
  Tensor wq, bq, wk, bk, wv, bv;
};

/// Every tensor one GPS layer reads, resolved from a BoundParams or built
/// directly from constants.
struct GpsLayerWeights {
  Tensor mpnn_w, mpnn_b;
  AttentionWeights attn;
  Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;
  Tensor norm_m_gamma, norm_m_beta;
  Tensor norm_t_gamma, norm_t_beta;

  static GpsLayerWeights from(const BoundParams& bound, std::size_t layer);
};

/// Batch statistics of the two normalizations in a layer.
struct LayerNormStates {
  BatchNormState mpnn;
  BatchNormState attn;
};

/// ReLU(Â X W + b).
Tensor gcn_forward(const Tensor& x, const Tensor& a_hat, const Tensor& w,
                   const Tensor& b);

/// Raw attention scores (x Wq + bq)(x Wk + bk)^T / sqrt(d).
Tensor attention_scores(const Tensor& x, const AttentionWeights& w);

struct AttentionOutput {
  Tensor out;
  /// Pre-softmax n×n scores.
  Tensor scores;
};

/// Single-head global attention without an output projection:
/// softmax_rows(scores) (x Wv + bv).
AttentionOutput attention_forward(const Tensor& x, const AttentionWeights& w);

struct LayerOutput {
  Tensor x;
  Tensor scores;
};

/// One hybrid layer:
///   M = BatchNorm(Dropout(GCN(x)) + x)
///   T = BatchNorm(Dropout(Attn(x)) + x)
///   x' = MLP(M + T)
/// with MLP = Linear(d, 2d) -> ReLU -> Linear(2d, d).
LayerOutput gps_layer_forward(const Tensor& x, const Tensor& a_hat,
                              const GpsLayerWeights& w, LayerNormStates& norms,
                              double dropout_p, bool train, Rng& rng);

struct ForwardOutput {
  /// 1×d_out.
  Tensor prediction;
  /// Raw n×n scores, one per layer.
  std::vector<Tensor> score_cache;
  /// Input of each layer, kept so scores can be rebuilt behind a barrier.
  std::vector<Tensor> layer_inputs;
  /// 1×hidden mean over nodes.
  Tensor pooled;
};

struct ForwardOptions {
  bool train = false;
  /// Seeds the dropout masks.
  std::uint64_t seed = 0;
};

/// Input encoder, stacked GPS layers, mean pooling and a linear head.
class GpsModel {
 public:
  /// Glorot-uniform weights, zero biases, unit BatchNorm scale.
  GpsModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }
  const std::vector<LayerNormStates>& norm_states() const { return norms_; }
  std::vector<LayerNormStates>& norm_states() { return norms_; }

  /// Training-mode calls update the running BatchNorm statistics.
  ForwardOutput forward(const Graph& g, const BoundParams& bound,
                        const ForwardOptions& options);

  /// Eval-mode forward that leaves the model untouched.
  ForwardOutput infer(const Graph& g, const BoundParams& bound) const;

  /// Learnable scalars per GPS layer: 8d^2 + 11d.
  static std::size_t layer_parameter_count(std::size_t hidden);
  /// Learnable scalars in the whole model.
  static std::size_t parameter_count(const ModelConfig& config);

 private:
  ForwardOutput run(const Graph& g, const BoundParams& bound, bool train,
                    std::uint64_t seed, std::vector<LayerNormStates>& norms) const;

  ModelConfig config_;
  ParamSet params_;
  std::vector<LayerNormStates> norms_;
};

}  // namespace gpsreg
