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

#include "gpsreg/model/gps_model.hpp"

#include <cmath>
#include <utility>

#include "gpsreg/error.hpp"
#include "gpsreg/rng.hpp"

namespace gpsreg {
namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w = Tensor::zeros({fan_in, fan_out});
  for (double& v : w.mutable_data()) v = rng.uniform(-limit, limit);
  return w;
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add_row_broadcast(matmul(x, w), b);
}

}  // namespace

Task parse_task(const std::string& name) {
  if (name == "regression") return Task::kRegression;
  if (name == "classification" || name == "binary-classification") {
    return Task::kBinaryClassification;
  }
  throw ValidationError("task: unknown task '" + name + "'");
}

std::string to_string(Task task) {
  return task == Task::kRegression ? "regression" : "classification";
}

void ModelConfig::validate() const {
  if (num_layers < 1) throw ValidationError("num_layers: must be >= 1");
  if (hidden < 1) throw ValidationError("hidden: must be >= 1");
  if (d_out < 1) throw ValidationError("d_out: must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ValidationError("dropout: must lie in [0, 1)");
  }
  reg.validate();
  encoding.validate();
}

std::string layer_param(std::size_t layer, const std::string& leaf) {
  return "layer" + std::to_string(layer) + "." + leaf;
}

GpsLayerWeights GpsLayerWeights::from(const BoundParams& bound, std::size_t layer) {
  auto p = [&](const char* leaf) { return bound[layer_param(layer, leaf)]; };
  return GpsLayerWeights{
      p("mpnn.W"),
      p("mpnn.b"),
      AttentionWeights{p("attn.WQ"), p("attn.bQ"), p("attn.WK"), p("attn.bK"),
                       p("attn.WV"), p("attn.bV")},
      p("mlp.W1"),
      p("mlp.b1"),
      p("mlp.W2"),
      p("mlp.b2"),
      p("norm_m.gamma"),
      p("norm_m.beta"),
      p("norm_t.gamma"),
      p("norm_t.beta"),
  };
}

Tensor gcn_forward(const Tensor& x, const Tensor& a_hat, const Tensor& w,
                   const Tensor& b) {
  if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.rows()) {
    throw DimensionError("gcn_forward: features " + shape_string(x.shape()) +
                         " do not match weight " + shape_string(w.shape()));
  }
  return relu(add_row_broadcast(matmul(a_hat, matmul(x, w)), b));
}

Tensor attention_scores(const Tensor& x, const AttentionWeights& w) {
  const Tensor q = affine(x, w.wq, w.bq);
  const Tensor k = affine(x, w.wk, w.bk);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return scale(matmul(q, transpose(k)), inv_sqrt_d);
}

AttentionOutput attention_forward(const Tensor& x, const AttentionWeights& w) {
  Tensor scores = attention_scores(x, w);
  const Tensor v = affine(x, w.wv, w.bv);
  Tensor out = matmul(softmax_rows(scores), v);
  return AttentionOutput{std::move(out), std::move(scores)};
}

LayerOutput gps_layer_forward(const Tensor& x, const Tensor& a_hat,
                              const GpsLayerWeights& w, LayerNormStates& norms,
                              double dropout_p, bool train, Rng& rng) {
  const Tensor local = gcn_forward(x, a_hat, w.mpnn_w, w.mpnn_b);
  AttentionOutput global = attention_forward(x, w.attn);

  const Tensor m = batchnorm_nodes(add(dropout(local, dropout_p, train, rng), x),
                                   w.norm_m_gamma, w.norm_m_beta, norms.mpnn, train);
  const Tensor t = batchnorm_nodes(add(dropout(global.out, dropout_p, train, rng), x),
                                   w.norm_t_gamma, w.norm_t_beta, norms.attn, train);

  const Tensor hidden = relu(affine(add(m, t), w.mlp_w1, w.mlp_b1));
  Tensor out = affine(hidden, w.mlp_w2, w.mlp_b2);
  return LayerOutput{std::move(out), std::move(global.scores)};
}

GpsModel::GpsModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  const std::size_t d = config_.hidden;
  params_.add("encoder.W", glorot(config_.d_in, d, rng));
  params_.add("encoder.b", Tensor::zeros({d}));
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    params_.add(layer_param(l, "mpnn.W"), glorot(d, d, rng));
    params_.add(layer_param(l, "mpnn.b"), Tensor::zeros({d}));
    for (const char* proj : {"Q", "K", "V"}) {
      params_.add(layer_param(l, std::string("attn.W") + proj), glorot(d, d, rng));
      params_.add(layer_param(l, std::string("attn.b") + proj), Tensor::zeros({d}));
    }
    params_.add(layer_param(l, "mlp.W1"), glorot(d, 2 * d, rng));
    params_.add(layer_param(l, "mlp.b1"), Tensor::zeros({2 * d}));
    params_.add(layer_param(l, "mlp.W2"), glorot(2 * d, d, rng));
    params_.add(layer_param(l, "mlp.b2"), Tensor::zeros({d}));
    params_.add(layer_param(l, "norm_m.gamma"), Tensor::filled({d}, 1.0));
    params_.add(layer_param(l, "norm_m.beta"), Tensor::zeros({d}));
    params_.add(layer_param(l, "norm_t.gamma"), Tensor::filled({d}, 1.0));
    params_.add(layer_param(l, "norm_t.beta"), Tensor::zeros({d}));
    norms_.push_back(LayerNormStates{BatchNormState(d), BatchNormState(d)});
  }
  params_.add("head.W", glorot(d, config_.d_out, rng));
  params_.add("head.b", Tensor::zeros({config_.d_out}));
}

ForwardOutput GpsModel::forward(const Graph& g, const BoundParams& bound,
                                const ForwardOptions& options) {
  return run(g, bound, options.train, options.seed, norms_);
}

ForwardOutput GpsModel::infer(const Graph& g, const BoundParams& bound) const {
  // Eval mode reads the running statistics but never writes them.
  std::vector<LayerNormStates> norms = norms_;
  return run(g, bound, /*train=*/false, 0, norms);
}

ForwardOutput GpsModel::run(const Graph& g, const BoundParams& bound, bool train,
                            std::uint64_t seed,
                            std::vector<LayerNormStates>& norms) const {
  if (g.feature_width() != config_.d_in) {
    throw DimensionError("model_forward: graph has " +
                         std::to_string(g.feature_width()) +
                         " feature columns, model expects " +
                         std::to_string(config_.d_in));
  }
  Rng rng(seed);
  const Tensor a_hat = gcn_norm_adjacency(g);

  ForwardOutput out;
  Tensor h = affine(g.x, bound["encoder.W"], bound["encoder.b"]);
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    out.layer_inputs.push_back(h);
    LayerOutput layer = gps_layer_forward(h, a_hat, GpsLayerWeights::from(bound, l),
                                          norms[l], config_.dropout, train, rng);
    out.score_cache.push_back(std::move(layer.scores));
    h = std::move(layer.x);
  }
  out.pooled = mean_pool_rows(h);
  out.prediction = affine(out.pooled, bound["head.W"], bound["head.b"]);
  return out;
}

std::size_t GpsModel::layer_parameter_count(std::size_t hidden) {
  const std::size_t d = hidden;
  return 8 * d * d + 11 * d;
}

std::size_t GpsModel::parameter_count(const ModelConfig& config) {
  const std::size_t d = config.hidden;
  return config.d_in * d + d + config.num_layers * layer_parameter_count(d) +
         d * config.d_out + config.d_out;
}

}  // namespace gpsreg
