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

#include <vector>

#include "gpsreg/autodiff/param_set.hpp"
#include "gpsreg/autodiff/tensor.hpp"
#include "gpsreg/edgereg/reg_config.hpp"
#include "gpsreg/model/gps_model.hpp"

namespace gpsreg {

/// Attention scores the regularizer sees for one layer.
///
/// With `cutoff`, scores are recomputed from a gradient barrier on the layer
/// input, so the regularization gradient reaches only Wq, bq, Wk and bk.
/// Without it, the main-path scores are returned and gradients flow through
/// the whole network. Values are identical in both modes.
Tensor reg_scores(const Tensor& layer_input, const AttentionWeights& weights,
                  const Tensor& main_scores, bool cutoff);

/// Per-layer attention scores retained for the regularizer.
struct ScoreCache {
  /// Scores computed on the main forward path.
  std::vector<Tensor> main;
  /// Barrier-side recomputations; filled only when the cutoff is on.
  std::vector<Tensor> barrier;

  /// The tensors the loss is built from.
  const std::vector<Tensor>& for_loss() const { return barrier.empty() ? main : barrier; }
  std::size_t layers() const { return main.size(); }
};

ScoreCache build_score_cache(const ForwardOutput& forward,
                             const BoundParams& bound, bool cutoff);

/// Sum over layers of l1_mean(sigmoid(E), A) for L1, or bce_mean(E, A) for
/// CE. The off variant yields a constant zero. Throws DimensionError when a
/// cached matrix does not match A.
Tensor reg_loss(const ScoreCache& cache, const Tensor& adjacency,
                const RegConfig& config);

/// main + lambda * reg.
Tensor total_loss(const Tensor& main, const Tensor& reg, double lambda);

/// ROC-AUC of off-diagonal scores against adjacency entries, ties counted
/// as one half. Throws PreconditionError unless the off-diagonal adjacency
/// holds at least one edge and one non-edge.
double attention_adjacency_auc(const Tensor& scores, const Tensor& adjacency);

}  // namespace gpsreg
