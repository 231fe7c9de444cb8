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

#include "gpsreg/edgereg/edge_reg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gpsreg/autodiff/ops.hpp"
#include "gpsreg/error.hpp"

namespace gpsreg {

RegVariant parse_reg_variant(const std::string& name) {
  if (name == "off" || name == "none") return RegVariant::kOff;
  if (name == "l1" || name == "L1") return RegVariant::kL1;
  if (name == "ce" || name == "CE") return RegVariant::kCE;
  throw ValidationError("reg.variant: unknown variant '" + name + "'");
}

std::string to_string(RegVariant variant) {
  switch (variant) {
    case RegVariant::kOff:
      return "off";
    case RegVariant::kL1:
      return "l1";
    case RegVariant::kCE:
      return "ce";
  }
  return "off";
}

void RegConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("reg.lambda: must be finite and >= 0");
  }
  if (enabled() && lambda == 0.0) {
    throw ValidationError("reg.lambda: must be > 0 when the regularizer is enabled");
  }
}

Tensor reg_scores(const Tensor& layer_input, const AttentionWeights& weights,
                  const Tensor& main_scores, bool cutoff) {
  if (!cutoff) return main_scores;
  return attention_scores(stop_gradient(layer_input), weights);
}

ScoreCache build_score_cache(const ForwardOutput& forward,
                             const BoundParams& bound, bool cutoff) {
  ScoreCache cache;
  cache.main = forward.score_cache;
  if (cutoff) {
    for (std::size_t l = 0; l < forward.score_cache.size(); ++l) {
      const AttentionWeights w = GpsLayerWeights::from(bound, l).attn;
      cache.barrier.push_back(
          reg_scores(forward.layer_inputs[l], w, forward.score_cache[l], true));
    }
  }
  return cache;
}

Tensor reg_loss(const ScoreCache& cache, const Tensor& adjacency,
                const RegConfig& config) {
  if (!config.enabled()) return Tensor::scalar(0.0);
  const auto& scores = cache.for_loss();
  if (scores.empty()) throw PreconditionError("reg_loss: empty score cache");

  Tensor total;
  for (std::size_t l = 0; l < scores.size(); ++l) {
    if (scores[l].shape() != adjacency.shape()) {
      throw DimensionError("reg_loss: layer " + std::to_string(l) + " scores " +
                           shape_string(scores[l].shape()) + " vs adjacency " +
                           shape_string(adjacency.shape()));
    }
    Tensor term = config.variant == RegVariant::kL1
                      ? l1_mean(sigmoid(scores[l]), adjacency)
                      : bce_mean(scores[l], adjacency);
    total = l == 0 ? std::move(term) : add(total, term);
  }
  return total;
}

Tensor total_loss(const Tensor& main, const Tensor& reg, double lambda) {
  return add(main, scale(reg, lambda));
}

double attention_adjacency_auc(const Tensor& scores, const Tensor& adjacency) {
  if (scores.rank() != 2 || scores.shape() != adjacency.shape() ||
      scores.rows() != scores.cols()) {
    throw DimensionError("attention_adjacency_auc: scores " +
                         shape_string(scores.shape()) + " vs adjacency " +
                         shape_string(adjacency.shape()));
  }
  const std::size_t n = scores.rows();
  // (score, is_edge) for every off-diagonal entry.
  std::vector<std::pair<double, bool>> entries;
  entries.reserve(n * n);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool edge = adjacency.at(i, j) != 0.0;
      positives += edge;
      entries.emplace_back(scores.at(i, j), edge);
    }
  const std::size_t negatives = entries.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw PreconditionError(
        "attention_adjacency_auc: needs at least one edge and one non-edge");
  }

  // Mann-Whitney U with mid-ranks for ties.
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double positive_rank_sum = 0.0;
  for (std::size_t lo = 0; lo < entries.size();) {
    std::size_t hi = lo;
    while (hi < entries.size() && entries[hi].first == entries[lo].first) ++hi;
    const double mid_rank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t i = lo; i < hi; ++i)
      if (entries[i].second) positive_rank_sum += mid_rank;
    lo = hi;
  }
  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

}  // namespace gpsreg
