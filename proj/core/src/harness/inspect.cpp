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

#include "gpsreg/harness/inspect.hpp"

#include <nlohmann/json.hpp>

#include "gpsreg/autodiff/ops.hpp"
#include "gpsreg/edgereg/edge_reg.hpp"
#include "gpsreg/error.hpp"
#include "gpsreg/harness/trainer.hpp"

namespace gpsreg {
namespace {

nlohmann::json matrix_json(const Tensor& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < t.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < t.cols(); ++j) row.push_back(t.at(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string inspect_attention(const GpsModel& model, const Dataset& raw,
                              std::size_t graph_index) {
  if (graph_index >= raw.graphs.size()) {
    throw ValidationError("graph_index: " + std::to_string(graph_index) +
                          " out of range for " + std::to_string(raw.graphs.size()) +
                          " graphs");
  }
  const Dataset ds = prepare_dataset(raw, model.config().encoding);
  const Graph& g = ds.graphs[graph_index];

  Tape tape;
  const BoundParams bound = model.params().bind(tape);
  const ForwardOutput out = model.infer(g, bound);
  const Tensor adjacency = adjacency_dense(g);

  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < out.score_cache.size(); ++l) {
    const Tensor& scores = out.score_cache[l];
    nlohmann::json auc = nullptr;
    try {
      auc = attention_adjacency_auc(scores, adjacency);
    } catch (const PreconditionError&) {
    }
    layers.push_back({{"layer", l},
                      {"scores", matrix_json(scores)},
                      {"sigmoid", matrix_json(sigmoid(scores.detached()))},
                      {"auc", auc}});
  }
  nlohmann::json j{{"graph_index", graph_index},
                   {"n", g.n},
                   {"adjacency", matrix_json(adjacency)},
                   {"layers", std::move(layers)}};
  return j.dump();
}

}  // namespace gpsreg
