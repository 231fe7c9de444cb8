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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gpsreg/autodiff/param_set.hpp"
#include "gpsreg/graph/graph.hpp"
#include "gpsreg/model/gps_model.hpp"

namespace gpsreg {

/// Everything one training run needs.
///
/// Serialized as a flat JSON object; see run_config_from_json for the keys.
/// The model's d_in and d_out are taken from the dataset at train time.
struct RunConfig {
  std::string dataset_path;
  std::string metrics_path;
  std::string checkpoint_path;

  ModelConfig model;
  AdamConfig adam;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  std::size_t eval_every = 50;
  /// Weight of the main loss; 0 trains on the regularizer alone.
  double main_weight = 1.0;
  /// Off by default so repeated runs produce byte-identical metrics.
  bool record_wall_time = false;

  void validate() const;
};

/// Reads a flat JSON config. Keys: dataset, metrics_out, checkpoint_out,
/// num_layers, hidden, dropout, task, reg_variant, reg_lambda, reg_cutoff,
/// constant, clustering, lap_pe, k_lap, rwse, k_rw, sign_flip, lr, steps,
/// seed, eval_every, main_weight, record_wall_time. Missing keys keep their
/// defaults; unknown keys are a ValidationError.
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

struct MetricsRecord {
  std::size_t step = 0;
  double train_main_loss = 0.0;
  double train_reg_loss = 0.0;
  /// MAE for regression, average precision for classification.
  double val_metric = 0.0;
  /// Per layer; empty optional when the probe graph has no edges or no
  /// non-edges.
  std::vector<std::optional<double>> attention_auc;
  double wall_ms = 0.0;

  /// One JSONL line, without the trailing newline.
  std::string to_json() const;
};

/// Applies the model's encodings to a raw dataset. Already encoded datasets
/// are returned unchanged.
Dataset prepare_dataset(const Dataset& raw, const EncodingConfig& encoding);

/// Copy of `config` with d_in and d_out read from `ds`.
ModelConfig fit_to_dataset(ModelConfig config, const Dataset& ds);

struct TrainResult {
  GpsModel model;
  std::vector<MetricsRecord> records;
};

/// Runs the optimization loop. Each step draws one training graph, computes
/// main_weight * L_main + lambda * L_edge_reg, backpropagates and applies
/// Adam. A record is emitted every eval_every steps and after the last step,
/// and written to `metrics` as a JSONL line when given.
///
/// Throws NumericError with a dump of the last finite step when the loss
/// stops being finite.
TrainResult train(const RunConfig& config, const Dataset& ds,
                  std::ostream* metrics = nullptr);

/// Validation metric of `model` over the graphs at `indices` (eval mode).
double evaluate(const GpsModel& model, const Dataset& ds,
                const std::vector<std::size_t>& indices);

/// Per-layer attention AUC of `model` on one graph (eval mode).
std::vector<std::optional<double>> attention_aucs(const GpsModel& model,
                                                  const Graph& g);

/// Area under the precision-recall curve as the mean precision at each
/// positive, with tied scores ranked pessimistically as a group.
double average_precision(const std::vector<double>& scores,
                         const std::vector<double>& labels);

}  // namespace gpsreg
