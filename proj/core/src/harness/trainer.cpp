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

#include "gpsreg/harness/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "gpsreg/edgereg/edge_reg.hpp"
#include "gpsreg/error.hpp"
#include "gpsreg/rng.hpp"

namespace gpsreg {
namespace {

using nlohmann::json;

Tensor target_tensor(const Graph& g) {
  return Tensor({1, g.y.size()}, g.y);
}

Tensor main_loss(const Tensor& prediction, const Graph& g, Task task) {
  const Tensor y = target_tensor(g);
  return task == Task::kRegression ? mse_mean(prediction, y) : bce_mean(prediction, y);
}

bool has_lap_columns(const Dataset& ds) {
  return std::any_of(ds.encodings.begin(), ds.encodings.end(),
                     [](const ColumnRange& r) { return r.name == "lap_pe"; });
}

}  // namespace

void RunConfig::validate() const {
  if (steps < 1) throw ValidationError("steps: must be >= 1");
  if (eval_every < 1) throw ValidationError("eval_every: must be >= 1");
  if (!(adam.lr > 0.0)) throw ValidationError("lr: must be > 0");
  if (!(main_weight >= 0.0)) throw ValidationError("main_weight: must be >= 0");
  if (main_weight == 0.0 && !model.reg.enabled()) {
    throw ValidationError("main_weight: 0 leaves nothing to train without a regularizer");
  }
  model.reg.validate();
  model.encoding.validate();
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: expected a flat JSON object");

  static const std::set<std::string> known = {
      "dataset",   "metrics_out", "checkpoint_out", "num_layers", "hidden",
      "dropout",   "task",        "reg_variant",    "reg_lambda", "reg_cutoff",
      "constant",  "clustering",  "lap_pe",         "k_lap",      "rwse",
      "k_rw",      "sign_flip",   "lr",             "steps",      "seed",
      "eval_every", "main_weight", "record_wall_time"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("config." + key + ": unknown key");
  }

  RunConfig c;
  auto read = [&](const char* key, auto& field) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
      field = it->get<std::decay_t<decltype(field)>>();
    } catch (const json::exception&) {
      throw ValidationError(std::string("config.") + key + ": wrong type");
    }
  };
  read("dataset", c.dataset_path);
  read("metrics_out", c.metrics_path);
  read("checkpoint_out", c.checkpoint_path);
  read("num_layers", c.model.num_layers);
  read("hidden", c.model.hidden);
  read("dropout", c.model.dropout);
  std::string task = to_string(c.model.task);
  read("task", task);
  c.model.task = parse_task(task);
  std::string variant = to_string(c.model.reg.variant);
  read("reg_variant", variant);
  c.model.reg.variant = parse_reg_variant(variant);
  read("reg_lambda", c.model.reg.lambda);
  read("reg_cutoff", c.model.reg.cutoff);
  read("constant", c.model.encoding.use_constant);
  read("clustering", c.model.encoding.use_clustering);
  read("lap_pe", c.model.encoding.use_lap_pe);
  read("k_lap", c.model.encoding.k_lap);
  read("rwse", c.model.encoding.use_rwse);
  read("k_rw", c.model.encoding.k_rw);
  read("sign_flip", c.model.encoding.sign_flip_in_training);
  read("lr", c.adam.lr);
  read("steps", c.steps);
  read("seed", c.seed);
  read("eval_every", c.eval_every);
  read("main_weight", c.main_weight);
  read("record_wall_time", c.record_wall_time);
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json j{{"dataset", c.dataset_path},
         {"metrics_out", c.metrics_path},
         {"checkpoint_out", c.checkpoint_path},
         {"num_layers", c.model.num_layers},
         {"hidden", c.model.hidden},
         {"dropout", c.model.dropout},
         {"task", to_string(c.model.task)},
         {"reg_variant", to_string(c.model.reg.variant)},
         {"reg_lambda", c.model.reg.lambda},
         {"reg_cutoff", c.model.reg.cutoff},
         {"constant", c.model.encoding.use_constant},
         {"clustering", c.model.encoding.use_clustering},
         {"lap_pe", c.model.encoding.use_lap_pe},
         {"k_lap", c.model.encoding.k_lap},
         {"rwse", c.model.encoding.use_rwse},
         {"k_rw", c.model.encoding.k_rw},
         {"sign_flip", c.model.encoding.sign_flip_in_training},
         {"lr", c.adam.lr},
         {"steps", c.steps},
         {"seed", c.seed},
         {"eval_every", c.eval_every},
         {"main_weight", c.main_weight},
         {"record_wall_time", c.record_wall_time}};
  return j.dump(2);
}

std::string MetricsRecord::to_json() const {
  json auc = json::array();
  for (const auto& a : attention_auc) {
    if (a) {
      auc.push_back(*a);
    } else {
      auc.push_back(nullptr);
    }
  }
  json j{{"step", step},
         {"train_main_loss", train_main_loss},
         {"train_reg_loss", train_reg_loss},
         {"val_metric", val_metric},
         {"attention_auc", std::move(auc)},
         {"wall_ms", wall_ms}};
  return j.dump();
}

Dataset prepare_dataset(const Dataset& raw, const EncodingConfig& encoding) {
  if (!raw.encodings.empty() || !encoding.any()) return raw;
  return encode_dataset(raw, encoding);
}

ModelConfig fit_to_dataset(ModelConfig config, const Dataset& ds) {
  config.d_in = ds.d_in;
  if (!ds.graphs.empty()) config.d_out = std::max<std::size_t>(1, ds.graphs[0].y.size());
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    if (std::max<std::size_t>(1, ds.graphs[i].y.size()) != config.d_out) {
      throw ValidationError("graphs[" + std::to_string(i) +
                            "].y: target width differs from graph 0");
    }
  }
  return config;
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<double>& labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double positives = std::count(labels.begin(), labels.end(), 1.0);
  if (positives == 0.0) return 0.0;
  double ap = 0.0, tp = 0.0, seen = 0.0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    double group_tp = 0.0;
    while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) {
      group_tp += labels[order[hi]] == 1.0;
      ++hi;
    }
    tp += group_tp;
    seen += static_cast<double>(hi - lo);
    ap += (group_tp / positives) * (tp / seen);
    lo = hi;
  }
  return ap;
}

double evaluate(const GpsModel& model, const Dataset& ds,
                const std::vector<std::size_t>& indices) {
  if (indices.empty()) return 0.0;
  const Task task = model.config().task;
  double abs_error = 0.0;
  std::vector<double> scores, labels;
  for (std::size_t idx : indices) {
    const Graph& g = ds.graphs.at(idx);
    Tape tape;
    const BoundParams bound = model.params().bind(tape);
    const Tensor pred = model.infer(g, bound).prediction;
    double err = 0.0;
    for (std::size_t j = 0; j < pred.size(); ++j) {
      err += std::abs(pred[j] - g.y[j]);
      scores.push_back(pred[j]);
      labels.push_back(g.y[j]);
    }
    abs_error += err / static_cast<double>(pred.size());
  }
  if (task == Task::kRegression) return abs_error / static_cast<double>(indices.size());
  return average_precision(scores, labels);
}

std::vector<std::optional<double>> attention_aucs(const GpsModel& model,
                                                  const Graph& g) {
  Tape tape;
  const BoundParams bound = model.params().bind(tape);
  const ForwardOutput out = model.infer(g, bound);
  const Tensor adjacency = adjacency_dense(g);
  std::vector<std::optional<double>> aucs;
  for (const Tensor& scores : out.score_cache) {
    try {
      aucs.emplace_back(attention_adjacency_auc(scores, adjacency));
    } catch (const PreconditionError&) {
      aucs.emplace_back(std::nullopt);
    }
  }
  return aucs;
}

TrainResult train(const RunConfig& config, const Dataset& raw, std::ostream* metrics) {
  config.validate();
  const Dataset ds = prepare_dataset(raw, config.model.encoding);
  if (ds.splits.train.empty()) throw ValidationError("splits.train: empty");

  TrainResult result{GpsModel(fit_to_dataset(config.model, ds), config.seed), {}};
  GpsModel& model = result.model;
  const ModelConfig& mc = model.config();
  const bool flip_signs = mc.encoding.sign_flip_in_training && has_lap_columns(ds);
  const std::vector<std::size_t>& eval_split =
      ds.splits.val.empty() ? ds.splits.train : ds.splits.val;
  const Graph& probe = ds.graphs[ds.splits.train.front()];

  Rng rng(config.seed ^ 0x5f3759dfULL);
  std::vector<std::size_t> order = ds.splits.train;
  std::size_t cursor = order.size();

  const auto start = std::chrono::steady_clock::now();
  double main_acc = 0.0, reg_acc = 0.0;
  std::size_t acc_count = 0;
  std::string last_finite = "none";

  for (std::size_t step = 1; step <= config.steps; ++step) {
    if (cursor == order.size()) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      cursor = 0;
    }
    const std::size_t graph_index = order[cursor++];
    const std::uint64_t dropout_seed = rng.next_u64();
    const std::uint64_t flip_seed = rng.next_u64();

    Graph g = ds.graphs[graph_index];
    if (flip_signs) g.x = flip_lap_columns(g.x, ds.encodings, flip_seed);

    double main_value = 0.0, reg_value = 0.0;
    try {
      Tape tape;
      const BoundParams bound = model.params().bind(tape);
      const ForwardOutput out = model.forward(g, bound, {true, dropout_seed});
      const Tensor main = main_loss(out.prediction, g, mc.task);
      const ScoreCache cache = build_score_cache(out, bound, mc.reg.cutoff);
      const Tensor reg = reg_loss(cache, adjacency_dense(g), mc.reg);
      const Tensor loss =
          config.main_weight == 0.0
              ? scale(reg, mc.reg.lambda)
              : total_loss(scale(main, config.main_weight), reg, mc.reg.lambda);
      main_value = main.item();
      reg_value = reg.item();
      if (!std::isfinite(loss.item())) throw NumericError("non-finite total loss");
      adam_step(model.params(), backward(loss, model.params()), config.adam);
      for (const auto& e : model.params().entries()) {
        if (!e.value.all_finite()) throw NumericError("non-finite parameter " + e.name);
      }
    } catch (const NumericError& e) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << " (graph " << graph_index
          << "): " << e.what() << "; last finite step: " << last_finite;
      throw NumericError(msg.str());
    }
    {
      std::ostringstream s;
      s << "{step: " << step << ", graph: " << graph_index
        << ", main_loss: " << main_value << ", reg_loss: " << reg_value << "}";
      last_finite = s.str();
    }

    main_acc += main_value;
    reg_acc += reg_value;
    ++acc_count;

    if (step % config.eval_every == 0 || step == config.steps) {
      MetricsRecord rec;
      rec.step = step;
      rec.train_main_loss = main_acc / static_cast<double>(acc_count);
      rec.train_reg_loss = reg_acc / static_cast<double>(acc_count);
      rec.val_metric = evaluate(model, ds, eval_split);
      rec.attention_auc = attention_aucs(model, probe);
      if (config.record_wall_time) {
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
      }
      if (metrics) *metrics << rec.to_json() << '\n' << std::flush;
      result.records.push_back(std::move(rec));
      main_acc = reg_acc = 0.0;
      acc_count = 0;
    }
  }
  return result;
}

}  // namespace gpsreg
