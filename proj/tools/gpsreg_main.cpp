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

// gpsreg command-line entry point.
//
//   gpsreg gen           synthetic datasets
//   gpsreg encode        positional/structural encodings + memory report
//   gpsreg train         training with any encoding/regularization setup
//   gpsreg gradcheck     finite-difference and cutoff checks
//   gpsreg inspect-attn  per-layer attention scores against adjacency
//
// Exit codes: 0 success, 1 validation error, 2 numeric failure, 3 I/O.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gpsreg/error.hpp"
#include "gpsreg/graph/dataset_io.hpp"
#include "gpsreg/graph/generators.hpp"
#include "gpsreg/harness/gradcheck.hpp"
#include "gpsreg/harness/inspect.hpp"
#include "gpsreg/harness/trainer.hpp"
#include "gpsreg/model/checkpoint.hpp"
#include "gpsreg/posenc/encoding.hpp"

namespace {

using namespace gpsreg;

enum ExitCode { kOk = 0, kValidation = 1, kNumeric = 2, kIo = 3 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text << '\n';
  if (!out) throw IoError("failed writing " + path);
}

template <typename T>
void override_with(const std::optional<T>& flag, T& field) {
  if (flag) field = *flag;
}

struct GenArgs {
  std::string config;
  std::optional<std::string> kind, features;
  std::optional<std::size_t> graphs, size, distance, knn_k;
  std::optional<double> edge_prob;
  std::optional<std::uint64_t> seed;
  std::string out;
};

DatasetSpec gen_spec_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DatasetSpec spec;
  spec.kind = j.value("kind", spec.kind);
  spec.num_graphs = j.value("num_graphs", spec.num_graphs);
  spec.graph_size = j.value("graph_size", spec.graph_size);
  spec.seed = j.value("seed", spec.seed);
  spec.edge_prob = j.value("edge_prob", spec.edge_prob);
  spec.min_distance = j.value("min_distance", spec.min_distance);
  spec.knn_k = j.value("knn_k", spec.knn_k);
  spec.node_features = j.value("node_features", spec.node_features);
  return spec;
}

int cmd_gen(const GenArgs& a) {
  DatasetSpec spec = a.config.empty() ? DatasetSpec{} : gen_spec_from_json(read_file(a.config));
  override_with(a.kind, spec.kind);
  override_with(a.features, spec.node_features);
  override_with(a.graphs, spec.num_graphs);
  override_with(a.size, spec.graph_size);
  override_with(a.distance, spec.min_distance);
  override_with(a.knn_k, spec.knn_k);
  override_with(a.edge_prob, spec.edge_prob);
  override_with(a.seed, spec.seed);
  const Dataset ds = generate_dataset(spec);
  save_dataset(a.out, ds);
  std::cout << nlohmann::json{{"graphs", ds.graphs.size()},
                              {"d_in", ds.d_in},
                              {"out", a.out}}
                   .dump()
            << '\n';
  return kOk;
}

struct EncodeArgs {
  std::string dataset, out;
  bool constant = false, clustering = false, pmt = false;
  std::optional<std::size_t> lap_pe, rwse;
};

int cmd_encode(const EncodeArgs& a) {
  EncodingConfig cfg;
  if (a.pmt) {
    cfg.use_constant = cfg.use_clustering = cfg.use_lap_pe = cfg.use_rwse = true;
    cfg.k_lap = 4;
    cfg.k_rw = 16;
  }
  cfg.use_constant |= a.constant;
  cfg.use_clustering |= a.clustering;
  if (a.lap_pe) {
    cfg.use_lap_pe = true;
    cfg.k_lap = *a.lap_pe;
  }
  if (a.rwse) {
    cfg.use_rwse = true;
    cfg.k_rw = *a.rwse;
  }
  const Dataset ds = load_dataset(a.dataset);
  const MemoryReport report = memory_report(ds, cfg);
  const Dataset encoded = encode_dataset(ds, cfg);
  if (!a.out.empty()) save_dataset(a.out, encoded);
  std::cerr << report.to_table();
  std::cout << report.to_json() << '\n';
  return kOk;
}

struct TrainArgs {
  std::string config, dataset, out, metrics;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps, layers, hidden, eval_every, lap_pe, rwse;
  std::optional<double> lr, dropout, lambda, main_weight;
  std::optional<std::string> reg, task;
  bool no_cutoff = false, constant = false, clustering = false, no_sign_flip = false,
       wall_time = false;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : run_config_from_json(read_file(a.config));
  if (!a.dataset.empty()) cfg.dataset_path = a.dataset;
  if (!a.out.empty()) cfg.checkpoint_path = a.out;
  if (!a.metrics.empty()) cfg.metrics_path = a.metrics;
  override_with(a.seed, cfg.seed);
  override_with(a.steps, cfg.steps);
  override_with(a.layers, cfg.model.num_layers);
  override_with(a.hidden, cfg.model.hidden);
  override_with(a.eval_every, cfg.eval_every);
  override_with(a.lr, cfg.adam.lr);
  override_with(a.dropout, cfg.model.dropout);
  override_with(a.lambda, cfg.model.reg.lambda);
  override_with(a.main_weight, cfg.main_weight);
  if (a.reg) cfg.model.reg.variant = parse_reg_variant(*a.reg);
  if (a.task) cfg.model.task = parse_task(*a.task);
  if (a.no_cutoff) cfg.model.reg.cutoff = false;
  if (a.constant) cfg.model.encoding.use_constant = true;
  if (a.clustering) cfg.model.encoding.use_clustering = true;
  if (a.lap_pe) {
    cfg.model.encoding.use_lap_pe = true;
    cfg.model.encoding.k_lap = *a.lap_pe;
  }
  if (a.rwse) {
    cfg.model.encoding.use_rwse = true;
    cfg.model.encoding.k_rw = *a.rwse;
  }
  if (a.no_sign_flip) cfg.model.encoding.sign_flip_in_training = false;
  if (a.wall_time) cfg.record_wall_time = true;
  if (cfg.dataset_path.empty()) throw ValidationError("dataset: no dataset path given");

  const Dataset ds = load_dataset(cfg.dataset_path);
  std::ofstream metrics_file;
  std::ostream* metrics = &std::cout;
  if (!cfg.metrics_path.empty()) {
    metrics_file.open(cfg.metrics_path, std::ios::binary | std::ios::trunc);
    if (!metrics_file) throw IoError("cannot open " + cfg.metrics_path + " for writing");
    metrics = &metrics_file;
  }
  const TrainResult result = train(cfg, ds, metrics);
  if (!cfg.checkpoint_path.empty()) save_checkpoint(cfg.checkpoint_path, result.model);
  return kOk;
}

int cmd_gradcheck(const std::string& scope, std::uint64_t seed) {
  const GradcheckReport report = run_gradcheck(scope, seed);
  std::cout << report.to_json() << '\n';
  for (const auto& c : report.checks) {
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << "  error=" << c.error
              << "  " << c.detail << '\n';
  }
  return report.passed() ? kOk : kNumeric;
}

int cmd_inspect(const std::string& checkpoint, const std::string& dataset,
                std::size_t index, const std::string& out) {
  const GpsModel model = load_checkpoint(checkpoint);
  const Dataset ds = load_dataset(dataset);
  const std::string dump = inspect_attention(model, ds, index);
  if (out.empty()) {
    std::cout << dump << '\n';
  } else {
    write_file(out, dump);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid graph transformer with attention edge regularization"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen_cmd->add_option("--config", gen.config, "Flat JSON generator config");
  gen_cmd->add_option("--kind", gen.kind, "er | distance_task | knn");
  gen_cmd->add_option("--features", gen.features, "random | onehot (er)");
  gen_cmd->add_option("--graphs", gen.graphs, "Number of graphs");
  gen_cmd->add_option("--size", gen.size, "Nodes per graph");
  gen_cmd->add_option("--p", gen.edge_prob, "Edge probability (er)");
  gen_cmd->add_option("--distance", gen.distance, "Minimum marked-pair distance (distance_task)");
  gen_cmd->add_option("--k", gen.knn_k, "Neighbours per node (knn)");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output dataset path")->required();

  EncodeArgs enc;
  auto* enc_cmd = app.add_subcommand("encode", "Append encodings and report memory inflation");
  enc_cmd->add_option("--dataset", enc.dataset, "Input dataset")->required();
  enc_cmd->add_option("--out", enc.out, "Encoded dataset path");
  enc_cmd->add_flag("--constant", enc.constant, "Constant-one column");
  enc_cmd->add_flag("--clustering", enc.clustering, "Clustering-coefficient column");
  enc_cmd->add_option("--lap-pe", enc.lap_pe, "Laplacian eigenvector count");
  enc_cmd->add_option("--rwse", enc.rwse, "Random-walk steps");
  enc_cmd->add_flag("--pmt", enc.pmt, "constant + clustering + lap-pe 4 + rwse 16");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", tr.config, "Flat JSON run config");
  train_cmd->add_option("--dataset", tr.dataset, "Dataset path");
  train_cmd->add_option("--out", tr.out, "Checkpoint output path");
  train_cmd->add_option("--metrics", tr.metrics, "JSONL metrics path (default stdout)");
  train_cmd->add_option("--seed", tr.seed, "Random seed");
  train_cmd->add_option("--steps", tr.steps, "Optimizer steps");
  train_cmd->add_option("--layers", tr.layers, "Number of GPS layers");
  train_cmd->add_option("--hidden", tr.hidden, "Hidden width");
  train_cmd->add_option("--eval-every", tr.eval_every, "Steps between validation passes");
  train_cmd->add_option("--lr", tr.lr, "Adam learning rate");
  train_cmd->add_option("--dropout", tr.dropout, "Dropout probability");
  train_cmd->add_option("--reg", tr.reg, "off | l1 | ce");
  train_cmd->add_option("--lambda", tr.lambda, "Regularization weight");
  train_cmd->add_flag("--no-cutoff", tr.no_cutoff, "Let regularization gradients reach every parameter");
  train_cmd->add_option("--main-weight", tr.main_weight, "Main-loss weight (0 = regularizer only)");
  train_cmd->add_option("--task", tr.task, "regression | classification");
  train_cmd->add_flag("--constant", tr.constant, "Constant-one column");
  train_cmd->add_flag("--clustering", tr.clustering, "Clustering-coefficient column");
  train_cmd->add_option("--lap-pe", tr.lap_pe, "Laplacian eigenvector count");
  train_cmd->add_option("--rwse", tr.rwse, "Random-walk steps");
  train_cmd->add_flag("--no-sign-flip", tr.no_sign_flip, "Disable random eigenvector sign flips");
  train_cmd->add_flag("--wall-time", tr.wall_time, "Record wall_ms in metrics");

  std::string scope;
  std::uint64_t gc_seed = 0;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Gradient integrity checks");
  gc_cmd->add_option("scope", scope, "ops | model | cutoff")->required();
  gc_cmd->add_option("--seed", gc_seed, "Base seed");

  std::string ckpt, ins_dataset, ins_out;
  std::size_t index = 0;
  auto* ins_cmd = app.add_subcommand("inspect-attn", "Dump attention scores for one graph");
  ins_cmd->add_option("--checkpoint", ckpt, "Trained checkpoint")->required();
  ins_cmd->add_option("--dataset", ins_dataset, "Dataset path")->required();
  ins_cmd->add_option("--index", index, "Graph index");
  ins_cmd->add_option("--out", ins_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*enc_cmd) return cmd_encode(enc);
    if (*train_cmd) return cmd_train(tr);
    if (*gc_cmd) return cmd_gradcheck(scope, gc_seed);
    if (*ins_cmd) return cmd_inspect(ckpt, ins_dataset, index, ins_out);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
