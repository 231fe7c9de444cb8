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

#include "gpsreg/model/checkpoint.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gpsreg/error.hpp"

namespace gpsreg {
namespace {

using nlohmann::json;

json config_json(const ModelConfig& c) {
  return json{
      {"num_layers", c.num_layers},
      {"hidden", c.hidden},
      {"d_in", c.d_in},
      {"d_out", c.d_out},
      {"dropout", c.dropout},
      {"task", to_string(c.task)},
      {"reg",
       {{"variant", to_string(c.reg.variant)},
        {"lambda", c.reg.lambda},
        {"cutoff", c.reg.cutoff}}},
      {"encoding",
       {{"use_constant", c.encoding.use_constant},
        {"use_clustering", c.encoding.use_clustering},
        {"use_lap_pe", c.encoding.use_lap_pe},
        {"k_lap", c.encoding.k_lap},
        {"use_rwse", c.encoding.use_rwse},
        {"k_rw", c.encoding.k_rw},
        {"sign_flip_in_training", c.encoding.sign_flip_in_training}}},
  };
}

ModelConfig config_from(const json& j) {
  try {
    ModelConfig c;
    c.num_layers = j.at("num_layers").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.d_in = j.at("d_in").get<std::size_t>();
    c.d_out = j.at("d_out").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    c.task = parse_task(j.at("task").get<std::string>());
    const json& reg = j.at("reg");
    c.reg.variant = parse_reg_variant(reg.at("variant").get<std::string>());
    c.reg.lambda = reg.at("lambda").get<double>();
    c.reg.cutoff = reg.at("cutoff").get<bool>();
    const json& enc = j.at("encoding");
    c.encoding.use_constant = enc.at("use_constant").get<bool>();
    c.encoding.use_clustering = enc.at("use_clustering").get<bool>();
    c.encoding.use_lap_pe = enc.at("use_lap_pe").get<bool>();
    c.encoding.k_lap = enc.at("k_lap").get<std::size_t>();
    c.encoding.use_rwse = enc.at("use_rwse").get<bool>();
    c.encoding.k_rw = enc.at("k_rw").get<std::size_t>();
    c.encoding.sign_flip_in_training = enc.at("sign_flip_in_training").get<bool>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint config: ") + e.what());
  }
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string model_config_to_json(const ModelConfig& config) {
  return config_json(config).dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  return config_from(parse(text, "model config"));
}

std::string checkpoint_to_json(const GpsModel& model) {
  json params = json::object();
  for (const auto& e : model.params().entries()) {
    params[e.name] = {{"shape", e.value.shape()}, {"data", e.value.values()}};
  }
  json stats = json::object();
  const auto& norms = model.norm_states();
  for (std::size_t l = 0; l < norms.size(); ++l) {
    stats[layer_param(l, "norm_m")] = {{"mean", norms[l].mpnn.running_mean},
                                       {"var", norms[l].mpnn.running_var}};
    stats[layer_param(l, "norm_t")] = {{"mean", norms[l].attn.running_mean},
                                       {"var", norms[l].attn.running_var}};
  }
  json out{{"config", config_json(model.config())},
           {"adam_step", model.params().step()},
           {"params", std::move(params)},
           {"norm_stats", std::move(stats)}};
  return out.dump();
}

GpsModel checkpoint_from_json(const std::string& text) {
  const json root = parse(text, "checkpoint");
  if (!root.contains("config")) throw ValidationError("checkpoint.config: missing");
  GpsModel model(config_from(root["config"]), 0);

  try {
    const json& params = root.at("params");
    if (params.size() != model.params().size()) {
      throw ValidationError("checkpoint.params: expected " +
                            std::to_string(model.params().size()) +
                            " tensors, found " + std::to_string(params.size()));
    }
    for (auto& e : model.params().mutable_entries()) {
      if (!params.contains(e.name)) {
        throw ValidationError("checkpoint.params." + e.name + ": missing");
      }
      const json& p = params[e.name];
      const auto shape = p.at("shape").get<Shape>();
      if (shape != e.value.shape()) {
        throw ValidationError("checkpoint.params." + e.name + ": shape " +
                              shape_string(shape) + " but config implies " +
                              shape_string(e.value.shape()));
      }
      e.value = Tensor(shape, p.at("data").get<std::vector<double>>());
    }
    model.params().set_step(root.at("adam_step").get<std::uint64_t>());

    const json& stats = root.at("norm_stats");
    auto& norms = model.norm_states();
    const std::size_t d = model.config().hidden;
    auto load_state = [&](const std::string& key, BatchNormState& state) {
      if (!stats.contains(key)) {
        throw ValidationError("checkpoint.norm_stats." + key + ": missing");
      }
      auto mean = stats[key].at("mean").get<std::vector<double>>();
      auto var = stats[key].at("var").get<std::vector<double>>();
      if (mean.size() != d || var.size() != d) {
        throw ValidationError("checkpoint.norm_stats." + key + ": width mismatch");
      }
      state.running_mean = std::move(mean);
      state.running_var = std::move(var);
    };
    for (std::size_t l = 0; l < norms.size(); ++l) {
      load_state(layer_param(l, "norm_m"), norms[l].mpnn);
      load_state(layer_param(l, "norm_t"), norms[l].attn);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
  return model;
}

void save_checkpoint(const std::string& path, const GpsModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << checkpoint_to_json(model) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

GpsModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace gpsreg
