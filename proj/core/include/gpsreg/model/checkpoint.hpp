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

#include <string>

#include "gpsreg/model/gps_model.hpp"

namespace gpsreg {

// Checkpoint files are JSON:
//   {"config": {...}, "adam_step": int,
//    "params": {path: {"shape": [...], "data": [...]}},
//    "norm_stats": {"layer0.norm_m": {"mean": [...], "var": [...]}, ...}}

std::string model_config_to_json(const ModelConfig& config);
/// Reads the nested config object written by model_config_to_json.
ModelConfig model_config_from_json(const std::string& text);

std::string checkpoint_to_json(const GpsModel& model);
/// Rebuilds a model from its stored config, then validates every stored
/// tensor against the shapes that config implies.
GpsModel checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::string& path, const GpsModel& model);
GpsModel load_checkpoint(const std::string& path);

}  // namespace gpsreg
