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

#include "gpsreg/graph/graph.hpp"
#include "gpsreg/model/gps_model.hpp"

namespace gpsreg {

/// JSON dump of one graph's attention in eval mode:
///   {"graph_index", "n", "adjacency",
///    "layers": [{"layer", "scores", "sigmoid", "auc"}]}
/// `auc` is null when the adjacency is all edges or all non-edges. The
/// dataset is encoded on the fly if the model expects encodings. Throws
/// ValidationError for an out-of-range index.
std::string inspect_attention(const GpsModel& model, const Dataset& ds,
                              std::size_t graph_index);

}  // namespace gpsreg
