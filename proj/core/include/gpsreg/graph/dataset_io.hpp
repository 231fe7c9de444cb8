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
#include <string_view>

#include "gpsreg/graph/graph.hpp"

namespace gpsreg {

// JSON dataset files. Floats are written with round-trip precision, so a
// save/load cycle reproduces every feature bit for bit.

std::string dataset_to_json(const Dataset& ds);

/// Throws ParseError (with line and column) for malformed text and
/// ValidationError naming the offending field for schema violations.
Dataset dataset_from_json(std::string_view text);

/// Throws IoError when the file cannot be written.
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

}  // namespace gpsreg
