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

namespace gpsreg {

enum class RegVariant { kOff, kL1, kCE };

/// Throws ValidationError for anything but "off", "l1" or "ce".
RegVariant parse_reg_variant(const std::string& name);
std::string to_string(RegVariant variant);

/// Edge-regularization settings.
struct RegConfig {
  RegVariant variant = RegVariant::kOff;
  /// Weight of the regularization term in the total loss.
  double lambda = 0.0;
  /// Confine regularization gradients to the query/key projections.
  bool cutoff = true;

  /// lambda must be non-negative, and positive unless the variant is off.
  void validate() const;
  bool enabled() const { return variant != RegVariant::kOff; }
};

}  // namespace gpsreg
