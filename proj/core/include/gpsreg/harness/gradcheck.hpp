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
#include <functional>
#include <string>
#include <vector>

#include "gpsreg/autodiff/tensor.hpp"

namespace gpsreg {

struct CheckResult {
  std::string name;
  /// Worst normwise relative error (gradient checks) or offending norm
  /// (zero-gradient checks).
  double error = 0.0;
  bool passed = false;
  std::string detail;
};

struct GradcheckReport {
  std::string scope;
  double tolerance = 0.0;
  std::vector<CheckResult> checks;

  bool passed() const;
  std::string to_json() const;
};

/// ||analytic - numeric|| / max(||analytic||, ||numeric||), falling back to
/// the absolute difference when both norms are below 1e-8.
double normwise_relative_error(std::span<const double> analytic,
                               std::span<const double> numeric);

/// Builds a scalar from taped inputs.
using ScalarFn = std::function<Tensor(const std::vector<Tensor>& inputs)>;

/// Worst normwise relative error between reverse-mode gradients of `fn`
/// and central differences with step `h`, over every input tensor.
double finite_difference_error(const ScalarFn& fn, const std::vector<Tensor>& inputs,
                               double h = 1e-5);

/// Every primitive on random shapes over `seeds` seeds.
GradcheckReport gradcheck_ops(std::size_t seeds = 20, double tolerance = 1e-4,
                              std::uint64_t base_seed = 0);

/// Whole model (6 nodes, 2 layers, width 4) under main + regularization
/// loss, over `seeds` seeds.
GradcheckReport gradcheck_model(std::size_t seeds = 20, double tolerance = 1e-4,
                                std::uint64_t base_seed = 0);

/// Regularization-only gradients: bitwise zero outside the query/key
/// projections with the cutoff, nonzero on layer-0 parameters without it.
GradcheckReport gradcheck_cutoff(std::uint64_t base_seed = 0);

/// Dispatches on "ops", "model" or "cutoff"; ValidationError otherwise.
GradcheckReport run_gradcheck(const std::string& scope, std::uint64_t base_seed = 0);

}  // namespace gpsreg
