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
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "gpsreg/autodiff/tape.hpp"
#include "gpsreg/autodiff/tensor.hpp"

namespace gpsreg {

/// Parameter path -> gradient tensor.
using GradientMap = std::map<std::string, Tensor>;

/// Parameters bound as named leaves on one tape.
class BoundParams {
 public:
  const Tensor& operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return leaves_.count(name) != 0; }

 private:
  friend class ParamSet;
  std::unordered_map<std::string, Tensor> leaves_;
};

/// Named trainable tensors plus Adam moment estimates.
///
/// Iteration order is insertion order, which keeps checkpoints and gradient
/// reports stable.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
  };

  /// Throws ValidationError on a duplicate name.
  void add(std::string name, Tensor value);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const Tensor& value(const std::string& name) const;
  Tensor& mutable_value(const std::string& name);

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& mutable_entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  /// Total scalar count across all parameters.
  std::size_t scalar_count() const;

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t step) { step_ = step; }

  /// Registers every parameter as a named leaf on `tape`.
  BoundParams bind(Tape& tape) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t step_ = 0;
};

/// Gradient of a scalar loss for every parameter in `params`. Parameters the
/// loss does not reach get exact zeros. Throws DimensionError for a
/// non-scalar loss and PreconditionError when the loss is not on a tape.
GradientMap backward(const Tensor& loss, const ParamSet& params);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update of every parameter. Throws ValidationError
/// if `grads` lacks an entry for any parameter.
void adam_step(ParamSet& params, const GradientMap& grads,
               const AdamConfig& config);

}  // namespace gpsreg
