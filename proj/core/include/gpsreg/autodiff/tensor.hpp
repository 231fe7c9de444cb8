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

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gpsreg {

using Shape = std::vector<std::size_t>;
using NodeId = std::size_t;

class Tape;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles, optionally attached to a Tape.
///
/// A Tensor without a tape is a constant: gradients never flow into it.
/// Tensors produced by ops on taped inputs carry a node id on that tape and
/// are only meaningful while the tape is alive.
class Tensor {
 public:
  /// Rank-0 scalar holding 0.
  Tensor() : data_(1, 0.0) {}
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);
  /// 1-D tensor.
  static Tensor vector(std::vector<double> values);
  /// 2-D tensor from nested rows; all rows must have equal length.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  /// Leading dimension of a 2-D tensor.
  std::size_t rows() const;
  /// Trailing dimension of a 2-D tensor.
  std::size_t cols() const;

  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  NodeId node() const { return node_; }

  /// Value copy with no tape attachment.
  Tensor detached() const;

  bool all_finite() const;

 private:
  friend class Tape;

  Shape shape_;
  std::vector<double> data_;
  Tape* tape_ = nullptr;
  NodeId node_ = 0;
};

}  // namespace gpsreg
