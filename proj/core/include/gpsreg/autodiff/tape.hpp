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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gpsreg/autodiff/tensor.hpp"

namespace gpsreg {

/// Input of a recorded op. Untracked inputs (constants, or tensors cut by
/// stop_gradient) receive no gradient.
struct InputRef {
  std::optional<NodeId> id;
};

/// Gradient accumulators produced by one reverse sweep, indexed by node id.
class Gradients {
 public:
  /// Accumulator for `ref`, allocated as zeros on first use. Returns an empty
  /// span for untracked inputs so callers can skip the work.
  std::span<double> accumulator(const InputRef& ref);

  /// Gradient of node `id`; empty when the node was not reached.
  std::span<const double> of(NodeId id) const;
  bool reached(NodeId id) const;

  /// Number of nodes whose backward function ran.
  std::size_t visited() const { return visited_; }

 private:
  friend class Tape;

  std::vector<std::vector<double>> buffers_;
  std::vector<std::size_t> sizes_;
  std::size_t visited_ = 0;
};

/// Linear record of executed ops for one forward pass.
///
/// Node ids are assigned in execution order, so reverse id order is a valid
/// reverse topological order. Tensors refer to their tape by pointer; the tape
/// must outlive every tensor recorded on it and is therefore neither copyable
/// nor movable.
class Tape {
 public:
  using BackwardFn =
      std::function<void(std::span<const double> grad_out, Gradients& grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers a differentiable leaf. A non-empty name makes the leaf
  /// addressable by find_leaf; names must be unique per tape.
  Tensor leaf(Tensor value, std::string name = {});

  /// Records an op output. `fn` receives the output gradient and scatters
  /// into the accumulators of `inputs`.
  Tensor record(Tensor value, std::vector<InputRef> inputs, BackwardFn fn);

  /// Reference to `t` as an op input on this tape.
  InputRef ref(const Tensor& t) const;

  /// Reverse sweep seeded with d(loss)/d(loss) = 1. `loss` must be a
  /// single-element tensor on this tape.
  Gradients backward(const Tensor& loss) const;

  std::optional<NodeId> find_leaf(std::string_view name) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::size_t numel = 0;
    std::vector<InputRef> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> named_leaves_;
};

/// Tape shared by the tracked inputs, or nullptr when all are constants.
/// Throws if the inputs live on different tapes.
Tape* common_tape(std::initializer_list<const Tensor*> inputs);

}  // namespace gpsreg
