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

#include "gpsreg/autodiff/tape.hpp"

#include <utility>

#include "gpsreg/error.hpp"

namespace gpsreg {

std::span<double> Gradients::accumulator(const InputRef& ref) {
  if (!ref.id) return {};
  auto& buf = buffers_[*ref.id];
  if (buf.empty()) buf.assign(sizes_[*ref.id], 0.0);
  return buf;
}

std::span<const double> Gradients::of(NodeId id) const {
  if (id >= buffers_.size()) return {};
  return buffers_[id];
}

bool Gradients::reached(NodeId id) const {
  return id < buffers_.size() && !buffers_[id].empty();
}

Tensor Tape::leaf(Tensor value, std::string name) {
  const NodeId id = nodes_.size();
  if (!name.empty()) {
    if (!named_leaves_.emplace(name, id).second) {
      throw ValidationError("duplicate leaf name on tape: " + name);
    }
  }
  nodes_.push_back(Node{value.size(), {}, nullptr});
  value.tape_ = this;
  value.node_ = id;
  return value;
}

Tensor Tape::record(Tensor value, std::vector<InputRef> inputs, BackwardFn fn) {
  const NodeId id = nodes_.size();
  for (const auto& in : inputs) {
    if (in.id && *in.id >= id) {
      throw Error("tape order violated: input node follows its consumer");
    }
  }
  nodes_.push_back(Node{value.size(), std::move(inputs), std::move(fn)});
  value.tape_ = this;
  value.node_ = id;
  return value;
}

InputRef Tape::ref(const Tensor& t) const {
  if (t.tape() == this) return InputRef{t.node()};
  return InputRef{};
}

Gradients Tape::backward(const Tensor& loss) const {
  if (loss.tape() != this) {
    throw PreconditionError("backward: loss is not recorded on this tape");
  }
  if (loss.size() != 1) {
    throw DimensionError("backward: loss must be scalar, got shape " +
                         shape_string(loss.shape()));
  }
  Gradients grads;
  grads.buffers_.resize(nodes_.size());
  grads.sizes_.reserve(nodes_.size());
  for (const auto& node : nodes_) grads.sizes_.push_back(node.numel);

  grads.buffers_[loss.node()].assign(1, 1.0);
  for (NodeId id = loss.node() + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (grads.buffers_[id].empty() || !node.backward) continue;
    // Copy: the backward function may allocate other buffers.
    const std::vector<double> grad_out = grads.buffers_[id];
    node.backward(grad_out, grads);
    ++grads.visited_;
  }
  return grads;
}

std::optional<NodeId> Tape::find_leaf(std::string_view name) const {
  auto it = named_leaves_.find(std::string(name));
  if (it == named_leaves_.end()) return std::nullopt;
  return it->second;
}

Tape* common_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (!t->tape()) continue;
    if (tape && tape != t->tape()) {
      throw Error("op inputs are recorded on different tapes");
    }
    tape = t->tape();
  }
  return tape;
}

}  // namespace gpsreg
