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

#include "gpsreg/autodiff/param_set.hpp"

#include <cmath>
#include <utility>

#include "gpsreg/error.hpp"

namespace gpsreg {

const Tensor& BoundParams::operator[](const std::string& name) const {
  auto it = leaves_.find(name);
  if (it == leaves_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

void ParamSet::add(std::string name, Tensor value) {
  if (index_.count(name)) throw ValidationError("duplicate parameter: " + name);
  index_.emplace(name, entries_.size());
  const std::size_t n = value.size();
  entries_.push_back(Entry{std::move(name), value.detached(),
                           std::vector<double>(n, 0.0),
                           std::vector<double>(n, 0.0)});
}

const Tensor& ParamSet::value(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter: " + name);
  return entries_[it->second].value;
}

Tensor& ParamSet::mutable_value(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter: " + name);
  return entries_[it->second].value;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t total = 0;
  for (const auto& e : entries_) total += e.value.size();
  return total;
}

BoundParams ParamSet::bind(Tape& tape) const {
  BoundParams bound;
  for (const auto& e : entries_) bound.leaves_.emplace(e.name, tape.leaf(e.value, e.name));
  return bound;
}

GradientMap backward(const Tensor& loss, const ParamSet& params) {
  if (loss.size() != 1) {
    throw DimensionError("backward: loss must be scalar, got shape " +
                         shape_string(loss.shape()));
  }
  Tape* tape = loss.tape();
  if (!tape) throw PreconditionError("backward: loss is not recorded on a tape");

  const Gradients grads = tape->backward(loss);
  GradientMap out;
  for (const auto& e : params.entries()) {
    Tensor g = Tensor::zeros(e.value.shape());
    if (auto id = tape->find_leaf(e.name); id && grads.reached(*id)) {
      const auto src = grads.of(*id);
      std::copy(src.begin(), src.end(), g.mutable_data().begin());
    }
    out.emplace(e.name, std::move(g));
  }
  return out;
}

void adam_step(ParamSet& params, const GradientMap& grads,
               const AdamConfig& config) {
  for (const auto& e : params.entries()) {
    auto it = grads.find(e.name);
    if (it == grads.end()) {
      throw ValidationError("adam_step: missing gradient for " + e.name);
    }
    if (it->second.shape() != e.value.shape()) {
      throw DimensionError("adam_step: gradient shape mismatch for " + e.name);
    }
  }
  params.set_step(params.step() + 1);
  const double t = static_cast<double>(params.step());
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (auto& e : params.mutable_entries()) {
    const auto g = grads.at(e.name).data();
    auto w = e.value.mutable_data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      e.first_moment[i] = config.beta1 * e.first_moment[i] + (1.0 - config.beta1) * g[i];
      e.second_moment[i] =
          config.beta2 * e.second_moment[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = e.first_moment[i] / c1;
      const double v_hat = e.second_moment[i] / c2;
      w[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

}  // namespace gpsreg
