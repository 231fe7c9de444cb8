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

#include <vector>

#include "gpsreg/autodiff/tensor.hpp"
#include "gpsreg/rng.hpp"

// Differentiable primitives. Every op records itself on the tape of its
// tracked inputs; with only constant inputs it computes the value and
// records nothing.

namespace gpsreg {

// Linear algebra.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

// Elementwise, equal shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

/// x[n×d] + b[d] broadcast over rows.
Tensor add_row_broadcast(const Tensor& x, const Tensor& bias);

Tensor relu(const Tensor& x);
/// Logistic function; evaluated without overflow for large |x|.
Tensor sigmoid(const Tensor& x);
/// Row-wise softmax of a 2-D tensor with per-row max subtraction.
Tensor softmax_rows(const Tensor& x);

/// Inverted dropout. In training each entry survives with probability 1-p and
/// survivors are scaled by 1/(1-p); in eval mode the input passes through.
/// Throws DomainError unless 0 <= p < 1.
Tensor dropout(const Tensor& x, double p, bool train, Rng& rng);

/// Same value, no gradient to anything upstream.
Tensor stop_gradient(const Tensor& x);

// Reductions to a scalar.
Tensor sum(const Tensor& x);
/// Mean of |pred - target| over all entries; subgradient 0 at ties.
Tensor l1_mean(const Tensor& pred, const Tensor& target);
/// Mean binary cross-entropy from logits, in the fused stable form
/// max(z,0) - z*t + log(1 + exp(-|z|)). Targets must be exactly 0 or 1.
Tensor bce_mean(const Tensor& logits, const Tensor& target);
Tensor mse_mean(const Tensor& pred, const Tensor& target);

/// Column means of x[n×d], returned as 1×d.
Tensor mean_pool_rows(const Tensor& x);

struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;

  explicit BatchNormState(std::size_t width = 0)
      : running_mean(width, 0.0), running_var(width, 1.0) {}
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

/// Per-feature normalization over the node dimension of x[n×d].
///
/// Training uses batch statistics (biased variance) and updates the running
/// estimates with momentum 0.1, storing the unbiased variance. Eval mode
/// normalizes with the running estimates. Throws PreconditionError when
/// training on fewer than two rows.
Tensor batchnorm_nodes(const Tensor& x, const Tensor& gamma,
                       const Tensor& beta, BatchNormState& state, bool train);

}  // namespace gpsreg
