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

namespace gpsreg {

struct SymmetricEigen {
  /// Unsorted eigenvalues; values[i] pairs with column i of `vectors`.
  std::vector<double> values;
  /// n×n, orthonormal columns.
  Tensor vectors;
};

/// Cyclic Jacobi rotations on a dense symmetric matrix. Iterates until the
/// off-diagonal Frobenius norm is at most `tolerance`; throws NumericError if
/// that does not happen within `max_sweeps`.
SymmetricEigen jacobi_eigen(const Tensor& symmetric, double tolerance = 1e-12,
                            int max_sweeps = 100);

}  // namespace gpsreg
