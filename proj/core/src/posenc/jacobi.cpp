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

#include "gpsreg/posenc/jacobi.hpp"

#include <cmath>
#include <string>

#include "gpsreg/error.hpp"

namespace gpsreg {
namespace {

double off_diagonal_norm(const Tensor& a) {
  const std::size_t n = a.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) total += a.at(i, j) * a.at(i, j);
  return std::sqrt(total);
}

}  // namespace

SymmetricEigen jacobi_eigen(const Tensor& symmetric, double tolerance,
                            int max_sweeps) {
  if (symmetric.rank() != 2 || symmetric.rows() != symmetric.cols()) {
    throw DimensionError("jacobi_eigen: expected a square matrix, got " +
                         shape_string(symmetric.shape()));
  }
  const std::size_t n = symmetric.rows();
  Tensor a = symmetric.detached();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a.at(i, j) - a.at(j, i)) > 1e-12) {
        throw DomainError("jacobi_eigen: matrix is not symmetric");
      }
  Tensor v = Tensor::identity(n);

  int sweep = 0;
  while (off_diagonal_norm(a) > tolerance) {
    if (sweep++ >= max_sweeps) {
      throw NumericError("jacobi_eigen: no convergence after " +
                         std::to_string(max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p,q); the smaller root of
        // t^2 + 2*theta*t - 1 = 0 keeps the rotation below 45 degrees.
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a.at(i, i);
  out.vectors = std::move(v);
  return out;
}

}  // namespace gpsreg
