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


#include "test_support.hpp"

#include "gpsreg/autodiff/ops.hpp"

namespace gpsreg::testing {

Tensor weighted_sum(const Tensor& x, const Tensor& r) {
  return sum(mul(x, Tensor(x.shape(), r.values())));
}

}  // namespace gpsreg::testing
