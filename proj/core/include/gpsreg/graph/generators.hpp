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
#include <string>
#include <vector>

#include "gpsreg/graph/graph.hpp"

namespace gpsreg {

/// G(n, p) Erdos-Renyi graph.
Graph er_graph(std::size_t n, double p, std::uint64_t seed);
Graph path_graph(std::size_t n);
Graph cycle_graph(std::size_t n);

/// Long-range regression instance.
///
/// A random sparse connected graph with two marked nodes at hop distance at
/// least `min_distance`. Features are [marker, value] per node, with value
/// uniform in [-1, 1]; the target is the product of the two marked values,
/// so no model can solve it without moving information between the pair.
struct DistanceTask {
  Graph graph;
  std::size_t source = 0;
  std::size_t target = 0;
};

/// Throws DomainError when min_distance > n - 1 or is zero.
DistanceTask distance_task(std::size_t n, std::size_t min_distance,
                           std::uint64_t seed);

/// Symmetrized k-nearest-neighbour edges over n×3 coordinates. Distance ties
/// go to the lower node index. Throws PreconditionError when k >= n.
std::vector<Edge> knn_graph(const Tensor& coords, std::size_t k);

struct DatasetSpec {
  /// "er", "distance_task" or "knn".
  std::string kind = "er";
  std::size_t num_graphs = 10;
  std::size_t graph_size = 16;
  std::uint64_t seed = 0;
  /// Edge probability for "er".
  double edge_prob = 0.3;
  /// Minimum marked-pair distance for "distance_task".
  std::size_t min_distance = 5;
  /// Neighbour count for "knn".
  std::size_t knn_k = 8;
  /// Node features for "er": "random" (3 uniform + 2 normal columns) or
  /// "onehot" (n identity columns).
  std::string node_features = "random";
  double train_fraction = 0.6;
  double val_fraction = 0.2;
};

/// Builds a full dataset with features, targets and splits. Throws
/// ValidationError on an unknown kind.
Dataset generate_dataset(const DatasetSpec& spec);

}  // namespace gpsreg
