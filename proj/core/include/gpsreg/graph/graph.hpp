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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpsreg/autodiff/tensor.hpp"

namespace gpsreg {

/// Undirected edge stored with first < second.
using Edge = std::pair<std::size_t, std::size_t>;

/// One training instance: an undirected simple graph with node features.
struct Graph {
  std::size_t n = 0;
  /// n×d_in node features.
  Tensor x = Tensor::zeros({0, 0});
  /// Sorted, deduplicated, first < second, no self-loops.
  std::vector<Edge> edges;
  /// Optional n×3 positions used for KNN construction.
  std::optional<Tensor> coords;
  /// Graph-level target.
  std::vector<double> y;

  /// Structure-only graph with an n×0 feature matrix.
  static Graph with_edges(std::size_t n, const std::vector<Edge>& edges);

  std::size_t feature_width() const { return x.rank() == 2 ? x.cols() : 0; }

  /// Throws ValidationError describing the first violated invariant.
  void validate() const;
};

/// Orders each pair, sorts and removes duplicates. Throws ValidationError on
/// self-loops or endpoints outside [0, n).
std::vector<Edge> canonical_edges(std::size_t n, std::vector<Edge> edges);

/// Contiguous block of feature columns produced by one encoding.
struct ColumnRange {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t width() const { return end - begin; }
  bool operator==(const ColumnRange&) const = default;
};

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct Dataset {
  std::size_t d_in = 0;
  std::vector<Graph> graphs;
  Splits splits;
  /// Non-empty once the features carry appended encodings.
  std::vector<ColumnRange> encodings;

  /// Checks every graph plus split disjointness and coverage.
  void validate() const;
};

/// Dense symmetric 0/1 adjacency with zero diagonal.
Tensor adjacency_dense(const Graph& g);

/// D^{-1/2} (A + I) D^{-1/2}, with D the degree matrix of A + I.
Tensor gcn_norm_adjacency(const Graph& g);

/// D^{-1} A; rows of isolated nodes are zero.
Tensor random_walk_matrix(const Graph& g);

/// Local clustering coefficient per node, 0 for degree below 2. Shape [n].
Tensor clustering_coefficients(const Graph& g);

std::vector<std::vector<std::size_t>> adjacency_lists(const Graph& g);

/// Hop distances from `source`; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, std::size_t source);

bool is_connected(const Graph& g);

}  // namespace gpsreg
