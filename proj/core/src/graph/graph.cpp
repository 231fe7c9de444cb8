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

#include "gpsreg/graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "gpsreg/error.hpp"

namespace gpsreg {

Graph Graph::with_edges(std::size_t n, const std::vector<Edge>& edges) {
  Graph g;
  g.n = n;
  g.x = Tensor::zeros({n, 0});
  g.edges = canonical_edges(n, edges);
  return g;
}

std::vector<Edge> canonical_edges(std::size_t n, std::vector<Edge> edges) {
  for (auto& [i, j] : edges) {
    if (i >= n || j >= n) {
      throw ValidationError("edge (" + std::to_string(i) + "," +
                            std::to_string(j) + ") outside node range [0," +
                            std::to_string(n) + ")");
    }
    if (i == j) {
      throw ValidationError("self-loop on node " + std::to_string(i));
    }
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

void Graph::validate() const {
  if (x.rank() != 2 || x.rows() != n) {
    throw ValidationError("x: expected " + std::to_string(n) +
                          " feature rows, got shape " + shape_string(x.shape()));
  }
  if (!x.all_finite()) throw ValidationError("x: non-finite feature value");
  if (canonical_edges(n, edges) != edges) {
    throw ValidationError("edges: not in canonical sorted, deduplicated form");
  }
  if (coords) {
    if (coords->rank() != 2 || coords->rows() != n || coords->cols() != 3) {
      throw ValidationError("coords: expected shape [" + std::to_string(n) +
                            "x3], got " + shape_string(coords->shape()));
    }
    if (!coords->all_finite()) throw ValidationError("coords: non-finite value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("y: non-finite target");
  }
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    try {
      graphs[i].validate();
    } catch (const ValidationError& e) {
      throw ValidationError("graphs[" + std::to_string(i) + "]." + e.what());
    }
    if (graphs[i].feature_width() != d_in) {
      throw ValidationError("graphs[" + std::to_string(i) + "].x: width " +
                            std::to_string(graphs[i].feature_width()) +
                            " differs from d_in " + std::to_string(d_in));
    }
  }
  std::vector<int> seen(graphs.size(), 0);
  auto mark = [&](const std::vector<std::size_t>& idx, const char* name) {
    for (std::size_t i : idx) {
      if (i >= graphs.size()) {
        throw ValidationError(std::string("splits.") + name + ": index " +
                              std::to_string(i) + " out of range");
      }
      if (seen[i]++) {
        throw ValidationError(std::string("splits.") + name + ": index " +
                              std::to_string(i) + " appears in more than one split");
      }
    }
  };
  mark(splits.train, "train");
  mark(splits.val, "val");
  mark(splits.test, "test");
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw ValidationError("splits: graph " + std::to_string(i) +
                            " is not assigned to any split");
    }
  }
  std::size_t cursor = d_in;
  for (auto it = encodings.rbegin(); it != encodings.rend(); ++it) {
    if (it->end != cursor || it->begin > it->end) {
      throw ValidationError("encoding." + it->name +
                            ": column ranges do not tile the feature tail");
    }
    cursor = it->begin;
  }
}

Tensor adjacency_dense(const Graph& g) {
  Tensor a = Tensor::zeros({g.n, g.n});
  for (const auto& [i, j] : g.edges) {
    a.at(i, j) = 1.0;
    a.at(j, i) = 1.0;
  }
  return a;
}

Tensor gcn_norm_adjacency(const Graph& g) {
  Tensor a = adjacency_dense(g);
  for (std::size_t i = 0; i < g.n; ++i) a.at(i, i) = 1.0;
  std::vector<double> inv_sqrt_deg(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) deg += a.at(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j)
      a.at(i, j) *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
  return a;
}

Tensor random_walk_matrix(const Graph& g) {
  Tensor a = adjacency_dense(g);
  for (std::size_t i = 0; i < g.n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) deg += a.at(i, j);
    if (deg == 0.0) continue;
    for (std::size_t j = 0; j < g.n; ++j) a.at(i, j) /= deg;
  }
  return a;
}

Tensor clustering_coefficients(const Graph& g) {
  const Tensor a = adjacency_dense(g);
  const auto adj = adjacency_lists(g);
  Tensor c = Tensor::zeros({g.n});
  for (std::size_t i = 0; i < g.n; ++i) {
    const auto& nb = adj[i];
    const std::size_t deg = nb.size();
    if (deg < 2) continue;
    std::size_t links = 0;
    for (std::size_t p = 0; p < deg; ++p)
      for (std::size_t q = p + 1; q < deg; ++q)
        if (a.at(nb[p], nb[q]) != 0.0) ++links;
    c[i] = 2.0 * static_cast<double>(links) /
           (static_cast<double>(deg) * static_cast<double>(deg - 1));
  }
  return c;
}

std::vector<std::vector<std::size_t>> adjacency_lists(const Graph& g) {
  std::vector<std::vector<std::size_t>> adj(g.n);
  for (const auto& [i, j] : g.edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

std::vector<int> bfs_distances(const Graph& g, std::size_t source) {
  const auto adj = adjacency_lists(g);
  std::vector<int> dist(g.n, -1);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : adj[u]) {
      if (dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

bool is_connected(const Graph& g) {
  if (g.n == 0) return true;
  const auto dist = bfs_distances(g, 0);
  return std::all_of(dist.begin(), dist.end(), [](int d) { return d >= 0; });
}

}  // namespace gpsreg
