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

#include "gpsreg/graph/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gpsreg/error.hpp"
#include "gpsreg/rng.hpp"

namespace gpsreg {
namespace {

constexpr int kMaxDistanceAttempts = 1000;

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  return perm;
}

Splits make_splits(std::size_t count, double train_fraction, double val_fraction) {
  auto n_train = static_cast<std::size_t>(std::llround(count * train_fraction));
  auto n_val = static_cast<std::size_t>(std::llround(count * val_fraction));
  n_train = std::min(n_train, count);
  n_val = std::min(n_val, count - n_train);
  Splits s;
  for (std::size_t i = 0; i < count; ++i) {
    if (i < n_train) {
      s.train.push_back(i);
    } else if (i < n_train + n_val) {
      s.val.push_back(i);
    } else {
      s.test.push_back(i);
    }
  }
  return s;
}

// Sensor-style cloud: features are position, arrival time and deposited
// energy relative to a hidden event location, which is the target.
Graph knn_instance(std::size_t n, std::size_t k, Rng& rng) {
  Tensor coords = Tensor::zeros({n, 3});
  for (double& v : coords.mutable_data()) v = rng.uniform();
  const double ex = rng.uniform(0.25, 0.75), ey = rng.uniform(0.25, 0.75),
               ez = rng.uniform(0.25, 0.75);
  Tensor x = Tensor::zeros({n, 5});
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = coords.at(i, 0) - ex, dy = coords.at(i, 1) - ey,
                 dz = coords.at(i, 2) - ez;
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    for (std::size_t c = 0; c < 3; ++c) x.at(i, c) = coords.at(i, c);
    x.at(i, 3) = r + 0.01 * rng.normal();
    x.at(i, 4) = std::exp(-2.0 * r) * (1.0 + 0.05 * rng.normal());
  }
  Graph g;
  g.n = n;
  g.edges = canonical_edges(n, knn_graph(coords, std::min(k, n - 1)));
  g.x = std::move(x);
  g.coords = std::move(coords);
  g.y = {ex, ey, ez};
  return g;
}

Graph er_instance(std::size_t n, double p, bool onehot, Rng& rng) {
  Graph g = er_graph(n, p, rng.next_u64());
  if (onehot) {
    g.x = Tensor::identity(n);
  } else {
    Tensor x = Tensor::zeros({n, 5});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 3; ++c) x.at(i, c) = rng.uniform();
      x.at(i, 3) = rng.normal();
      x.at(i, 4) = rng.normal();
    }
    g.x = std::move(x);
  }
  const double pairs = n > 1 ? 0.5 * static_cast<double>(n * (n - 1)) : 1.0;
  g.y = {static_cast<double>(g.edges.size()) / pairs};
  return g;
}

}  // namespace

Graph er_graph(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("er_graph: p must lie in [0, 1], got " + std::to_string(p));
  }
  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.emplace_back(i, j);
  return Graph::with_edges(n, edges);
}

Graph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::with_edges(n, edges);
}

Graph cycle_graph(std::size_t n) {
  if (n < 3) throw DomainError("cycle_graph: need at least 3 nodes");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph::with_edges(n, edges);
}

DistanceTask distance_task(std::size_t n, std::size_t min_distance,
                           std::uint64_t seed) {
  if (min_distance == 0 || n == 0 || min_distance > n - 1) {
    throw DomainError("distance_task: distance " + std::to_string(min_distance) +
                      " unsatisfiable on " + std::to_string(n) + " nodes");
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < kMaxDistanceAttempts; ++attempt) {
    // Caterpillar-like tree: each node hangs off one of its three
    // predecessors, which keeps the diameter long. A few chords follow.
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < n; ++i) {
      const std::size_t back = 1 + rng.below(std::min<std::size_t>(i, 3));
      edges.emplace_back(i - back, i);
    }
    const std::size_t chords = n / 8;
    for (std::size_t c = 0; c < chords; ++c) {
      const std::size_t i = rng.below(n), j = rng.below(n);
      if (i != j) edges.emplace_back(i, j);
    }
    const auto perm = random_permutation(n, rng);
    for (auto& [i, j] : edges) {
      i = perm[i];
      j = perm[j];
    }
    Graph g = Graph::with_edges(n, edges);

    std::vector<Edge> far_pairs;
    for (std::size_t u = 0; u < n; ++u) {
      const auto dist = bfs_distances(g, u);
      for (std::size_t v = u + 1; v < n; ++v)
        if (dist[v] >= static_cast<int>(min_distance)) far_pairs.emplace_back(u, v);
    }
    if (far_pairs.empty()) continue;

    const auto [source, target] = far_pairs[rng.below(far_pairs.size())];
    Tensor x = Tensor::zeros({n, 2});
    for (std::size_t i = 0; i < n; ++i) x.at(i, 1) = rng.uniform(-1.0, 1.0);
    x.at(source, 0) = 1.0;
    x.at(target, 0) = 1.0;
    g.y = {x.at(source, 1) * x.at(target, 1)};
    g.x = std::move(x);
    return DistanceTask{std::move(g), source, target};
  }
  throw DomainError("distance_task: no pair at distance " +
                    std::to_string(min_distance) + " after " +
                    std::to_string(kMaxDistanceAttempts) + " attempts");
}

std::vector<Edge> knn_graph(const Tensor& coords, std::size_t k) {
  if (coords.rank() != 2 || coords.cols() != 3) {
    throw DimensionError("knn_graph: coords must be n×3, got " +
                         shape_string(coords.shape()));
  }
  const std::size_t n = coords.rows();
  if (k >= n) {
    throw PreconditionError("knn_graph: k=" + std::to_string(k) +
                            " must be below n=" + std::to_string(n));
  }
  if (!coords.all_finite()) throw DomainError("knn_graph: non-finite coordinate");

  std::vector<Edge> edges;
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double diff = coords.at(i, c) - coords.at(j, c);
        d2 += diff * diff;
      }
      cand.emplace_back(d2, j);
    }
    // Pair ordering breaks distance ties by index.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k),
                      cand.end());
    for (std::size_t r = 0; r < k; ++r) edges.emplace_back(i, cand[r].second);
  }
  return canonical_edges(n, std::move(edges));
}

Dataset generate_dataset(const DatasetSpec& spec) {
  if (spec.kind != "er" && spec.kind != "distance_task" && spec.kind != "knn") {
    throw ValidationError("kind: unknown dataset kind '" + spec.kind +
                          "' (expected er, distance_task or knn)");
  }
  if (spec.node_features != "random" && spec.node_features != "onehot") {
    throw ValidationError("node_features: expected random or onehot, got '" +
                          spec.node_features + "'");
  }
  Rng rng(spec.seed);
  Dataset ds;
  ds.graphs.reserve(spec.num_graphs);
  for (std::size_t i = 0; i < spec.num_graphs; ++i) {
    if (spec.kind == "er") {
      ds.graphs.push_back(er_instance(spec.graph_size, spec.edge_prob, spec.node_features == "onehot", rng));
    } else if (spec.kind == "distance_task") {
      ds.graphs.push_back(
          distance_task(spec.graph_size, spec.min_distance, rng.next_u64()).graph);
    } else {
      ds.graphs.push_back(knn_instance(spec.graph_size, spec.knn_k, rng));
    }
  }
  ds.d_in = ds.graphs.empty() ? 0 : ds.graphs.front().feature_width();
  ds.splits = make_splits(ds.graphs.size(), spec.train_fraction, spec.val_fraction);
  return ds;
}

}  // namespace gpsreg
