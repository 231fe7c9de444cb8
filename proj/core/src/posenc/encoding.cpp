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

#include "gpsreg/posenc/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "gpsreg/error.hpp"
#include "gpsreg/posenc/jacobi.hpp"
#include "gpsreg/rng.hpp"

namespace gpsreg {
namespace {

// Eigenvalues closer than this are treated as one degenerate level.
constexpr double kEigenTie = 1e-9;
// Components below this magnitude do not decide the canonical sign.
constexpr double kSignThreshold = 1e-10;

void canonicalize_sign(std::vector<double>& v) {
  for (double c : v) {
    if (std::abs(c) <= kSignThreshold) continue;
    if (c < 0.0) {
      for (double& x : v) x = -x;
    }
    return;
  }
}

Tensor hcat(const Tensor& left, const Tensor& right) {
  const std::size_t n = left.rows(), a = left.cols(), b = right.cols();
  Tensor out = Tensor::zeros({n, a + b});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < a; ++j) out.at(i, j) = left.at(i, j);
    for (std::size_t j = 0; j < b; ++j) out.at(i, a + j) = right.at(i, j);
  }
  return out;
}

}  // namespace

Tensor normalized_laplacian(const Graph& g) {
  const Tensor a = adjacency_dense(g);
  std::vector<double> inv_sqrt(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) deg += a.at(i, j);
    if (deg > 0.0) inv_sqrt[i] = 1.0 / std::sqrt(deg);
  }
  Tensor l = Tensor::identity(g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j)
      l.at(i, j) -= inv_sqrt[i] * a.at(i, j) * inv_sqrt[j];
  return l;
}

LaplacianEigenmap lap_eigenmap(const Graph& g, std::size_t k) {
  if (k == 0 || g.n < 2 || k > g.n - 1) {
    throw PreconditionError("lap_pe: k=" + std::to_string(k) +
                            " outside [1, n-1] for n=" + std::to_string(g.n));
  }
  if (!is_connected(g)) {
    throw PreconditionError("lap_pe: graph is disconnected");
  }
  const SymmetricEigen eig = jacobi_eigen(normalized_laplacian(g));

  struct Pair {
    double value;
    std::vector<double> vec;
  };
  std::vector<Pair> pairs;
  pairs.reserve(g.n);
  for (std::size_t c = 0; c < g.n; ++c) {
    Pair p{eig.values[c], std::vector<double>(g.n)};
    for (std::size_t r = 0; r < g.n; ++r) p.vec[r] = eig.vectors.at(r, c);
    canonicalize_sign(p.vec);
    pairs.push_back(std::move(p));
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (std::abs(a.value - b.value) > kEigenTie) return a.value < b.value;
    return a.vec < b.vec;
  });

  LaplacianEigenmap out;
  out.vectors = Tensor::zeros({g.n, k});
  // pairs[0] is the trivial eigenvector.
  for (std::size_t c = 0; c < k; ++c) {
    const Pair& p = pairs[c + 1];
    out.eigenvalues.push_back(p.value);
    for (std::size_t r = 0; r < g.n; ++r) out.vectors.at(r, c) = p.vec[r];
  }
  return out;
}

Tensor lap_pe(const Graph& g, std::size_t k) { return lap_eigenmap(g, k).vectors; }

Tensor sign_flip_augment(const Tensor& pe, std::uint64_t seed) {
  Rng rng(seed);
  Tensor out = pe.detached();
  const std::size_t n = pe.rows(), k = pe.cols();
  for (std::size_t c = 0; c < k; ++c) {
    if (!rng.bernoulli(0.5)) continue;
    for (std::size_t r = 0; r < n; ++r) out.at(r, c) = -out.at(r, c);
  }
  return out;
}

Tensor rwse(const Graph& g, std::size_t k) {
  const std::size_t n = g.n;
  const Tensor rw = random_walk_matrix(g);
  Tensor power = rw.detached();
  Tensor out = Tensor::zeros({n, k});
  std::vector<double> next(n * n);
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t i = 0; i < n; ++i) out.at(i, t) = power.at(i, i);
    if (t + 1 == k) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m) {
        const double pim = power.at(i, m);
        if (pim == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) next[i * n + j] += pim * rw.at(m, j);
      }
    std::copy(next.begin(), next.end(), power.mutable_data().begin());
  }
  return out;
}

void EncodingConfig::validate() const {
  if (use_lap_pe && k_lap == 0) throw ValidationError("encoding.k_lap: must be >= 1");
  if (use_rwse && k_rw == 0) throw ValidationError("encoding.k_rw: must be >= 1");
}

std::vector<std::pair<std::string, std::size_t>> EncodingConfig::columns() const {
  std::vector<std::pair<std::string, std::size_t>> cols;
  if (use_constant) cols.emplace_back("constant", 1);
  if (use_clustering) cols.emplace_back("clustering", 1);
  if (use_lap_pe) cols.emplace_back("lap_pe", k_lap);
  if (use_rwse) cols.emplace_back("rwse", k_rw);
  return cols;
}

std::size_t EncodingConfig::width() const {
  std::size_t w = 0;
  for (const auto& [name, cols] : columns()) w += cols;
  return w;
}

Tensor EncodedGraph::columns(const std::string& name) const {
  for (const auto& r : provenance) {
    if (r.name != name) continue;
    Tensor out = Tensor::zeros({graph.n, r.width()});
    for (std::size_t i = 0; i < graph.n; ++i)
      for (std::size_t j = 0; j < r.width(); ++j)
        out.at(i, j) = graph.x.at(i, r.begin + j);
    return out;
  }
  throw Error("no encoding named " + name);
}

EncodedGraph encode(const Graph& g, const EncodingConfig& cfg, bool train,
                    std::uint64_t seed) {
  cfg.validate();
  EncodedGraph out{g, {}};
  std::size_t cursor = g.feature_width();
  auto append = [&](const std::string& name, const Tensor& block) {
    out.graph.x = hcat(out.graph.x, block);
    out.provenance.push_back(ColumnRange{name, cursor, cursor + block.cols()});
    cursor += block.cols();
  };
  if (cfg.use_constant) append("constant", Tensor::filled({g.n, 1}, 1.0));
  if (cfg.use_clustering) {
    const Tensor c = clustering_coefficients(g);
    append("clustering", Tensor({g.n, 1}, c.values()));
  }
  if (cfg.use_lap_pe) {
    Tensor pe = lap_pe(g, cfg.k_lap);
    if (train && cfg.sign_flip_in_training) pe = sign_flip_augment(pe, seed);
    append("lap_pe", pe);
  }
  if (cfg.use_rwse) append("rwse", rwse(g, cfg.k_rw));
  return out;
}

Dataset encode_dataset(const Dataset& ds, const EncodingConfig& cfg) {
  if (!ds.encodings.empty()) {
    throw PreconditionError("dataset already carries encodings; refusing to encode twice");
  }
  cfg.validate();
  if (cfg.use_lap_pe) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < ds.graphs.size(); ++i)
      if (!is_connected(ds.graphs[i])) bad.push_back(i);
    if (!bad.empty()) {
      std::ostringstream msg;
      msg << "lap_pe requires connected graphs; disconnected graph indices:";
      for (std::size_t i : bad) msg << ' ' << i;
      throw PreconditionError(msg.str());
    }
  }
  Dataset out;
  out.splits = ds.splits;
  out.d_in = ds.d_in + cfg.width();
  out.graphs.reserve(ds.graphs.size());
  for (const auto& g : ds.graphs) {
    EncodedGraph eg = encode(g, cfg, /*train=*/false, 0);
    if (out.encodings.empty()) out.encodings = eg.provenance;
    out.graphs.push_back(std::move(eg.graph));
  }
  if (ds.graphs.empty()) {
    std::size_t cursor = ds.d_in;
    for (const auto& [name, w] : cfg.columns()) {
      out.encodings.push_back(ColumnRange{name, cursor, cursor + w});
      cursor += w;
    }
  }
  return out;
}

Tensor flip_lap_columns(const Tensor& x, const std::vector<ColumnRange>& provenance,
                        std::uint64_t seed) {
  Tensor out = x.detached();
  for (const auto& r : provenance) {
    if (r.name != "lap_pe") continue;
    Rng rng(seed);
    for (std::size_t c = r.begin; c < r.end; ++c) {
      if (!rng.bernoulli(0.5)) continue;
      for (std::size_t i = 0; i < x.rows(); ++i) out.at(i, c) = -out.at(i, c);
    }
  }
  return out;
}

bool MemoryReport::reported_inflation_reproduced() const {
  return std::abs(ratio - kReportedInflation) <= 1e-9 * kReportedInflation;
}

std::string MemoryReport::to_json() const {
  nlohmann::json out;
  out["scalars_before"] = scalars_before;
  out["scalars_after"] = scalars_after;
  out["ratio"] = ratio;
  nlohmann::json cols = nlohmann::json::object();
  for (const auto& [name, w] : per_encoding_columns) cols[name] = w;
  out["per_encoding_columns"] = std::move(cols);
  out["reported_inflation"] = kReportedInflation;
  out["reported_inflation_reproduced"] = reported_inflation_reproduced();
  return out.dump();
}

std::string MemoryReport::to_table() const {
  std::ostringstream os;
  os << "encoding            columns\n";
  for (const auto& [name, w] : per_encoding_columns) {
    os << std::left << std::setw(20) << name << w << '\n';
  }
  os << "scalars before      " << scalars_before << '\n'
     << "scalars after       " << scalars_after << '\n'
     << "inflation ratio     " << std::setprecision(6) << ratio << '\n';
  if (!reported_inflation_reproduced()) {
    os << "note: column arithmetic gives " << ratio << "x, not the "
       << kReportedInflation << "x inflation reported for this preprocessing\n";
  }
  return os.str();
}

MemoryReport memory_report(const Dataset& ds, const EncodingConfig& cfg) {
  cfg.validate();
  std::size_t existing = 0;
  for (const auto& r : ds.encodings) existing += r.width();
  const std::size_t base = ds.d_in - existing;

  MemoryReport report;
  report.per_encoding_columns = cfg.columns();
  for (const auto& g : ds.graphs) {
    report.scalars_before += g.n * base;
    report.scalars_after += g.n * (base + cfg.width());
  }
  if (report.scalars_before == 0) {
    report.ratio = report.scalars_after == 0 ? 1.0 : INFINITY;
  } else {
    report.ratio = static_cast<double>(report.scalars_after) /
                   static_cast<double>(report.scalars_before);
  }
  return report;
}

}  // namespace gpsreg
