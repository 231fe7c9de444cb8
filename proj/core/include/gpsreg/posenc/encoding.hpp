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
#include <utility>
#include <vector>

#include "gpsreg/autodiff/tensor.hpp"
#include "gpsreg/graph/graph.hpp"

namespace gpsreg {

/// I - D^{-1/2} A D^{-1/2}. Isolated nodes get a zero row and column.
Tensor normalized_laplacian(const Graph& g);

struct LaplacianEigenmap {
  /// Ascending, all strictly positive.
  std::vector<double> eigenvalues;
  /// n×k unit-norm eigenvectors in canonical sign.
  Tensor vectors;
};

/// The k eigenpairs of the normalized Laplacian with the smallest nonzero
/// eigenvalues. The trivial eigenvector is dropped. Each vector is signed so
/// its first nonzero component is positive; eigenvalue ties are ordered by
/// lexicographic comparison of the signed vectors.
///
/// Throws PreconditionError for a disconnected graph or k outside [1, n-1].
LaplacianEigenmap lap_eigenmap(const Graph& g, std::size_t k);

/// Eigenvector columns of lap_eigenmap, n×k.
Tensor lap_pe(const Graph& g, std::size_t k);

/// Multiplies each column by an independent random sign.
Tensor sign_flip_augment(const Tensor& pe, std::uint64_t seed);

/// Column t-1 holds diag(RW^t), the t-step return probabilities, for
/// t = 1..k. Shape n×k.
Tensor rwse(const Graph& g, std::size_t k);

struct EncodingConfig {
  bool use_constant = false;
  bool use_clustering = false;
  bool use_lap_pe = false;
  std::size_t k_lap = 4;
  bool use_rwse = false;
  std::size_t k_rw = 16;
  bool sign_flip_in_training = true;

  /// Throws ValidationError for a zero width on an enabled encoding.
  void validate() const;
  bool any() const { return use_constant || use_clustering || use_lap_pe || use_rwse; }
  /// (name, width) of each enabled encoding in column order.
  std::vector<std::pair<std::string, std::size_t>> columns() const;
  std::size_t width() const;
};

struct EncodedGraph {
  Graph graph;
  /// Ranges of the appended columns, tiling [d_in, d_in + cfg.width()).
  std::vector<ColumnRange> provenance;

  /// Copy of the columns one encoding contributed.
  Tensor columns(const std::string& name) const;
};

/// Appends the enabled encodings in the fixed order constant, clustering,
/// lap_pe, rwse. Random sign flips are applied to the lap_pe block only when
/// `train` and cfg.sign_flip_in_training are both set.
EncodedGraph encode(const Graph& g, const EncodingConfig& cfg, bool train,
                    std::uint64_t seed);

/// Encodes every graph (eval mode, canonical signs) and records provenance
/// on the dataset. Throws PreconditionError for an already encoded dataset,
/// and for disconnected graphs under lap_pe with every offending index listed.
Dataset encode_dataset(const Dataset& ds, const EncodingConfig& cfg);

/// Copy of an encoded feature matrix with random signs on the lap_pe columns.
Tensor flip_lap_columns(const Tensor& x, const std::vector<ColumnRange>& provenance,
                        std::uint64_t seed);

/// Inflation factor the application study reports for its preprocessing.
inline constexpr double kReportedInflation = 10.0;

struct MemoryReport {
  std::size_t scalars_before = 0;
  std::size_t scalars_after = 0;
  double ratio = 1.0;
  std::vector<std::pair<std::string, std::size_t>> per_encoding_columns;

  /// Whether `ratio` reproduces kReportedInflation.
  bool reported_inflation_reproduced() const;

  std::string to_json() const;
  std::string to_table() const;
};

/// Feature scalar counts before and after encoding with `cfg`. Counts only;
/// no encoding is computed.
MemoryReport memory_report(const Dataset& ds, const EncodingConfig& cfg);

}  // namespace gpsreg
