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

#include "gpsreg/graph/dataset_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <utility>

#include "gpsreg/error.hpp"

namespace gpsreg {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(path + (path.empty() ? "" : ".") + key + ": missing");
  }
  return *it;
}

template <typename T>
T get_as(const json& value, const std::string& path) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path + ": wrong type (" + value.type_name() + ")");
  }
}

json matrix_to_json(const Tensor& t) {
  json rows = json::array();
  for (std::size_t i = 0; i < t.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < t.cols(); ++j) row.push_back(t.at(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Tensor matrix_from_json(const json& rows, std::size_t expect_rows,
                        std::size_t expect_cols, const std::string& path) {
  if (!rows.is_array()) throw ValidationError(path + ": expected an array of rows");
  if (rows.size() != expect_rows) {
    throw ValidationError(path + ": expected " + std::to_string(expect_rows) +
                          " rows, got " + std::to_string(rows.size()));
  }
  std::vector<double> data;
  data.reserve(expect_rows * expect_cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    auto row = get_as<std::vector<double>>(rows[i], row_path);
    if (row.size() != expect_cols) {
      throw ValidationError(row_path + ": expected " + std::to_string(expect_cols) +
                            " values, got " + std::to_string(row.size()));
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({expect_rows, expect_cols}, std::move(data));
}

json graph_to_json(const Graph& g) {
  json out;
  out["n"] = g.n;
  json edges = json::array();
  for (const auto& [i, j] : g.edges) edges.push_back({i, j});
  out["edges"] = std::move(edges);
  out["x"] = matrix_to_json(g.x);
  if (g.coords) out["coords"] = matrix_to_json(*g.coords);
  out["y"] = g.y;
  return out;
}

Graph graph_from_json(const json& obj, std::size_t d_in, const std::string& path) {
  Graph g;
  g.n = get_as<std::size_t>(require(obj, "n", path), path + ".n");

  const json& edges = require(obj, "edges", path);
  if (!edges.is_array()) throw ValidationError(path + ".edges: expected an array");
  std::vector<Edge> raw;
  raw.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string epath = path + ".edges[" + std::to_string(e) + "]";
    auto pair = get_as<std::vector<std::size_t>>(edges[e], epath);
    if (pair.size() != 2) throw ValidationError(epath + ": expected [i, j]");
    raw.emplace_back(pair[0], pair[1]);
  }
  try {
    g.edges = canonical_edges(g.n, std::move(raw));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ".edges: " + e.what());
  }

  g.x = matrix_from_json(require(obj, "x", path), g.n, d_in, path + ".x");
  if (auto it = obj.find("coords"); it != obj.end() && !it->is_null()) {
    g.coords = matrix_from_json(*it, g.n, 3, path + ".coords");
  }
  g.y = get_as<std::vector<double>>(require(obj, "y", path), path + ".y");
  return g;
}

}  // namespace

std::string dataset_to_json(const Dataset& ds) {
  json out;
  out["d_in"] = ds.d_in;
  json graphs = json::array();
  for (const auto& g : ds.graphs) graphs.push_back(graph_to_json(g));
  out["graphs"] = std::move(graphs);
  out["splits"] = {{"train", ds.splits.train},
                   {"val", ds.splits.val},
                   {"test", ds.splits.test}};
  if (!ds.encodings.empty()) {
    json enc = json::array();
    for (const auto& r : ds.encodings) {
      enc.push_back({{"name", r.name}, {"begin", r.begin}, {"end", r.end}});
    }
    out["encodings"] = std::move(enc);
  }
  return out.dump();
}

Dataset dataset_from_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }

  Dataset ds;
  ds.d_in = get_as<std::size_t>(require(root, "d_in", ""), "d_in");
  const json& graphs = require(root, "graphs", "");
  if (!graphs.is_array()) throw ValidationError("graphs: expected an array");
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    ds.graphs.push_back(
        graph_from_json(graphs[i], ds.d_in, "graphs[" + std::to_string(i) + "]"));
  }

  const json& splits = require(root, "splits", "");
  ds.splits.train = get_as<std::vector<std::size_t>>(
      require(splits, "train", "splits"), "splits.train");
  ds.splits.val =
      get_as<std::vector<std::size_t>>(require(splits, "val", "splits"), "splits.val");
  ds.splits.test = get_as<std::vector<std::size_t>>(
      require(splits, "test", "splits"), "splits.test");

  if (auto it = root.find("encodings"); it != root.end()) {
    if (!it->is_array()) throw ValidationError("encodings: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "encodings[" + std::to_string(i) + "]";
      const json& r = (*it)[i];
      ds.encodings.push_back(ColumnRange{
          get_as<std::string>(require(r, "name", path), path + ".name"),
          get_as<std::size_t>(require(r, "begin", path), path + ".begin"),
          get_as<std::size_t>(require(r, "end", path), path + ".end")});
    }
  }

  ds.validate();
  return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << dataset_to_json(ds) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_json(buf.str());
}

}  // namespace gpsreg
