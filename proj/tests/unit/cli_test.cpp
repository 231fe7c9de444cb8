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


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gpsreg/graph/dataset_io.hpp"
#include "test_support.hpp"

#ifndef GPSREG_CLI_PATH
#error "GPSREG_CLI_PATH must name the gpsreg executable"
#endif

namespace gpsreg {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gpsreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of `gpsreg <args>`; stdout goes to `out` when given.
  int run(const std::string& args, const std::string& out = "") const {
    std::string cmd = std::string(GPSREG_CLI_PATH) + " " + args;
    cmd += " >" + (out.empty() ? std::string("/dev/null") : out) + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

TEST_F(Cli, GenIsDeterministicAndLoads) {
  ASSERT_EQ(run("gen --kind er --graphs 10 --seed 5 --out " + path("a.json")), 0);
  ASSERT_EQ(run("gen --kind er --graphs 10 --seed 5 --out " + path("b.json")), 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(load_dataset(path("a.json")).graphs.size(), 10u);
}

TEST_F(Cli, GenReadsConfigAndFlagsOverride) {
  std::ofstream(path("gen.json")) << R"({"kind": "er", "num_graphs": 4, "graph_size": 9})";
  ASSERT_EQ(run("gen --config " + path("gen.json") + " --graphs 3 --out " + path("d.json")), 0);
  const Dataset ds = load_dataset(path("d.json"));
  EXPECT_EQ(ds.graphs.size(), 3u);
  EXPECT_EQ(ds.graphs[0].n, 9u);
}

TEST_F(Cli, DistanceTaskGraphsPassBfsCheck) {
  ASSERT_EQ(run("gen --kind distance_task --graphs 8 --size 16 --distance 5 --seed 2 --out " + path("d.json")), 0);
  for (const Graph& g : load_dataset(path("d.json")).graphs) {
    std::vector<std::size_t> marked;
    for (std::size_t i = 0; i < g.n; ++i)
      if (g.x.at(i, 0) == 1.0) marked.push_back(i);
    ASSERT_EQ(marked.size(), 2u);
    EXPECT_GE(testing::bfs(g, marked[0])[marked[1]], 5);
  }
}

TEST_F(Cli, EncodeReportsAndGuardsAgainstReencoding) {
  ASSERT_EQ(run("gen --kind knn --graphs 3 --size 12 --out " + path("d.json")), 0);
  ASSERT_EQ(run("encode --dataset " + path("d.json") + " --out " + path("plain.json"), path("r0.json")), 0);
  EXPECT_EQ(json::parse(slurp(path("r0.json")))["ratio"], 1.0);
  EXPECT_EQ(load_dataset(path("plain.json")).graphs[1].x.values(),
            load_dataset(path("d.json")).graphs[1].x.values());

  ASSERT_EQ(run("encode --dataset " + path("d.json") + " --pmt --out " + path("e.json"), path("r1.json")), 0);
  const json report = json::parse(slurp(path("r1.json")));
  EXPECT_EQ(report["ratio"], 5.4);
  EXPECT_EQ(report["reported_inflation_reproduced"], false);
  EXPECT_EQ(run("encode --dataset " + path("e.json") + " --pmt --out " + path("f.json")), 1);
}

TEST_F(Cli, TrainIsDeterministicAndWritesCheckpoint) {
  ASSERT_EQ(run("gen --kind er --graphs 6 --size 10 --out " + path("d.json")), 0);
  const std::string common = "train --dataset " + path("d.json") +
                             " --steps 20 --eval-every 10 --hidden 8 --layers 2 --reg l1 --lambda 0.1 --seed 3";
  ASSERT_EQ(run(common + " --metrics " + path("m1.jsonl") + " --out " + path("c.json")), 0);
  ASSERT_EQ(run(common + " --metrics " + path("m2.jsonl")), 0);
  EXPECT_EQ(slurp(path("m1.jsonl")), slurp(path("m2.jsonl")));
  std::istringstream lines(slurp(path("m1.jsonl")));
  int count = 0;
  for (std::string line; std::getline(lines, line); ++count) EXPECT_NO_THROW(json::parse(line));
  EXPECT_EQ(count, 2);

  ASSERT_EQ(run("inspect-attn --checkpoint " + path("c.json") + " --dataset " + path("d.json") +
                    " --index 1 --out " + path("i.json")),
            0);
  EXPECT_EQ(json::parse(slurp(path("i.json")))["layers"].size(), 2u);
  EXPECT_EQ(run("inspect-attn --checkpoint " + path("c.json") + " --dataset " + path("d.json") + " --index 6"), 1);
}

TEST_F(Cli, TrainConfigFileWithOverrides) {
  ASSERT_EQ(run("gen --kind er --graphs 4 --size 8 --out " + path("d.json")), 0);
  std::ofstream(path("run.json")) << R"({"dataset": ")" << path("d.json")
                                  << R"(", "steps": 5, "eval_every": 5, "hidden": 4, "num_layers": 1})";
  ASSERT_EQ(run("train --config " + path("run.json") + " --steps 10", path("m.jsonl")), 0);
  std::istringstream lines(slurp(path("m.jsonl")));
  std::string line, last;
  while (std::getline(lines, line)) last = line;
  EXPECT_EQ(json::parse(last)["step"], 10);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("gen --kind nope --out " + path("x.json")), 1);
  EXPECT_EQ(run("train --dataset " + path("missing.json")), 3);
  EXPECT_EQ(run("gen --kind er --out /nonexistent/dir/x.json"), 3);
  EXPECT_EQ(run("gradcheck bogus"), 1);
  EXPECT_EQ(run("frobnicate"), 1);

  ASSERT_EQ(run("gen --kind er --graphs 3 --size 8 --out " + path("d.json")), 0);
  json ds = json::parse(slurp(path("d.json")));
  for (auto& g : ds["graphs"]) g["y"] = {1e200};
  std::ofstream(path("big.json")) << ds.dump();
  EXPECT_EQ(run("train --dataset " + path("big.json") + " --steps 5"), 2);
}

TEST_F(Cli, GradcheckCutoffPasses) {
  EXPECT_EQ(run("gradcheck cutoff", path("g.json")), 0);
  EXPECT_EQ(json::parse(slurp(path("g.json")))["passed"], true);
}

}  // namespace
}  // namespace gpsreg
