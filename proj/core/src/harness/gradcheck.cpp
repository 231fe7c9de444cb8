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

#include "gpsreg/harness/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gpsreg/autodiff/ops.hpp"
#include "gpsreg/autodiff/tape.hpp"
#include "gpsreg/edgereg/edge_reg.hpp"
#include "gpsreg/error.hpp"
#include "gpsreg/graph/generators.hpp"
#include "gpsreg/model/gps_model.hpp"
#include "gpsreg/rng.hpp"

namespace gpsreg {
namespace {

constexpr double kStep = 1e-5;

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_data()) v = rng.normal();
  return t;
}

// Entries bounded away from zero, for ops with a kink there.
Tensor away_from_zero(Shape shape, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_data()) {
    const double mag = rng.uniform(0.05, 2.0);
    v = rng.bernoulli(0.5) ? mag : -mag;
  }
  return t;
}

std::size_t dim(Rng& rng, std::size_t lo = 1, std::size_t hi = 6) {
  return lo + rng.below(hi - lo + 1);
}

// Weighted sum so that no output direction cancels by symmetry.
Tensor weighted(const Tensor& out, const Tensor& weights) {
  return sum(mul(out, weights));
}

void record_worst(std::map<std::string, double>& worst, const std::string& name,
                  double err) {
  auto [it, inserted] = worst.emplace(name, err);
  if (!inserted) it->second = std::max(it->second, err);
}

Graph connected_toy_graph(std::size_t n, std::size_t d_in, std::size_t d_out,
                          Rng& rng) {
  Graph g;
  do {
    g = er_graph(n, 0.5, rng.next_u64());
  } while (!is_connected(g));
  g.x = random_tensor({n, d_in}, rng);
  for (std::size_t j = 0; j < d_out; ++j) g.y.push_back(rng.normal());
  return g;
}

struct LossParts {
  Tensor main;
  Tensor reg;
  Tensor total;
};

// `frozen_inputs` replaces the per-layer attention inputs seen by the
// regularizer. Under the cutoff those inputs sit behind a barrier, so holding
// them fixed gives the function whose true gradient the cutoff computes.
LossParts model_loss(GpsModel& model, const Graph& g, const BoundParams& bound,
                     std::uint64_t dropout_seed, double main_weight,
                     const std::vector<Tensor>* frozen_inputs = nullptr) {
  const ModelConfig& mc = model.config();
  ForwardOutput out = model.forward(g, bound, {true, dropout_seed});
  if (frozen_inputs != nullptr) out.layer_inputs = *frozen_inputs;
  Tensor main = mse_mean(out.prediction, Tensor({1, g.y.size()}, g.y));
  const ScoreCache cache = build_score_cache(out, bound, mc.reg.cutoff);
  Tensor reg = reg_loss(cache, adjacency_dense(g), mc.reg);
  // A zero main weight keeps the main path off the loss graph entirely.
  Tensor total = main_weight == 0.0 ? scale(reg, mc.reg.lambda)
                                    : total_loss(scale(main, main_weight), reg, mc.reg.lambda);
  return LossParts{std::move(main), std::move(reg), std::move(total)};
}

bool is_query_key(const std::string& name) {
  for (const char* leaf : {"attn.WQ", "attn.bQ", "attn.WK", "attn.bK"}) {
    const std::string suffix = std::string(".") + leaf;
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return true;
    }
  }
  return false;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

bool GradcheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

std::string GradcheckReport::to_json() const {
  nlohmann::json j;
  j["scope"] = scope;
  j["tolerance"] = tolerance;
  j["passed"] = passed();
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : checks) {
    list.push_back({{"name", c.name},
                    {"error", c.error},
                    {"passed", c.passed},
                    {"detail", c.detail}});
  }
  j["checks"] = std::move(list);
  return j.dump(2);
}

double normwise_relative_error(std::span<const double> analytic,
                               std::span<const double> numeric) {
  double diff = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    diff += d * d;
  }
  diff = std::sqrt(diff);
  const double scale_ = std::max(norm(analytic), norm(numeric));
  return scale_ < 1e-8 ? diff : diff / scale_;
}

double finite_difference_error(const ScalarFn& fn, const std::vector<Tensor>& inputs,
                               double h) {
  Tape tape;
  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  for (const auto& in : inputs) leaves.push_back(tape.leaf(in.detached()));
  const Tensor loss = fn(leaves);
  const Gradients grads = tape.backward(loss);

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<double> analytic(inputs[i].size(), 0.0);
    if (grads.reached(leaves[i].node())) {
      const auto g = grads.of(leaves[i].node());
      std::copy(g.begin(), g.end(), analytic.begin());
    }
    std::vector<double> numeric(inputs[i].size());
    std::vector<Tensor> probe;
    for (const auto& in : inputs) probe.push_back(in.detached());
    for (std::size_t k = 0; k < inputs[i].size(); ++k) {
      const double orig = probe[i][k];
      probe[i][k] = orig + h;
      const double up = fn(probe).item();
      probe[i][k] = orig - h;
      const double down = fn(probe).item();
      probe[i][k] = orig;
      numeric[k] = (up - down) / (2.0 * h);
    }
    worst = std::max(worst, normwise_relative_error(analytic, numeric));
  }
  return worst;
}

GradcheckReport gradcheck_ops(std::size_t seeds, double tolerance,
                              std::uint64_t base_seed) {
  std::map<std::string, double> worst;
  bool stop_ok = true;
  std::string stop_detail;

  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(base_seed + s);
    const std::size_t m = dim(rng), k = dim(rng), n = dim(rng, 2);

    {
      const Tensor r = random_tensor({m, n}, rng);
      record_worst(worst, "matmul",
                   finite_difference_error(
                       [&](const auto& in) { return weighted(matmul(in[0], in[1]), r); },
                       {random_tensor({m, k}, rng), random_tensor({k, n}, rng)}));
    }
    {
      const Tensor r = random_tensor({k, m}, rng);
      record_worst(worst, "transpose",
                   finite_difference_error(
                       [&](const auto& in) { return weighted(transpose(in[0]), r); },
                       {random_tensor({m, k}, rng)}));
    }
    {
      const Tensor r = random_tensor({m, n}, rng);
      const Tensor a = random_tensor({m, n}, rng), b = random_tensor({m, n}, rng);
      record_worst(worst, "add",
                   finite_difference_error(
                       [&](const auto& in) { return weighted(add(in[0], in[1]), r); }, {a, b}));
      record_worst(worst, "sub",
                   finite_difference_error(
                       [&](const auto& in) { return weighted(sub(in[0], in[1]), r); }, {a, b}));
      record_worst(worst, "mul",
                   finite_difference_error(
                       [&](const auto& in) { return weighted(mul(in[0], in[1]), r); }, {a, b}));
      const double factor = rng.normal();
      record_worst(worst, "scale",
                   finite_difference_error(
                       [&](const auto& in) { return weighted(scale(in[0], factor), r); }, {a}));
      record_worst(worst, "add_row_broadcast",
                   finite_difference_error(
                       [&](const auto& in) {
                         return weighted(add_row_broadcast(in[0], in[1]), r);
                       },
                       {a, random_tensor({n}, rng)}));
      record_worst(worst, "relu",
                   finite_difference_error(
                       [&](const auto& in) { return weighted(relu(in[0]), r); },
                       {away_from_zero({m, n}, rng)}));
      record_worst(worst, "sigmoid",
                   finite_difference_error(
                       [&](const auto& in) { return weighted(sigmoid(in[0]), r); },
                       {scale(a, 3.0)}));
      const std::uint64_t mask_seed = rng.next_u64();
      record_worst(worst, "dropout",
                   finite_difference_error(
                       [&](const auto& in) {
                         Rng mask_rng(mask_seed);
                         return weighted(dropout(in[0], 0.3, true, mask_rng), r);
                       },
                       {a}));
      record_worst(worst, "sum",
                   finite_difference_error([](const auto& in) { return sum(in[0]); }, {a}));
      record_worst(worst, "mean_pool_rows",
                   finite_difference_error(
                       [&](const auto& in) {
                         return weighted(mean_pool_rows(in[0]),
                                         Tensor({1, n}, std::vector<double>(
                                                            r.data().begin(),
                                                            r.data().begin() + n)));
                       },
                       {a}));
      record_worst(worst, "mse_mean",
                   finite_difference_error(
                       [](const auto& in) { return mse_mean(in[0], in[1]); }, {a, b}));
      record_worst(worst, "l1_mean",
                   finite_difference_error(
                       [](const auto& in) { return l1_mean(in[0], in[1]); },
                       {add(b, away_from_zero({m, n}, rng)), b}));
      Tensor target = Tensor::zeros({m, n});
      for (double& v : target.mutable_data()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
      record_worst(worst, "bce_mean",
                   finite_difference_error(
                       [&](const auto& in) { return bce_mean(in[0], target); },
                       {scale(a, 2.0)}));
    }
    {
      const Tensor r = random_tensor({n, n}, rng);
      record_worst(worst, "softmax_rows",
                   finite_difference_error(
                       [&](const auto& in) { return weighted(softmax_rows(in[0]), r); },
                       {scale(random_tensor({n, n}, rng), 2.0)}));
    }
    {
      const std::size_t rows = dim(rng, 2), cols = dim(rng);
      const Tensor r = random_tensor({rows, cols}, rng);
      const Tensor x = random_tensor({rows, cols}, rng);
      const Tensor gamma = add(Tensor::filled({cols}, 1.0), scale(random_tensor({cols}, rng), 0.3));
      const Tensor beta = random_tensor({cols}, rng);
      BatchNormState running(cols);
      for (std::size_t j = 0; j < cols; ++j) {
        running.running_mean[j] = rng.normal();
        running.running_var[j] = rng.uniform(0.5, 2.0);
      }
      for (bool train : {true, false}) {
        record_worst(worst, train ? "batchnorm_nodes/train" : "batchnorm_nodes/eval",
                     finite_difference_error(
                         [&](const auto& in) {
                           BatchNormState state = running;
                           return weighted(batchnorm_nodes(in[0], in[1], in[2], state, train), r);
                         },
                         {x, gamma, beta}));
      }
    }
    {
      // The barrier must zero upstream gradients exactly, not approximately.
      Tape tape;
      const Tensor x = tape.leaf(random_tensor({m, n}, rng));
      const Tensor w = tape.leaf(random_tensor({m, n}, rng));
      const Tensor loss = sum(mul(stop_gradient(x), w));
      const Gradients grads = tape.backward(loss);
      if (grads.reached(x.node())) {
        for (double v : grads.of(x.node())) {
          if (v != 0.0) stop_ok = false;
        }
      }
      const auto gw = grads.of(w.node());
      for (std::size_t i = 0; i < gw.size(); ++i) {
        if (gw[i] != x[i]) stop_ok = false;
      }
      if (!stop_ok && stop_detail.empty()) {
        stop_detail = "seed " + std::to_string(base_seed + s);
      }
    }
  }

  GradcheckReport report{"ops", tolerance, {}};
  for (const auto& [name, err] : worst) {
    report.checks.push_back(CheckResult{name, err, err <= tolerance,
                                        std::to_string(seeds) + " seeds"});
  }
  report.checks.push_back(CheckResult{"stop_gradient", stop_ok ? 0.0 : 1.0, stop_ok,
                                      stop_ok ? "upstream gradient bitwise zero"
                                              : "nonzero upstream gradient at " + stop_detail});
  return report;
}

GradcheckReport gradcheck_model(std::size_t seeds, double tolerance,
                                std::uint64_t base_seed) {
  GradcheckReport report{"model", tolerance, {}};
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(base_seed + 1000 + s);
    const Graph g = connected_toy_graph(6, 3, 1, rng);

    ModelConfig cfg;
    cfg.num_layers = 2;
    cfg.hidden = 4;
    cfg.d_in = 3;
    cfg.d_out = 1;
    cfg.dropout = 0.1;
    // Alternate between the two regularizer variants and routing modes.
    const bool l1 = s % 2 == 0;
    cfg.reg = RegConfig{l1 ? RegVariant::kL1 : RegVariant::kCE, 0.5, l1};
    GpsModel model(cfg, rng.next_u64());
    const std::uint64_t dropout_seed = rng.next_u64();

    Tape tape;
    const BoundParams bound = model.params().bind(tape);
    const GradientMap grads =
        backward(model_loss(model, g, bound, dropout_seed, 1.0).total, model.params());

    std::vector<Tensor> frozen;
    if (l1) {
      Tape t;
      const BoundParams b = model.params().bind(t);
      for (const auto& x : model.forward(g, b, {true, dropout_seed}).layer_inputs) {
        frozen.push_back(x.detached());
      }
    }
    auto eval = [&]() {
      Tape t;
      const BoundParams b = model.params().bind(t);
      return model_loss(model, g, b, dropout_seed, 1.0, l1 ? &frozen : nullptr).total.item();
    };

    double worst = 0.0;
    std::string worst_name;
    for (auto& e : model.params().mutable_entries()) {
      std::vector<double> numeric(e.value.size());
      for (std::size_t k = 0; k < e.value.size(); ++k) {
        const double orig = e.value[k];
        e.value[k] = orig + kStep;
        const double up = eval();
        e.value[k] = orig - kStep;
        const double down = eval();
        e.value[k] = orig;
        numeric[k] = (up - down) / (2.0 * kStep);
      }
      const double err = normwise_relative_error(grads.at(e.name).data(), numeric);
      if (err > worst) {
        worst = err;
        worst_name = e.name;
      }
    }
    std::ostringstream name;
    name << "model/seed" << (base_seed + s) << (l1 ? "/l1-cutoff" : "/ce-full");
    report.checks.push_back(
        CheckResult{name.str(), worst, worst <= tolerance, "worst tensor " + worst_name});
  }
  return report;
}

GradcheckReport gradcheck_cutoff(std::uint64_t base_seed) {
  GradcheckReport report{"cutoff", 0.0, {}};
  constexpr std::size_t kSeeds = 5;
  for (std::size_t s = 0; s < kSeeds; ++s) {
    Rng rng(base_seed + 2000 + s);
    const Graph g = connected_toy_graph(8, 3, 1, rng);
    const std::uint64_t init_seed = rng.next_u64();
    const std::uint64_t dropout_seed = rng.next_u64();
    const std::string tag = "/seed" + std::to_string(base_seed + s);

    ModelConfig cfg;
    cfg.num_layers = 2;
    cfg.hidden = 6;
    cfg.d_in = 3;
    cfg.dropout = 0.1;
    cfg.reg = RegConfig{RegVariant::kL1, 1.0, true};

    double cut_value = 0.0;
    {
      GpsModel model(cfg, init_seed);
      Tape tape;
      const BoundParams bound = model.params().bind(tape);
      const LossParts loss = model_loss(model, g, bound, dropout_seed, 0.0);
      cut_value = loss.total.item();
      const GradientMap grads = backward(loss.total, model.params());

      std::string leaked;
      double leaked_norm = 0.0;
      double qk_norm = 0.0;
      for (const auto& [name, grad] : grads) {
        if (is_query_key(name)) {
          qk_norm += norm(grad.data());
          continue;
        }
        for (double v : grad.data()) {
          if (v != 0.0 || std::signbit(v)) {
            leaked = name;
            leaked_norm = std::max(leaked_norm, norm(grad.data()));
            break;
          }
        }
      }
      report.checks.push_back(CheckResult{
          "cutoff/non-qk-zero" + tag, leaked_norm, leaked.empty(),
          leaked.empty() ? "all non-query/key gradients bitwise zero"
                         : "gradient leaked into " + leaked});
      report.checks.push_back(CheckResult{"cutoff/qk-nonzero" + tag, qk_norm, qk_norm > 0.0,
                                          "summed query/key gradient norm"});
    }
    {
      cfg.reg.cutoff = false;
      GpsModel model(cfg, init_seed);
      Tape tape;
      const BoundParams bound = model.params().bind(tape);
      const LossParts loss = model_loss(model, g, bound, dropout_seed, 0.0);
      const GradientMap grads = backward(loss.total, model.params());
      double layer0 = 0.0;
      for (const char* leaf : {"mpnn.W", "mlp.W1", "mlp.W2", "attn.WV"}) {
        layer0 += norm(grads.at(layer_param(0, leaf)).data());
      }
      layer0 += norm(grads.at("encoder.W").data());
      report.checks.push_back(CheckResult{"full/layer0-nonzero" + tag, layer0, layer0 > 0.0,
                                          "norm over layer-0 non-attention weights"});
      const double gap = std::abs(loss.total.item() - cut_value);
      report.checks.push_back(CheckResult{"full/value-equal" + tag, gap, gap <= 1e-12,
                                          "|loss(cutoff) - loss(full)|"});
    }
  }
  return report;
}

GradcheckReport run_gradcheck(const std::string& scope, std::uint64_t base_seed) {
  if (scope == "ops") return gradcheck_ops(20, 1e-4, base_seed);
  if (scope == "model") return gradcheck_model(20, 1e-4, base_seed);
  if (scope == "cutoff") return gradcheck_cutoff(base_seed);
  throw ValidationError("gradcheck: unknown scope '" + scope +
                        "' (expected ops, model or cutoff)");
}

}  // namespace gpsreg
