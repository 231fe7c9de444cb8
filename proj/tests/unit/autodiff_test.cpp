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

#include <cmath>
#include <numbers>

#include "gpsreg/autodiff/ops.hpp"
#include "gpsreg/autodiff/param_set.hpp"
#include "gpsreg/autodiff/tape.hpp"
#include "gpsreg/error.hpp"
#include "test_support.hpp"

namespace gpsreg {
namespace {

using testing::gradient_error;
using testing::random_matrix;
using testing::weighted_sum;

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Tensor m = Tensor::matrix({{1.5, -2.0}, {0.25, 4.0}});
  EXPECT_EQ(matmul(Tensor::identity(2), m).values(), m.values());
}

TEST(Matmul, HandArithmetic) {
  const Tensor c = matmul(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::matrix({{1}, {1}}));
  EXPECT_EQ(c.shape(), (Shape{2, 1}));
  EXPECT_EQ(c.values(), (std::vector<double>{3, 7}));
}

TEST(Matmul, MatchesNaiveProduct) {
  Rng rng(3);
  const Tensor a = random_matrix(4, 6, rng), b = random_matrix(6, 5, rng);
  EXPECT_LT(testing::max_abs_diff(matmul(a, b), testing::naive_matmul(a, b)), 1e-13);
}

TEST(Matmul, BackwardMatchesFiniteDifferences) {
  Rng rng(11);
  const Tensor r = random_matrix(5, 3, rng);
  const double err = gradient_error(
      [&](const auto& in) { return weighted_sum(matmul(in[0], in[1]), r); },
      {random_matrix(5, 7, rng), random_matrix(7, 3, rng)});
  EXPECT_LE(err, 1e-6);
}

TEST(Matmul, InnerDimensionMismatchThrows) {
  EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), DimensionError);
}

TEST(Softmax, ZeroMatrixIsUniform) {
  const Tensor s = softmax_rows(Tensor::zeros({4, 4}));
  for (double v : s.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Softmax, LogRowRecoversProportions) {
  const Tensor s = softmax_rows(Tensor::matrix({{std::log(1.0), std::log(2.0), std::log(3.0)}}));
  EXPECT_NEAR(s[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(s[1], 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(s[2], 3.0 / 6.0, 1e-15);
}

TEST(Softmax, RowsSumToOneAndStayInUnitInterval) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor s = softmax_rows(random_matrix(7, 7, rng, 20.0));
    for (std::size_t i = 0; i < 7; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 7; ++j) {
        EXPECT_GE(s.at(i, j), 0.0);
        EXPECT_LE(s.at(i, j), 1.0);
        row += s.at(i, j);
      }
      EXPECT_NEAR(row, 1.0, 1e-12);
    }
  }
}

TEST(Softmax, BackwardMatchesFiniteDifferences) {
  Rng rng(7);
  const Tensor r = random_matrix(6, 6, rng);
  EXPECT_LE(gradient_error([&](const auto& in) { return weighted_sum(softmax_rows(in[0]), r); },
                           {random_matrix(6, 6, rng)}),
            1e-6);
}

TEST(Sigmoid, KnownValuesAndSymmetry) {
  EXPECT_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5);
  Rng rng(2);
  const Tensor x = random_matrix(3, 4, rng, 5.0);
  const Tensor pos = sigmoid(x), neg = sigmoid(scale(x, -1.0));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(pos[i], 1.0 - neg[i], 1e-15);
}

TEST(Sigmoid, SaturatesWithoutOverflow) {
  EXPECT_NEAR(sigmoid(Tensor::scalar(30.0)).item(), 1.0, 1e-12);
  const double tiny = sigmoid(Tensor::scalar(-800.0)).item();
  EXPECT_TRUE(std::isfinite(tiny));
  EXPECT_GE(tiny, 0.0);
  EXPECT_LT(tiny, 1e-300);
}

TEST(L1Mean, ClosedForms) {
  const Tensor t = Tensor::matrix({{0, 1}, {1, 0}});
  EXPECT_EQ(l1_mean(t, t).item(), 0.0);
  EXPECT_DOUBLE_EQ(l1_mean(Tensor::filled({2, 2}, 0.5), t).item(), 0.5);
}

TEST(L1Mean, BackwardMatchesFiniteDifferencesAwayFromTies) {
  Rng rng(13);
  Tensor target = random_matrix(4, 4, rng);
  Tensor pred = target;
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += (rng.bernoulli(0.5) ? 1 : -1) * rng.uniform(0.1, 1.0);
  EXPECT_LE(gradient_error([](const auto& in) { return l1_mean(in[0], in[1]); }, {pred, target}),
            1e-6);
}

TEST(L1Mean, ShapeMismatchThrows) {
  EXPECT_THROW(l1_mean(Tensor::zeros({2, 2}), Tensor::zeros({2, 3})), DimensionError);
}

TEST(BceMean, ClosedForms) {
  EXPECT_NEAR(bce_mean(Tensor::zeros({3, 3}), Tensor::matrix({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}})).item(),
              std::numbers::ln2, 1e-15);
  EXPECT_LE(bce_mean(Tensor::matrix({{30.0}}), Tensor::matrix({{1.0}})).item(), 1e-12);
}

TEST(BceMean, BackwardMatchesFiniteDifferences) {
  Rng rng(17);
  Tensor target = Tensor::zeros({5, 5});
  for (double& v : target.mutable_data()) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
  EXPECT_LE(gradient_error([&](const auto& in) { return bce_mean(in[0], target); },
                           {random_matrix(5, 5, rng, 3.0)}),
            1e-6);
}

TEST(BceMean, NonBinaryTargetIsDomainError) {
  EXPECT_THROW(bce_mean(Tensor::zeros({1, 2}), Tensor::matrix({{0.0, 0.5}})), DomainError);
}

TEST(StopGradient, ForwardIsBitwiseIdentical) {
  Rng rng(1);
  Tape tape;
  const Tensor x = tape.leaf(random_matrix(3, 3, rng));
  EXPECT_EQ(stop_gradient(x).values(), x.values());
}

TEST(StopGradient, UpstreamGradientIsExactlyZero) {
  Rng rng(4);
  Tape tape;
  const Tensor x = tape.leaf(random_matrix(3, 4, rng));
  const Tensor w = tape.leaf(random_matrix(3, 4, rng));
  // x also feeds the barrier through an intermediate op.
  const Tensor loss = sum(mul(stop_gradient(scale(x, 2.0)), w));
  const Gradients g = tape.backward(loss);
  if (g.reached(x.node())) {
    for (double v : g.of(x.node())) {
      EXPECT_EQ(v, 0.0);
      EXPECT_FALSE(std::signbit(v));
    }
  }
  const auto gw = g.of(w.node());
  for (std::size_t i = 0; i < gw.size(); ++i) EXPECT_EQ(gw[i], 2.0 * x[i]);
}

TEST(Elementwise, ReluValues) {
  const Tensor r = relu(Tensor::vector({-3.0, 3.0}));
  EXPECT_EQ(r[0], 0.0);
  EXPECT_EQ(r[1], 3.0);
}

TEST(Elementwise, BackwardMatchesFiniteDifferences) {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t m = 2 + rng.below(4), n = 2 + rng.below(4);
    const Tensor a = random_matrix(m, n, rng), b = random_matrix(m, n, rng);
    const Tensor r = random_matrix(m, n, rng);
    Tensor away = a;
    for (double& v : away.mutable_data()) v = (v < 0 ? -1 : 1) * (0.1 + std::abs(v));

    EXPECT_LE(gradient_error([&](const auto& in) { return weighted_sum(add(in[0], in[1]), r); }, {a, b}), 1e-6);
    EXPECT_LE(gradient_error([&](const auto& in) { return weighted_sum(sub(in[0], in[1]), r); }, {a, b}), 1e-6);
    EXPECT_LE(gradient_error([&](const auto& in) { return weighted_sum(mul(in[0], in[1]), r); }, {a, b}), 1e-6);
    EXPECT_LE(gradient_error([&](const auto& in) { return weighted_sum(scale(in[0], -1.7), r); }, {a}), 1e-6);
    EXPECT_LE(gradient_error([&](const auto& in) { return weighted_sum(relu(in[0]), r); }, {away}), 1e-6);
    EXPECT_LE(gradient_error([&](const auto& in) { return weighted_sum(sigmoid(in[0]), r); }, {a}), 1e-6);
    EXPECT_LE(gradient_error([&](const auto& in) { return weighted_sum(transpose(in[0]), transpose(r)); }, {a}), 1e-6);
    EXPECT_LE(gradient_error([](const auto& in) { return mse_mean(in[0], in[1]); }, {a, b}), 1e-6);
    EXPECT_LE(gradient_error([&](const auto& in) {
                return weighted_sum(add_row_broadcast(in[0], in[1]), r);
              }, {a, testing::random_vector(n, rng)}), 1e-6);
    const Tensor rp = random_matrix(1, n, rng);
    EXPECT_LE(gradient_error([&](const auto& in) { return weighted_sum(mean_pool_rows(in[0]), rp); }, {a}), 1e-6);
    const std::uint64_t mask_seed = rng.next_u64();
    EXPECT_LE(gradient_error([&](const auto& in) {
                Rng mask(mask_seed);
                return weighted_sum(dropout(in[0], 0.4, true, mask), r);
              }, {a}), 1e-6);
  }
}

TEST(Dropout, EvalModeIsIdentity) {
  Rng rng(9), mask(1);
  const Tensor x = random_matrix(4, 4, rng);
  EXPECT_EQ(dropout(x, 0.5, false, mask).values(), x.values());
}

TEST(Dropout, SurvivorsAreScaled) {
  Rng rng(9), mask(2);
  const Tensor x = random_matrix(20, 20, rng);
  const Tensor y = dropout(x, 0.25, true, mask);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] != 0.0) {
      EXPECT_DOUBLE_EQ(y[i], x[i] / 0.75);
      ++kept;
    }
  }
  EXPECT_GT(kept, 250u);
  EXPECT_LT(kept, 350u);
}

TEST(Dropout, ProbabilityOutsideRangeThrows) {
  Rng mask(0);
  EXPECT_THROW(dropout(Tensor::zeros({2, 2}), 1.0, true, mask), DomainError);
  EXPECT_THROW(dropout(Tensor::zeros({2, 2}), -0.1, true, mask), DomainError);
}

TEST(BatchNorm, ConstantColumnYieldsBeta) {
  BatchNormState state(2);
  const Tensor x = Tensor::matrix({{3.0, 1.0}, {3.0, 2.0}, {3.0, 4.0}});
  const Tensor y = batchnorm_nodes(x, Tensor::vector({2.0, 1.0}), Tensor::vector({0.7, 0.0}), state, true);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(y.at(i, 0), 0.7);
}

TEST(BatchNorm, StandardizesColumns) {
  Rng rng(31);
  const std::size_t n = 9, d = 4;
  // Column variance around 1e6 puts eps / (var + eps) below 1e-10.
  const Tensor x = random_matrix(n, d, rng, 1e3);
  BatchNormState state(d);
  const Tensor y = batchnorm_nodes(x, Tensor::filled({d}, 1.0), Tensor::zeros({d}), state, true);
  for (std::size_t c = 0; c < d; ++c) {
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean_x += x.at(i, c) / n;
      mean_y += y.at(i, c) / n;
    }
    double var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      var_x += (x.at(i, c) - mean_x) * (x.at(i, c) - mean_x) / n;
      var_y += (y.at(i, c) - mean_y) * (y.at(i, c) - mean_y) / n;
    }
    EXPECT_NEAR(mean_y, 0.0, 1e-10);
    EXPECT_NEAR(var_y, var_x / (var_x + kBatchNormEps), 1e-12);
    EXPECT_NEAR(var_y, 1.0, 1e-10);
  }
}

TEST(BatchNorm, RunningStatisticsUseMomentumAndUnbiasedVariance) {
  const Tensor x = Tensor::matrix({{1.0}, {2.0}, {6.0}});
  BatchNormState state(1);
  batchnorm_nodes(x, Tensor::vector({1.0}), Tensor::vector({0.0}), state, true);
  // mean 3, unbiased variance 7.
  EXPECT_NEAR(state.running_mean[0], 0.1 * 3.0, 1e-15);
  EXPECT_NEAR(state.running_var[0], 0.9 * 1.0 + 0.1 * 7.0, 1e-15);

  const Tensor y = batchnorm_nodes(x, Tensor::vector({1.0}), Tensor::vector({0.0}), state, false);
  EXPECT_NEAR(y[0], (1.0 - 0.3) / std::sqrt(1.6 + kBatchNormEps), 1e-15);
}

TEST(BatchNorm, BackwardMatchesFiniteDifferences) {
  Rng rng(37);
  const std::size_t n = 6, d = 3;
  const Tensor r = random_matrix(n, d, rng);
  for (bool train : {true, false}) {
    BatchNormState base(d);
    base.running_mean = {0.3, -0.2, 1.0};
    base.running_var = {0.8, 1.5, 2.0};
    const double err = gradient_error(
        [&](const auto& in) {
          BatchNormState s = base;
          return weighted_sum(batchnorm_nodes(in[0], in[1], in[2], s, train), r);
        },
        {random_matrix(n, d, rng), testing::random_vector(d, rng), testing::random_vector(d, rng)});
    EXPECT_LE(err, 1e-5) << (train ? "train" : "eval");
  }
}

TEST(BatchNorm, SingleRowTrainingIsRejected) {
  BatchNormState state(2);
  EXPECT_THROW(batchnorm_nodes(Tensor::zeros({1, 2}), Tensor::filled({2}, 1.0), Tensor::zeros({2}),
                               state, true),
               PreconditionError);
}

TEST(Backward, SumGivesUnitGradient) {
  ParamSet params;
  params.add("w", Tensor::matrix({{1.0, -2.0}, {0.5, 3.0}}));
  Tape tape;
  const BoundParams b = params.bind(tape);
  const GradientMap g = backward(sum(b["w"]), params);
  for (double v : g.at("w").values()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, FanOutAccumulates) {
  Rng rng(41);
  const Tensor a = random_matrix(3, 2, rng), c = random_matrix(3, 2, rng);
  ParamSet params;
  params.add("w", random_matrix(3, 2, rng));
  Tape tape;
  const BoundParams b = params.bind(tape);
  const Tensor loss = add(sum(mul(b["w"], a)), sum(mul(b["w"], c)));
  const GradientMap g = backward(loss, params);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(g.at("w")[i], a[i] + c[i], 1e-15);
}

TEST(Backward, UnreachedParameterGetsZero) {
  ParamSet params;
  params.add("used", Tensor::vector({1.0, 2.0}));
  params.add("unused", Tensor::vector({3.0}));
  Tape tape;
  const BoundParams b = params.bind(tape);
  const GradientMap g = backward(sum(b["used"]), params);
  EXPECT_EQ(g.at("unused").values(), std::vector<double>{0.0});
}

TEST(Backward, NonScalarLossThrows) {
  ParamSet params;
  params.add("w", Tensor::vector({1.0, 2.0}));
  Tape tape;
  const BoundParams b = params.bind(tape);
  EXPECT_THROW(backward(b["w"], params), DimensionError);
  EXPECT_THROW(backward(Tensor::scalar(1.0), params), PreconditionError);
}

TEST(Backward, SiblingOrderDoesNotChangeGradients) {
  Rng rng(43);
  const Tensor w0 = random_matrix(4, 4, rng);
  std::vector<Tensor> probes;
  for (int i = 0; i < 5; ++i) probes.push_back(random_matrix(4, 4, rng));

  auto gradient_with_order = [&](const std::vector<int>& order) {
    ParamSet params;
    params.add("w", w0);
    Tape tape;
    const BoundParams b = params.bind(tape);
    std::vector<Tensor> terms(probes.size());
    for (int i : order) terms[i] = sum(sigmoid(matmul(b["w"], probes[i])));
    Tensor loss = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) loss = add(loss, terms[i]);
    return backward(loss, params).at("w");
  };
  const Tensor forward_order = gradient_with_order({0, 1, 2, 3, 4});
  const Tensor reverse_order = gradient_with_order({4, 3, 2, 1, 0});
  EXPECT_LE(testing::max_abs_diff(forward_order, reverse_order), 1e-12);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParamSet params;
  params.add("w", Tensor::vector({1.0, -2.0}));
  adam_step(params, {{"w", Tensor::zeros({2})}}, AdamConfig{});
  EXPECT_EQ(params.value("w").values(), (std::vector<double>{1.0, -2.0}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamSet params;
  params.add("w", Tensor::vector({1.0, -2.0, 0.5}));
  AdamConfig cfg;
  cfg.lr = 0.01;
  adam_step(params, {{"w", Tensor::vector({3.0, -0.2, 1e-3})}}, cfg);
  const auto& w = params.value("w");
  EXPECT_NEAR(w[0], 1.0 - 0.01, 1e-8);
  EXPECT_NEAR(w[1], -2.0 + 0.01, 1e-7);
  EXPECT_NEAR(w[2], 0.5 - 0.01, 1e-4);
}

TEST(Adam, MinimizesQuadraticBowl) {
  Rng rng(47);
  const Tensor target = testing::random_vector(6, rng);
  ParamSet params;
  params.add("w", Tensor::zeros({6}));
  AdamConfig cfg;
  cfg.lr = 0.05;
  double loss = 0.0;
  for (int step = 0; step < 2000; ++step) {
    Tape tape;
    const BoundParams b = params.bind(tape);
    const Tensor diff = sub(b["w"], target);
    const Tensor l = sum(mul(diff, diff));
    loss = l.item();
    adam_step(params, backward(l, params), cfg);
  }
  EXPECT_LE(loss, 1e-6);
}

TEST(Adam, MissingGradientThrows) {
  ParamSet params;
  params.add("w", Tensor::vector({1.0}));
  EXPECT_THROW(adam_step(params, {}, AdamConfig{}), ValidationError);
}

TEST(ParamSet, DuplicateNameThrows) {
  ParamSet params;
  params.add("w", Tensor::vector({1.0}));
  EXPECT_THROW(params.add("w", Tensor::vector({2.0})), ValidationError);
}

TEST(Forward, SameSeedIsBitwiseDeterministic) {
  auto run = [] {
    Rng data(5), mask(99);
    const Tensor x = random_matrix(5, 5, data);
    return softmax_rows(dropout(matmul(x, transpose(x)), 0.3, true, mask)).values();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace gpsreg
