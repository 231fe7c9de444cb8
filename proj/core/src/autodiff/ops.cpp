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

#include "gpsreg/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gpsreg/autodiff/tape.hpp"
#include "gpsreg/error.hpp"

namespace gpsreg {
namespace {

using Refs = std::vector<InputRef>;

// Records `out` on the shared tape of `inputs`. `make` builds the backward
// function from the resolved input references and is skipped entirely when
// every input is a constant.
template <typename MakeFn>
Tensor record_op(const char* op, Tensor out,
                 std::initializer_list<const Tensor*> inputs, MakeFn make) {
  if (!out.all_finite()) {
    throw NumericError(std::string(op) + ": non-finite output");
  }
  Tape* tape = common_tape(inputs);
  if (!tape) return out;
  Refs refs;
  refs.reserve(inputs.size());
  for (const Tensor* t : inputs) refs.push_back(tape->ref(*t));
  Tape::BackwardFn fn = make(refs);
  return tape->record(std::move(out), std::move(refs), std::move(fn));
}

void require_matrix(const char* op, const Tensor& t) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         shape_string(t.shape()));
  }
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

// out[m×n] += a[m×k] * b[k×n]
void gemm_nn(const double* a, const double* b, double* out, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = b + p * n;
      double* orow = out + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sign_or_zero(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ, " +
                         shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  Tensor out = Tensor::zeros({m, n});
  gemm_nn(a.data().data(), b.data().data(), out.mutable_data().data(), m, k, n);

  return record_op("matmul", std::move(out), {&a, &b}, [&](const Refs& r) {
    return [ra = r[0], rb = r[1], av = a.values(), bv = b.values(), m, k, n](
               std::span<const double> g, Gradients& grads) {
      if (auto ga = grads.accumulator(ra); !ga.empty()) {
        // dA = G * B^T
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
            ga[i * k + p] += acc;
          }
        }
      }
      if (auto gb = grads.accumulator(rb); !gb.empty()) {
        // dB = A^T * G
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
          }
        }
      }
    };
  });
}

Tensor transpose(const Tensor& x) {
  require_matrix("transpose", x);
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out = Tensor::zeros({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = x.at(i, j);

  return record_op("transpose", std::move(out), {&x}, [&](const Refs& refs) {
    return [rx = refs[0], r, c](std::span<const double> g, Gradients& grads) {
      auto gx = grads.accumulator(rx);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += g[j * r + i];
    };
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tensor out = a.detached();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return record_op("add", std::move(out), {&a, &b}, [](const Refs& r) {
    return [ra = r[0], rb = r[1]](std::span<const double> g, Gradients& grads) {
      if (auto ga = grads.accumulator(ra); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      if (auto gb = grads.accumulator(rb); !gb.empty())
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    };
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Tensor out = a.detached();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return record_op("sub", std::move(out), {&a, &b}, [](const Refs& r) {
    return [ra = r[0], rb = r[1]](std::span<const double> g, Gradients& grads) {
      if (auto ga = grads.accumulator(ra); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      if (auto gb = grads.accumulator(rb); !gb.empty())
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    };
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Tensor out = a.detached();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return record_op("mul", std::move(out), {&a, &b}, [&](const Refs& r) {
    return [ra = r[0], rb = r[1], av = a.values(), bv = b.values()](
               std::span<const double> g, Gradients& grads) {
      if (auto ga = grads.accumulator(ra); !ga.empty())
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
      if (auto gb = grads.accumulator(rb); !gb.empty())
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    };
  });
}

Tensor scale(const Tensor& x, double factor) {
  Tensor out = x.detached();
  for (double& v : out.mutable_data()) v *= factor;
  return record_op("scale", std::move(out), {&x}, [factor](const Refs& r) {
    return [rx = r[0], factor](std::span<const double> g, Gradients& grads) {
      auto gx = grads.accumulator(rx);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
    };
  });
}

Tensor add_row_broadcast(const Tensor& x, const Tensor& bias) {
  require_matrix("add_row_broadcast", x);
  const std::size_t n = x.rows(), d = x.cols();
  if (bias.rank() != 1 || bias.size() != d) {
    throw DimensionError("add_row_broadcast: bias " +
                         shape_string(bias.shape()) + " for input " +
                         shape_string(x.shape()));
  }
  Tensor out = x.detached();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) += bias[j];
  return record_op("add_row_broadcast", std::move(out), {&x, &bias},
                   [n, d](const Refs& r) {
                     return [rx = r[0], rb = r[1], n, d](
                                std::span<const double> g, Gradients& grads) {
                       if (auto gx = grads.accumulator(rx); !gx.empty())
                         for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                       if (auto gb = grads.accumulator(rb); !gb.empty())
                         for (std::size_t i = 0; i < n; ++i)
                           for (std::size_t j = 0; j < d; ++j) gb[j] += g[i * d + j];
                     };
                   });
}

Tensor relu(const Tensor& x) {
  Tensor out = x.detached();
  for (double& v : out.mutable_data()) v = v > 0.0 ? v : 0.0;
  return record_op("relu", std::move(out), {&x}, [&](const Refs& r) {
    return [rx = r[0], xv = x.values()](std::span<const double> g,
                                        Gradients& grads) {
      auto gx = grads.accumulator(rx);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (xv[i] > 0.0) gx[i] += g[i];
    };
  });
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = x.detached();
  for (double& v : out.mutable_data()) v = stable_sigmoid(v);
  std::vector<double> yv = out.values();
  return record_op("sigmoid", std::move(out), {&x}, [&](const Refs& r) {
    return [rx = r[0], yv = std::move(yv)](std::span<const double> g,
                                           Gradients& grads) {
      auto gx = grads.accumulator(rx);
      for (std::size_t i = 0; i < g.size(); ++i)
        gx[i] += g[i] * yv[i] * (1.0 - yv[i]);
    };
  });
}

Tensor softmax_rows(const Tensor& x) {
  require_matrix("softmax_rows", x);
  const std::size_t n = x.rows(), m = x.cols();
  Tensor out = x.detached();
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out.mutable_data().data() + i * m;
    const double mx = *std::max_element(row, row + m);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = std::exp(row[j] - mx);
      total += row[j];
    }
    for (std::size_t j = 0; j < m; ++j) row[j] /= total;
  }
  std::vector<double> yv = out.values();
  return record_op("softmax_rows", std::move(out), {&x}, [&](const Refs& r) {
    return [rx = r[0], yv = std::move(yv), n, m](std::span<const double> g,
                                                 Gradients& grads) {
      auto gx = grads.accumulator(rx);
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += g[i * m + j] * yv[i * m + j];
        for (std::size_t j = 0; j < m; ++j)
          gx[i * m + j] += yv[i * m + j] * (g[i * m + j] - dot);
      }
    };
  });
}

Tensor dropout(const Tensor& x, double p, bool train, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw DomainError("dropout: p must lie in [0, 1), got " + std::to_string(p));
  }
  if (!train || p == 0.0) {
    // Identity that still routes gradients.
    return scale(x, 1.0);
  }
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = rng.bernoulli(1.0 - p) ? keep_scale : 0.0;
  Tensor out = x.detached();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return record_op("dropout", std::move(out), {&x}, [&](const Refs& r) {
    return [rx = r[0], mask = std::move(mask)](std::span<const double> g,
                                               Gradients& grads) {
      auto gx = grads.accumulator(rx);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
    };
  });
}

Tensor stop_gradient(const Tensor& x) { return x.detached(); }

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return record_op("sum", Tensor::scalar(total), {&x}, [](const Refs& r) {
    return [rx = r[0]](std::span<const double> g, Gradients& grads) {
      auto gx = grads.accumulator(rx);
      for (double& v : gx) v += g[0];
    };
  });
}

Tensor l1_mean(const Tensor& pred, const Tensor& target) {
  require_same_shape("l1_mean", pred, target);
  const double count = static_cast<double>(pred.size());
  std::vector<double> signs(pred.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    total += std::abs(diff);
    signs[i] = sign_or_zero(diff);
  }
  return record_op(
      "l1_mean", Tensor::scalar(total / count), {&pred, &target},
      [&](const Refs& r) {
        return [rp = r[0], rt = r[1], signs = std::move(signs), count](
                   std::span<const double> g, Gradients& grads) {
          const double s = g[0] / count;
          if (auto gp = grads.accumulator(rp); !gp.empty())
            for (std::size_t i = 0; i < signs.size(); ++i) gp[i] += s * signs[i];
          if (auto gt = grads.accumulator(rt); !gt.empty())
            for (std::size_t i = 0; i < signs.size(); ++i) gt[i] -= s * signs[i];
        };
      });
}

Tensor bce_mean(const Tensor& logits, const Tensor& target) {
  require_same_shape("bce_mean", logits, target);
  for (double t : target.data()) {
    if (t != 0.0 && t != 1.0) {
      throw DomainError("bce_mean: target entries must be 0 or 1, got " +
                        std::to_string(t));
    }
  }
  const double count = static_cast<double>(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    total += std::max(z, 0.0) - z * target[i] + std::log1p(std::exp(-std::abs(z)));
  }
  return record_op(
      "bce_mean", Tensor::scalar(total / count), {&logits, &target},
      [&](const Refs& r) {
        return [rz = r[0], rt = r[1], zv = logits.values(), tv = target.values(),
                count](std::span<const double> g, Gradients& grads) {
          const double s = g[0] / count;
          if (auto gz = grads.accumulator(rz); !gz.empty())
            for (std::size_t i = 0; i < zv.size(); ++i)
              gz[i] += s * (stable_sigmoid(zv[i]) - tv[i]);
          if (auto gt = grads.accumulator(rt); !gt.empty())
            for (std::size_t i = 0; i < zv.size(); ++i) gt[i] -= s * zv[i];
        };
      });
}

Tensor mse_mean(const Tensor& pred, const Tensor& target) {
  require_same_shape("mse_mean", pred, target);
  const double count = static_cast<double>(pred.size());
  std::vector<double> diff(pred.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    diff[i] = pred[i] - target[i];
    total += diff[i] * diff[i];
  }
  return record_op(
      "mse_mean", Tensor::scalar(total / count), {&pred, &target},
      [&](const Refs& r) {
        return [rp = r[0], rt = r[1], diff = std::move(diff), count](
                   std::span<const double> g, Gradients& grads) {
          const double s = 2.0 * g[0] / count;
          if (auto gp = grads.accumulator(rp); !gp.empty())
            for (std::size_t i = 0; i < diff.size(); ++i) gp[i] += s * diff[i];
          if (auto gt = grads.accumulator(rt); !gt.empty())
            for (std::size_t i = 0; i < diff.size(); ++i) gt[i] -= s * diff[i];
        };
      });
}

Tensor mean_pool_rows(const Tensor& x) {
  require_matrix("mean_pool_rows", x);
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0) throw DimensionError("mean_pool_rows: no rows");
  Tensor out = Tensor::zeros({1, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += x.at(i, j);
  for (double& v : out.mutable_data()) v /= static_cast<double>(n);
  return record_op("mean_pool_rows", std::move(out), {&x}, [n, d](const Refs& r) {
    return [rx = r[0], n, d](std::span<const double> g, Gradients& grads) {
      auto gx = grads.accumulator(rx);
      const double inv = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) gx[i * d + j] += g[j] * inv;
    };
  });
}

Tensor batchnorm_nodes(const Tensor& x, const Tensor& gamma,
                       const Tensor& beta, BatchNormState& state, bool train) {
  require_matrix("batchnorm_nodes", x);
  const std::size_t n = x.rows(), d = x.cols();
  if (gamma.size() != d || beta.size() != d) {
    throw DimensionError("batchnorm_nodes: affine parameters do not match width " +
                         std::to_string(d));
  }
  if (state.running_mean.size() != d || state.running_var.size() != d) {
    throw DimensionError("batchnorm_nodes: running statistics do not match width " +
                         std::to_string(d));
  }
  if (train && n < 2) {
    throw PreconditionError(
        "batchnorm_nodes: training needs at least 2 nodes, got " +
        std::to_string(n));
  }

  std::vector<double> mean(d, 0.0), inv_std(d, 0.0);
  if (train) {
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += x.at(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = x.at(i, j) - mean[j];
        var[j] += c * c;
      }
    for (std::size_t j = 0; j < d; ++j) {
      var[j] /= static_cast<double>(n);
      inv_std[j] = 1.0 / std::sqrt(var[j] + kBatchNormEps);
      const double unbiased = var[j] * static_cast<double>(n) / static_cast<double>(n - 1);
      state.running_mean[j] = (1.0 - kBatchNormMomentum) * state.running_mean[j] +
                              kBatchNormMomentum * mean[j];
      state.running_var[j] = (1.0 - kBatchNormMomentum) * state.running_var[j] +
                             kBatchNormMomentum * unbiased;
    }
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      mean[j] = state.running_mean[j];
      inv_std[j] = 1.0 / std::sqrt(state.running_var[j] + kBatchNormEps);
    }
  }

  std::vector<double> xhat(n * d);
  Tensor out = Tensor::zeros({n, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (x.at(i, j) - mean[j]) * inv_std[j];
      xhat[i * d + j] = h;
      out.at(i, j) = gamma[j] * h + beta[j];
    }

  return record_op(
      "batchnorm_nodes", std::move(out), {&x, &gamma, &beta},
      [&](const Refs& r) {
        return [rx = r[0], rg = r[1], rb = r[2], xhat = std::move(xhat),
                inv_std = std::move(inv_std), gv = gamma.values(), n, d,
                train](std::span<const double> g, Gradients& grads) {
          if (auto gg = grads.accumulator(rg); !gg.empty())
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < d; ++j) gg[j] += g[i * d + j] * xhat[i * d + j];
          if (auto gb = grads.accumulator(rb); !gb.empty())
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < d; ++j) gb[j] += g[i * d + j];
          auto gx = grads.accumulator(rx);
          if (gx.empty()) return;
          if (!train) {
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < d; ++j)
                gx[i * d + j] += g[i * d + j] * gv[j] * inv_std[j];
            return;
          }
          const double inv_n = 1.0 / static_cast<double>(n);
          for (std::size_t j = 0; j < d; ++j) {
            double mean_dh = 0.0, mean_dh_h = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const double dh = g[i * d + j] * gv[j];
              mean_dh += dh;
              mean_dh_h += dh * xhat[i * d + j];
            }
            mean_dh *= inv_n;
            mean_dh_h *= inv_n;
            for (std::size_t i = 0; i < n; ++i) {
              const double dh = g[i * d + j] * gv[j];
              gx[i * d + j] +=
                  inv_std[j] * (dh - mean_dh - xhat[i * d + j] * mean_dh_h);
            }
          }
        };
      });
}

}  // namespace gpsreg
