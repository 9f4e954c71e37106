// Copyright 2026 The emorec Authors.
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

#include "emorec/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "emorec/error.hpp"

namespace emorec {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ValidationError(std::string(what) + ": expected rank " +
                          std::to_string(rank) + ", got shape " +
                          shape_string(t.shape()));
  }
}

void check_valid_len(std::size_t valid_len, std::size_t rows,
                     const char* what) {
  if (valid_len == 0) {
    throw ValidationError(std::string(what) + ": valid_len must be >= 1");
  }
  if (valid_len > rows) {
    throw ValidationError(std::string(what) + ": valid_len " +
                          std::to_string(valid_len) + " exceeds length " +
                          std::to_string(rows));
  }
}

}  // namespace

std::string_view pool_mode_name(PoolMode mode) {
  switch (mode) {
    case PoolMode::kMax:
      return "max";
    case PoolMode::kAvg:
      return "avg";
    case PoolMode::kStd:
      return "std";
  }
  return "?";
}

PoolMode parse_pool_mode(std::string_view name) {
  if (name == "max") return PoolMode::kMax;
  if (name == "avg") return PoolMode::kAvg;
  if (name == "std") return PoolMode::kStd;
  throw ValidationError("unknown pool mode '" + std::string(name) +
                        "' (expected max, avg or std)");
}

Tensor conv_full_width(Graph& g, const Tensor& x, const Tensor& kernels,
                       const Tensor& bias) {
  require_rank(x, 2, "conv_full_width input");
  require_rank(kernels, 3, "conv_full_width kernels");
  require_rank(bias, 1, "conv_full_width bias");
  const std::size_t len = x.dim(0), width = x.dim(1);
  const std::size_t filters = kernels.dim(0), taps = kernels.dim(1);
  if (kernels.dim(2) != width) {
    throw ValidationError("conv_full_width: kernel width " +
                          std::to_string(kernels.dim(2)) +
                          " != input feature dimension " +
                          std::to_string(width));
  }
  if (taps == 0) throw ValidationError("conv_full_width: kernel size 0");
  if (bias.dim(0) != filters) {
    throw ValidationError("conv_full_width: bias length " +
                          std::to_string(bias.dim(0)) + " != filters " +
                          std::to_string(filters));
  }
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(taps / 2);
  const auto L = static_cast<std::ptrdiff_t>(len);

  const double* xd = x.data().data();
  const double* kd = kernels.data().data();
  const double* bd = bias.data().data();
  std::vector<double> out(len * filters);
  for (std::ptrdiff_t i = 0; i < L; ++i) {
    double* yi = &out[static_cast<std::size_t>(i) * filters];
    std::copy(bd, bd + filters, yi);
    for (std::size_t p = 0; p < taps; ++p) {
      // Tap p pairs with offset m = p - s/2, which reads row i - m.
      const std::ptrdiff_t r = i + half - static_cast<std::ptrdiff_t>(p);
      if (r < 0 || r >= L) continue;
      const double* xr = xd + static_cast<std::size_t>(r) * width;
      for (std::size_t f = 0; f < filters; ++f) {
        yi[f] += dot(kd + (f * taps + p) * width, xr, width);
      }
    }
  }

  return g.record(
      {len, filters}, std::move(out), {&x, &kernels, &bias},
      [x, kernels, bias, len, width, filters, taps, half](
          std::span<const double> gy) {
        const auto L = static_cast<std::ptrdiff_t>(len);
        const double* xd = x.data().data();
        const double* kd = kernels.data().data();
        if (bias.requires_grad()) {
          std::vector<double> gb(filters, 0.0);
          for (std::size_t i = 0; i < len; ++i)
            for (std::size_t f = 0; f < filters; ++f)
              gb[f] += gy[i * filters + f];
          accumulate_grad(bias, gb);
        }
        const bool want_k = kernels.requires_grad();
        const bool want_x = x.requires_grad();
        if (!want_k && !want_x) return;
        std::vector<double> gk(want_k ? kernels.size() : 0, 0.0);
        std::vector<double> gx(want_x ? x.size() : 0, 0.0);
        for (std::ptrdiff_t i = 0; i < L; ++i) {
          const double* gyi = gy.data() + static_cast<std::size_t>(i) * filters;
          for (std::size_t p = 0; p < taps; ++p) {
            const std::ptrdiff_t r = i + half - static_cast<std::ptrdiff_t>(p);
            if (r < 0 || r >= L) continue;
            const std::size_t row = static_cast<std::size_t>(r) * width;
            for (std::size_t f = 0; f < filters; ++f) {
              const double gv = gyi[f];
              if (gv == 0.0) continue;
              const std::size_t k_off = (f * taps + p) * width;
              if (want_k) axpy(gv, xd + row, gk.data() + k_off, width);
              if (want_x) axpy(gv, kd + k_off, gx.data() + row, width);
            }
          }
        }
        if (want_k) accumulate_grad(kernels, gk);
        if (want_x) accumulate_grad(x, gx);
      });
}

Tensor global_pool_time(Graph& g, const Tensor& x, PoolMode mode,
                        std::size_t valid_len) {
  require_rank(x, 2, "global_pool_time");
  const std::size_t len = x.dim(0), ch = x.dim(1);
  check_valid_len(valid_len, len, "global_pool_time");
  const double* xd = x.data().data();
  const double n = static_cast<double>(valid_len);

  switch (mode) {
    case PoolMode::kMax: {
      std::vector<double> out(xd, xd + ch);
      std::vector<std::size_t> arg(ch, 0);
      for (std::size_t i = 1; i < valid_len; ++i) {
        for (std::size_t c = 0; c < ch; ++c) {
          const double v = xd[i * ch + c];
          // Strict comparison keeps the first occurrence on ties.
          if (v > out[c]) {
            out[c] = v;
            arg[c] = i;
          }
        }
      }
      return g.record({ch}, std::move(out), {&x},
                      [x, arg, ch](std::span<const double> gy) {
                        std::vector<double> gx(x.size(), 0.0);
                        for (std::size_t c = 0; c < ch; ++c)
                          gx[arg[c] * ch + c] = gy[c];
                        accumulate_grad(x, gx);
                      });
    }
    case PoolMode::kAvg: {
      std::vector<double> out(ch, 0.0);
      for (std::size_t i = 0; i < valid_len; ++i)
        for (std::size_t c = 0; c < ch; ++c) out[c] += xd[i * ch + c];
      for (double& v : out) v /= n;
      return g.record({ch}, std::move(out), {&x},
                      [x, ch, valid_len, n](std::span<const double> gy) {
                        std::vector<double> gx(x.size(), 0.0);
                        for (std::size_t i = 0; i < valid_len; ++i)
                          for (std::size_t c = 0; c < ch; ++c)
                            gx[i * ch + c] = gy[c] / n;
                        accumulate_grad(x, gx);
                      });
    }
    case PoolMode::kStd: {
      std::vector<double> mean(ch, 0.0);
      for (std::size_t i = 0; i < valid_len; ++i)
        for (std::size_t c = 0; c < ch; ++c) mean[c] += xd[i * ch + c];
      for (double& v : mean) v /= n;
      std::vector<double> out(ch, 0.0);
      for (std::size_t i = 0; i < valid_len; ++i) {
        for (std::size_t c = 0; c < ch; ++c) {
          const double d = xd[i * ch + c] - mean[c];
          out[c] += d * d;
        }
      }
      for (double& v : out) v = std::sqrt(v / n + kStdPoolEpsilon);
      std::vector<double> sigma = out;
      return g.record(
          {ch}, std::move(out), {&x},
          [x, ch, valid_len, n, mean = std::move(mean),
           sigma = std::move(sigma)](std::span<const double> gy) {
            // d sigma / d x_i = (x_i - mean) / (n * sigma)
            const double* xd = x.data().data();
            std::vector<double> gx(x.size(), 0.0);
            for (std::size_t i = 0; i < valid_len; ++i)
              for (std::size_t c = 0; c < ch; ++c)
                gx[i * ch + c] =
                    gy[c] * (xd[i * ch + c] - mean[c]) / (n * sigma[c]);
            accumulate_grad(x, gx);
          });
    }
  }
  throw ValidationError("global_pool_time: bad pool mode");
}

Tensor affine(Graph& g, const Tensor& x, const Tensor& weight,
              const Tensor& bias) {
  require_rank(x, 1, "affine input");
  require_rank(weight, 2, "affine weight");
  require_rank(bias, 1, "affine bias");
  const std::size_t n_out = weight.dim(0), n_in = weight.dim(1);
  if (x.dim(0) != n_in || bias.dim(0) != n_out) {
    throw ValidationError("affine: weight " + shape_string(weight.shape()) +
                          ", input " + shape_string(x.shape()) + ", bias " +
                          shape_string(bias.shape()) + " do not conform");
  }
  const double* wd = weight.data().data();
  const double* xd = x.data().data();
  std::vector<double> out(n_out);
  for (std::size_t o = 0; o < n_out; ++o)
    out[o] = bias[o] + dot(wd + o * n_in, xd, n_in);
  return g.record({n_out}, std::move(out), {&x, &weight, &bias},
                  [x, weight, bias, n_in, n_out](std::span<const double> gy) {
                    accumulate_grad(bias, gy);
                    const double* wd = weight.data().data();
                    const double* xd = x.data().data();
                    if (weight.requires_grad()) {
                      std::vector<double> gw(weight.size(), 0.0);
                      for (std::size_t o = 0; o < n_out; ++o)
                        axpy(gy[o], xd, gw.data() + o * n_in, n_in);
                      accumulate_grad(weight, gw);
                    }
                    if (x.requires_grad()) {
                      std::vector<double> gx(n_in, 0.0);
                      for (std::size_t o = 0; o < n_out; ++o)
                        axpy(gy[o], wd + o * n_in, gx.data(), n_in);
                      accumulate_grad(x, gx);
                    }
                  });
}

Tensor softmax(Graph& g, const Tensor& x) {
  require_rank(x, 1, "softmax");
  if (x.size() == 0) throw ValidationError("softmax of empty vector");
  const auto xs = x.data();
  const double top = *std::max_element(xs.begin(), xs.end());
  std::vector<double> out(xs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = std::exp(xs[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  std::vector<double> probs = out;
  return g.record({xs.size()}, std::move(out), {&x},
                  [x, probs = std::move(probs)](std::span<const double> gy) {
                    double inner = 0.0;
                    for (std::size_t i = 0; i < probs.size(); ++i)
                      inner += gy[i] * probs[i];
                    std::vector<double> gx(probs.size());
                    for (std::size_t i = 0; i < probs.size(); ++i)
                      gx[i] = probs[i] * (gy[i] - inner);
                    accumulate_grad(x, gx);
                  });
}

Tensor relu(Graph& g, const Tensor& x) {
  const auto xs = x.data();
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i] > 0.0 ? xs[i] : 0.0;
  return g.record(x.shape(), std::move(out), {&x},
                  [x](std::span<const double> gy) {
                    const auto xs = x.data();
                    std::vector<double> gx(xs.size());
                    for (std::size_t i = 0; i < xs.size(); ++i)
                      gx[i] = xs[i] > 0.0 ? gy[i] : 0.0;
                    accumulate_grad(x, gx);
                  });
}

Tensor concat(Graph& g, std::span<const Tensor> parts) {
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  for (const Tensor& p : parts) {
    require_rank(p, 1, "concat");
    offsets.push_back(out.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  const std::size_t n = out.size();
  return g.record({n}, std::move(out), parts,
                  [inputs = std::move(inputs), offsets = std::move(offsets)](
                      std::span<const double> gy) {
                    for (std::size_t k = 0; k < inputs.size(); ++k) {
                      accumulate_grad(inputs[k],
                                      gy.subspan(offsets[k], inputs[k].size()));
                    }
                  });
}

Tensor concat_channels(Graph& g, std::span<const Tensor> maps) {
  if (maps.empty()) throw ValidationError("concat_channels: no inputs");
  const std::size_t rows = maps[0].dim(0);
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  for (const Tensor& m : maps) {
    require_rank(m, 2, "concat_channels");
    if (m.dim(0) != rows) {
      throw ValidationError("concat_channels: row counts differ (" +
                            std::to_string(rows) + " vs " +
                            std::to_string(m.dim(0)) + ")");
    }
    widths.push_back(m.dim(1));
    total += m.dim(1);
  }
  std::vector<double> out(rows * total);
  std::size_t col = 0;
  for (std::size_t k = 0; k < maps.size(); ++k) {
    const double* src = maps[k].data().data();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(src + i * widths[k], src + (i + 1) * widths[k],
                out.data() + i * total + col);
    col += widths[k];
  }
  std::vector<Tensor> inputs(maps.begin(), maps.end());
  return g.record(
      {rows, total}, std::move(out), maps,
      [inputs = std::move(inputs), widths = std::move(widths), rows,
       total](std::span<const double> gy) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          if (inputs[k].requires_grad()) {
            std::vector<double> gx(rows * widths[k]);
            for (std::size_t i = 0; i < rows; ++i)
              std::copy(gy.begin() + static_cast<std::ptrdiff_t>(i * total + col),
                        gy.begin() +
                            static_cast<std::ptrdiff_t>(i * total + col + widths[k]),
                        gx.begin() + static_cast<std::ptrdiff_t>(i * widths[k]));
            accumulate_grad(inputs[k], gx);
          }
          col += widths[k];
        }
      });
}

Tensor dropout(Graph& g, const Tensor& x, double rate, std::mt19937_64& rng,
               bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValidationError("dropout rate must be in [0, 1), got " +
                          std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = keep(rng) ? keep_scale : 0.0;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * mask[i];
  return g.record(x.shape(), std::move(out), {&x},
                  [x, mask = std::move(mask)](std::span<const double> gy) {
                    std::vector<double> gx(mask.size());
                    for (std::size_t i = 0; i < gx.size(); ++i)
                      gx[i] = gy[i] * mask[i];
                    accumulate_grad(x, gx);
                  });
}

Tensor cross_entropy(Graph& g, const Tensor& probs,
                     std::span<const double> one_hot) {
  require_rank(probs, 1, "cross_entropy");
  if (one_hot.size() != probs.size()) {
    throw ValidationError("cross_entropy: target length " +
                          std::to_string(one_hot.size()) + " != " +
                          std::to_string(probs.size()));
  }
  std::size_t ones = 0;
  for (double y : one_hot) {
    if (y == 1.0) {
      ++ones;
    } else if (y != 0.0) {
      throw ValidationError("cross_entropy: target is not one-hot");
    }
  }
  if (ones != 1) throw ValidationError("cross_entropy: target is not one-hot");

  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (one_hot[i] != 0.0)
      loss -= one_hot[i] * std::log(std::max(probs[i], kLogFloor));
  }
  std::vector<double> target(one_hot.begin(), one_hot.end());
  return g.record({}, {loss}, {&probs},
                  [probs, target = std::move(target)](std::span<const double> gy) {
                    std::vector<double> gp(target.size(), 0.0);
                    for (std::size_t i = 0; i < target.size(); ++i) {
                      // The clamp is flat below the floor.
                      if (target[i] != 0.0 && probs[i] > kLogFloor)
                        gp[i] = -gy[0] * target[i] / probs[i];
                    }
                    accumulate_grad(probs, gp);
                  });
}

Tensor cross_entropy(Graph& g, const Tensor& probs, std::size_t label) {
  if (label >= probs.size()) {
    throw ValidationError("cross_entropy: label " + std::to_string(label) +
                          " out of range for " + std::to_string(probs.size()) +
                          " classes");
  }
  std::vector<double> y(probs.size(), 0.0);
  y[label] = 1.0;
  return cross_entropy(g, probs, y);
}

Tensor mask_rows(Graph& g, const Tensor& x, std::size_t valid_len) {
  require_rank(x, 2, "mask_rows");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const std::size_t keep = std::min(valid_len, rows) * cols;
  if (keep == x.size()) return x;
  std::vector<double> out(x.size(), 0.0);
  std::copy(x.data().begin(), x.data().begin() + static_cast<std::ptrdiff_t>(keep),
            out.begin());
  return g.record(x.shape(), std::move(out), {&x},
                  [x, keep](std::span<const double> gy) {
                    std::vector<double> gx(x.size(), 0.0);
                    std::copy(gy.begin(),
                              gy.begin() + static_cast<std::ptrdiff_t>(keep),
                              gx.begin());
                    accumulate_grad(x, gx);
                  });
}

Tensor row_slice(Graph& g, const Tensor& x, std::size_t rows) {
  require_rank(x, 2, "row_slice");
  if (rows > x.dim(0)) {
    throw ValidationError("row_slice: " + std::to_string(rows) +
                          " rows requested from " + shape_string(x.shape()));
  }
  if (rows == x.dim(0)) return x;
  const std::size_t cols = x.dim(1);
  std::vector<double> out(x.data().begin(),
                          x.data().begin() + static_cast<std::ptrdiff_t>(rows * cols));
  return g.record({rows, cols}, std::move(out), {&x},
                  [x](std::span<const double> gy) {
                    std::vector<double> gx(x.size(), 0.0);
                    std::copy(gy.begin(), gy.end(), gx.begin());
                    accumulate_grad(x, gx);
                  });
}

Tensor gather_rows(Graph& g, const Tensor& table,
                   std::span<const std::int32_t> ids) {
  require_rank(table, 2, "gather_rows");
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  std::vector<double> out(ids.size() * width);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (ids[j] < 0 || static_cast<std::size_t>(ids[j]) >= vocab) {
      throw ValidationError("gather_rows: id " + std::to_string(ids[j]) +
                            " outside table of " + std::to_string(vocab) +
                            " rows");
    }
    const double* src = table.data().data() + static_cast<std::size_t>(ids[j]) * width;
    std::copy(src, src + width, out.data() + j * width);
  }
  std::vector<std::int32_t> idx(ids.begin(), ids.end());
  return g.record({ids.size(), width}, std::move(out), {&table},
                  [table, idx = std::move(idx), width](std::span<const double> gy) {
                    std::vector<double> gt(table.size(), 0.0);
                    for (std::size_t j = 0; j < idx.size(); ++j)
                      axpy(1.0, gy.data() + j * width,
                           gt.data() + static_cast<std::size_t>(idx[j]) * width,
                           width);
                    accumulate_grad(table, gt);
                  });
}

Tensor matvec(Graph& g, const Tensor& a, const Tensor& v) {
  require_rank(a, 2, "matvec matrix");
  require_rank(v, 1, "matvec vector");
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  if (v.dim(0) != cols) {
    throw ValidationError("matvec: vector length " + std::to_string(v.dim(0)) +
                          " != matrix columns " + std::to_string(cols));
  }
  std::vector<double> out(rows);
  for (std::size_t k = 0; k < rows; ++k)
    out[k] = dot(a.data().data() + k * cols, v.data().data(), cols);
  return g.record({rows}, std::move(out), {&a, &v},
                  [a, v, rows, cols](std::span<const double> gy) {
                    if (a.requires_grad()) {
                      std::vector<double> ga(a.size(), 0.0);
                      for (std::size_t k = 0; k < rows; ++k)
                        axpy(gy[k], v.data().data(), ga.data() + k * cols, cols);
                      accumulate_grad(a, ga);
                    }
                    if (v.requires_grad()) {
                      std::vector<double> gv(cols, 0.0);
                      for (std::size_t k = 0; k < rows; ++k)
                        axpy(gy[k], a.data().data() + k * cols, gv.data(), cols);
                      accumulate_grad(v, gv);
                    }
                  });
}

Tensor weighted_row_sum(Graph& g, const Tensor& w, const Tensor& a) {
  require_rank(w, 1, "weighted_row_sum weights");
  require_rank(a, 2, "weighted_row_sum matrix");
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  if (w.dim(0) != rows) {
    throw ValidationError("weighted_row_sum: " + std::to_string(w.dim(0)) +
                          " weights for " + std::to_string(rows) + " rows");
  }
  std::vector<double> out(cols, 0.0);
  for (std::size_t k = 0; k < rows; ++k)
    axpy(w[k], a.data().data() + k * cols, out.data(), cols);
  return g.record({cols}, std::move(out), {&w, &a},
                  [w, a, rows, cols](std::span<const double> gy) {
                    if (w.requires_grad()) {
                      std::vector<double> gw(rows);
                      for (std::size_t k = 0; k < rows; ++k)
                        gw[k] = dot(gy.data(), a.data().data() + k * cols, cols);
                      accumulate_grad(w, gw);
                    }
                    if (a.requires_grad()) {
                      std::vector<double> ga(a.size(), 0.0);
                      for (std::size_t k = 0; k < rows; ++k)
                        axpy(w[k], gy.data(), ga.data() + k * cols, cols);
                      accumulate_grad(a, ga);
                    }
                  });
}

Tensor sum(Graph& g, const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return g.record({}, {total}, {&x}, [x](std::span<const double> gy) {
    std::vector<double> gx(x.size(), gy[0]);
    accumulate_grad(x, gx);
  });
}

Tensor scale(Graph& g, const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v *= factor;
  return g.record(x.shape(), std::move(out), {&x},
                  [x, factor](std::span<const double> gy) {
                    std::vector<double> gx(gy.begin(), gy.end());
                    for (double& v : gx) v *= factor;
                    accumulate_grad(x, gx);
                  });
}

}  // namespace emorec
