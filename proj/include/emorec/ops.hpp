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

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "emorec/tensor.hpp"

namespace emorec {

enum class PoolMode { kMax = 0, kAvg = 1, kStd = 2 };

std::string_view pool_mode_name(PoolMode mode);
PoolMode parse_pool_mode(std::string_view name);

// Smoothing term inside the square root of std pooling.
inline constexpr double kStdPoolEpsilon = 1e-5;
// Probabilities are clamped to this floor before the log in cross_entropy.
inline constexpr double kLogFloor = 1e-12;

// Convolution along the sequence axis with kernels spanning the whole feature
// axis. x is L x D, kernels F x s x D, bias F; the result is L x F.
//
//   y[i, f] = bias[f] + sum_m sum_j kernels[f, m + s/2, j] * x[i - m, j]
//
// with m running over -floor(s/2) .. floor((s-1)/2) and rows outside [0, L)
// read as zero, so the output keeps length L.
Tensor conv_full_width(Graph& g, const Tensor& x, const Tensor& kernels,
                       const Tensor& bias);

// Pools an L x F map over its first valid_len rows into a length-F vector.
// Rows at or after valid_len never contribute.
Tensor global_pool_time(Graph& g, const Tensor& x, PoolMode mode,
                        std::size_t valid_len);

// W x + b for a vector x.
Tensor affine(Graph& g, const Tensor& x, const Tensor& weight,
              const Tensor& bias);

Tensor softmax(Graph& g, const Tensor& x);
Tensor relu(Graph& g, const Tensor& x);

// Concatenates rank-1 tensors.
Tensor concat(Graph& g, std::span<const Tensor> parts);
// Concatenates L x C_k maps along the channel axis.
Tensor concat_channels(Graph& g, std::span<const Tensor> maps);

// Inverted dropout. Identity when rate == 0 or when not training.
Tensor dropout(Graph& g, const Tensor& x, double rate, std::mt19937_64& rng,
               bool training);

// -sum_i y_i log(max(p_i, kLogFloor)). `one_hot` must contain exactly one 1
// and zeros elsewhere.
Tensor cross_entropy(Graph& g, const Tensor& probs,
                     std::span<const double> one_hot);
Tensor cross_entropy(Graph& g, const Tensor& probs, std::size_t label);

// Sets rows at or after valid_len to zero.
Tensor mask_rows(Graph& g, const Tensor& x, std::size_t valid_len);
// First `rows` rows of a rank-2 tensor.
Tensor row_slice(Graph& g, const Tensor& x, std::size_t rows);
// Rows of a V x D table selected by ids; the result is ids.size() x D.
Tensor gather_rows(Graph& g, const Tensor& table,
                   std::span<const std::int32_t> ids);

// A (M x C) times v (C) -> M.
Tensor matvec(Graph& g, const Tensor& a, const Tensor& v);
// sum_k w[k] * A[k, :] for w (M) and A (M x C) -> C.
Tensor weighted_row_sum(Graph& g, const Tensor& w, const Tensor& a);

Tensor sum(Graph& g, const Tensor& x);
Tensor scale(Graph& g, const Tensor& x, double factor);

}  // namespace emorec
