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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emorec/ops.hpp"
#include "emorec/tensor.hpp"

namespace emorec {

inline constexpr std::size_t kEmbeddingDim = 300;

// Lowercases ASCII letters, splits on whitespace and strips leading and
// trailing punctuation from each token. Apostrophes inside a token survive.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr std::int32_t kPadding = 0;
  static constexpr std::int32_t kUnknown = 1;

  Vocabulary();
  // Builds from a token list whose first two entries are the reserved
  // padding and unknown symbols (as returned by tokens()).
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);
  // Every distinct token of the given texts, in order of first appearance.
  static Vocabulary build(std::span<const std::string> texts);

  std::int32_t add(const std::string& token);
  std::int32_t index(const std::string& token) const;
  bool contains(const std::string& token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// V x dim word vectors; row 0 is the padding vector and stays zero.
struct EmbeddingTable {
  Tensor matrix;
  bool trainable = true;

  std::size_t vocab_size() const { return matrix.dim(0); }
  std::size_t dim() const { return matrix.dim(1); }
};

// Every row drawn from uniform(-0.05, 0.05) except the zero padding row.
EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim,
                                 std::uint64_t seed);

// Reads "token v_1 ... v_dim" lines. Rows of vocabulary tokens found in the
// file are copied; the others keep their random initialization.
EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               std::uint64_t seed,
                               std::size_t dim = kEmbeddingDim);

struct TokenSequence {
  std::vector<std::int32_t> ids;  // padded with Vocabulary::kPadding
  std::size_t valid_len = 0;
};

TokenSequence token_ids(const std::vector<std::string>& tokens,
                        const Vocabulary& vocab, std::size_t max_tokens);

struct EmbeddedSequence {
  std::vector<double> values;  // max_tokens x dim
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::size_t valid_len = 0;
};

// Looks up embedding rows, zero-padding or truncating to max_tokens.
EmbeddedSequence embed_sequence(const std::vector<std::string>& tokens,
                                const Vocabulary& vocab,
                                const EmbeddingTable& table,
                                std::size_t max_tokens = 128);

// Max-pooled and mean-pooled word vectors over the valid rows, concatenated.
Tensor swem_features(Graph& g, const Tensor& embeddings, std::size_t valid_len);

}  // namespace emorec
