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

#include "emorec/text.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "emorec/error.hpp"

namespace emorec {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_punct(text[b])) ++b;
    while (e > b && is_punct(text[e - 1])) --e;
    if (b < e) {
      std::string tok(text.substr(b, e - b));
      for (char& c : tok) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  if (tokens.size() < 2 || tokens[0] != "<pad>" || tokens[1] != "<unk>") {
    throw ValidationError("vocabulary must start with <pad> and <unk>");
  }
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) {
      throw ValidationError("duplicate vocabulary token '" + tokens[i] + "'");
    }
    v.add(tokens[i]);
  }
  return v;
}

Vocabulary Vocabulary::build(std::span<const std::string> texts) {
  Vocabulary v;
  for (const std::string& t : texts)
    for (const std::string& tok : tokenize(t)) v.add(tok);
  return v;
}

std::int32_t Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::int32_t Vocabulary::index(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnknown : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return index_.count(token) != 0;
}

EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.05, 0.05);
  std::vector<double> values(vocab_size * dim, 0.0);
  for (std::size_t i = dim; i < values.size(); ++i) values[i] = uni(rng);
  EmbeddingTable table;
  table.matrix = Tensor({vocab_size, dim}, std::move(values), true);
  return table;
}

EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               std::uint64_t seed, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embedding file " + path);
  EmbeddingTable table = random_embeddings(vocab.size(), dim, seed);
  std::span<double> rows = table.matrix.mutable_data();
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;  // blank line
    values.clear();
    std::string field;
    while (fields >> field) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": malformed number '" + field + "'");
      }
      values.push_back(v);
    }
    if (values.size() != dim) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dim) + " values after the token, got " +
                            std::to_string(values.size()));
    }
    if (!vocab.contains(token)) continue;
    const std::int32_t id = vocab.index(token);
    if (id == Vocabulary::kPadding) continue;
    std::copy(values.begin(), values.end(),
              rows.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(id) * dim));
  }
  return table;
}

TokenSequence token_ids(const std::vector<std::string>& tokens,
                        const Vocabulary& vocab, std::size_t max_tokens) {
  TokenSequence seq;
  seq.ids.assign(max_tokens, Vocabulary::kPadding);
  seq.valid_len = std::min(tokens.size(), max_tokens);
  for (std::size_t i = 0; i < seq.valid_len; ++i) seq.ids[i] = vocab.index(tokens[i]);
  return seq;
}

EmbeddedSequence embed_sequence(const std::vector<std::string>& tokens,
                                const Vocabulary& vocab,
                                const EmbeddingTable& table,
                                std::size_t max_tokens) {
  const TokenSequence seq = token_ids(tokens, vocab, max_tokens);
  EmbeddedSequence out;
  out.rows = max_tokens;
  out.dim = table.dim();
  out.valid_len = seq.valid_len;
  out.values.assign(max_tokens * out.dim, 0.0);
  const auto src = table.matrix.data();
  for (std::size_t i = 0; i < seq.valid_len; ++i) {
    const auto row = static_cast<std::size_t>(seq.ids[i]) * out.dim;
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(row),
              src.begin() + static_cast<std::ptrdiff_t>(row + out.dim),
              out.values.begin() + static_cast<std::ptrdiff_t>(i * out.dim));
  }
  return out;
}

Tensor swem_features(Graph& g, const Tensor& embeddings, std::size_t valid_len) {
  if (valid_len == 0) throw ValidationError("swem_features: empty sequence");
  const Tensor parts[] = {global_pool_time(g, embeddings, PoolMode::kMax, valid_len),
                          global_pool_time(g, embeddings, PoolMode::kAvg, valid_len)};
  return concat(g, parts);
}

}  // namespace emorec
