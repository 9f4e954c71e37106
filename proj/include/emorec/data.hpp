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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emorec/feature_bundle.hpp"
#include "emorec/mfcc.hpp"
#include "emorec/tensor.hpp"
#include "emorec/text.hpp"
#include "json.hpp"

namespace emorec {

inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "angry", "happy", "sad", "neutral"};

std::vector<std::string> class_names();
// Throws ValidationError for names outside the four-class set.
int label_index(std::string_view name);

struct ManifestRecord {
  std::string id;
  std::string wav_path;
  std::string transcript;
  std::optional<std::string> asr_transcript;
  int label = -1;
  std::optional<std::string> xvector_path;

  bool operator==(const ManifestRecord&) const = default;
};

// One JSON object per line with keys id, wav, transcript, label and the
// optional asr_transcript and xvector. Relative paths are resolved against
// the manifest's directory. Duplicate ids, unknown labels, empty transcripts
// and (when check_files is set) missing files are rejected.
std::vector<ManifestRecord> load_manifest(const std::string& path, bool check_files = true);
void write_manifest(const std::string& path, std::span<const ManifestRecord> records);

struct FeatureConfig {
  MfccConfig mfcc;
  double max_audio_seconds = 7.5;
  std::size_t max_tokens = 128;
  // Kept equal to the model's x-vector dimension; not part of the JSON form.
  std::size_t xvector_dim = 512;
  bool use_asr_transcript = false;

  void validate() const;
  std::size_t max_frames() const { return max_frames_for_seconds(max_audio_seconds, mfcc); }
};

nlohmann::json feature_config_to_json(const FeatureConfig& cfg);
FeatureConfig feature_config_from_json(const nlohmann::json& j);

// Reads whitespace-separated decimals; the count must equal dim.
std::vector<double> load_xvector(const std::string& path, std::size_t dim);

// Vocabulary over the tokenized transcripts selected by the config.
Vocabulary build_vocabulary(std::span<const ManifestRecord> records, const FeatureConfig& cfg);

class FeatureExtractor {
 public:
  FeatureExtractor(FeatureConfig cfg, Vocabulary vocab);

  // Loads the audio, computes features and looks up token ids. Errors are
  // rethrown with the record id prepended.
  FeatureBundle extract(const ManifestRecord& record) const;
  // Same, from already computed (unpadded) frame features.
  FeatureBundle from_features(const ManifestRecord& record, const FeatureMatrix& features) const;

  const FeatureConfig& config() const { return cfg_; }
  const Vocabulary& vocabulary() const { return vocab_; }

 private:
  FeatureConfig cfg_;
  Vocabulary vocab_;
};

// Extracts every record, spreading records over `threads` workers (0 picks
// the hardware concurrency). Output order follows the input.
std::vector<FeatureBundle> extract_all(std::span<const ManifestRecord> records,
                                       const FeatureExtractor& extractor,
                                       std::size_t threads = 0);

struct Batch {
  std::vector<FeatureBundle> samples;

  std::size_t size() const { return samples.size(); }
  // B x frames x audio_dim.
  Tensor audio() const;
  // B x max_tokens x dim, rows looked up in the table.
  Tensor text(const Tensor& embedding) const;
  std::vector<std::size_t> audio_valid() const;
  std::vector<std::size_t> text_valid() const;
  std::vector<int> labels() const;
};

Batch build_batch(std::span<const ManifestRecord> records, const FeatureExtractor& extractor,
                  std::span<const std::size_t> indices);
Batch build_batch(std::span<const FeatureBundle> bundles, std::span<const std::size_t> indices);

struct SynthConfig {
  std::size_t n_per_class = 8;
  std::uint64_t seed = 0;
  double seconds = 1.0;
  std::size_t xvector_dim = 512;
  std::size_t embedding_dim = kEmbeddingDim;
  double noise_level = 0.05;
};

// Frequency band (Hz) carrying the audio cue of a class.
std::pair<double, double> synth_band(int label);
// Keywords carrying the text cue of a class.
const std::vector<std::string>& synth_keywords(int label);

// Writes wav/, xvectors/, embeddings.txt and manifest.jsonl under out_dir and
// returns the records as load_manifest would. The manifest stores paths
// relative to out_dir. Identical seeds give byte-identical output.
std::vector<ManifestRecord> synth_dataset(const std::string& out_dir, const SynthConfig& cfg);

}  // namespace emorec
