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

#include "emorec/data.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "emorec/error.hpp"
#include "emorec/wav.hpp"

namespace fs = std::filesystem;

namespace emorec {

std::vector<std::string> class_names() {
  return {kClassNames.begin(), kClassNames.end()};
}

int label_index(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i)
    if (kClassNames[i] == name) return static_cast<int>(i);
  throw ValidationError("unknown label '" + std::string(name) +
                        "' (expected angry, happy, sad or neutral)");
}

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path.string() : (base / path).lexically_normal().string();
}

std::string required_string(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  if (!j.at(key).is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key,
                                           const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

const std::string& transcript_for(const ManifestRecord& r, const FeatureConfig& cfg) {
  if (cfg.use_asr_transcript) {
    if (!r.asr_transcript) throw ValidationError("record " + r.id + " has no asr_transcript");
    return *r.asr_transcript;
  }
  return r.transcript;
}

}  // namespace

std::vector<ManifestRecord> load_manifest(const std::string& path, bool check_files) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  static const std::set<std::string> known = {"id",    "wav",           "transcript",
                                              "label", "asr_transcript", "xvector"};
  std::vector<ManifestRecord> records;
  std::unordered_set<std::string> seen;
  std::vector<std::string> missing;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items())
      if (!known.count(key)) throw ValidationError(where + ": unknown field '" + key + "'");

    ManifestRecord r;
    r.id = required_string(j, "id", where);
    const std::string rec = where + " (record " + r.id + ")";
    if (r.id.empty()) throw ValidationError(where + ": empty id");
    if (!seen.insert(r.id).second) throw ValidationError(rec + ": duplicate id");
    r.wav_path = resolve(base, required_string(j, "wav", rec));
    r.transcript = required_string(j, "transcript", rec);
    if (tokenize(r.transcript).empty()) {
      throw ValidationError(rec + ": transcript has no tokens");
    }
    r.asr_transcript = optional_string(j, "asr_transcript", rec);
    const std::string label = required_string(j, "label", rec);
    try {
      r.label = label_index(label);
    } catch (const ValidationError& e) {
      throw ValidationError(rec + ": " + e.what());
    }
    if (auto xv = optional_string(j, "xvector", rec)) r.xvector_path = resolve(base, *xv);

    if (check_files) {
      if (!fs::exists(r.wav_path)) missing.push_back("record " + r.id + ": missing wav " + r.wav_path);
      if (r.xvector_path && !fs::exists(*r.xvector_path))
        missing.push_back("record " + r.id + ": missing xvector " + *r.xvector_path);
    }
    records.push_back(std::move(r));
  }
  if (!missing.empty()) {
    std::string msg = path + ": " + std::to_string(missing.size()) + " missing file(s)";
    for (const std::string& m : missing) msg += "\n  " + m;
    throw ValidationError(msg);
  }
  if (records.empty()) throw ValidationError("manifest " + path + " has no records");
  return records;
}

void write_manifest(const std::string& path, std::span<const ManifestRecord> records) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write manifest " + path);
  for (const ManifestRecord& r : records) {
    if (r.label < 0 || static_cast<std::size_t>(r.label) >= kNumClasses) {
      throw ValidationError("record " + r.id + " has no valid label");
    }
    nlohmann::json j = {{"id", r.id},
                        {"wav", r.wav_path},
                        {"transcript", r.transcript},
                        {"label", std::string(kClassNames[static_cast<std::size_t>(r.label)])}};
    if (r.asr_transcript) j["asr_transcript"] = *r.asr_transcript;
    if (r.xvector_path) j["xvector"] = *r.xvector_path;
    os << j.dump() << '\n';
  }
  if (!os) throw ValidationError("failed writing manifest " + path);
}

void FeatureConfig::validate() const {
  mfcc.validate();
  if (!(max_audio_seconds > 0.0) || max_frames() < 1) {
    throw ValidationError("max_audio_seconds must allow at least one frame");
  }
  if (max_tokens < 1) throw ValidationError("max_tokens must be >= 1");
  if (xvector_dim < 1) throw ValidationError("xvector_dim must be >= 1");
}

nlohmann::json feature_config_to_json(const FeatureConfig& cfg) {
  return {{"n_mfcc", cfg.mfcc.n_mfcc},
          {"frame_length", cfg.mfcc.frame_length},
          {"hop_length", cfg.mfcc.hop_length},
          {"fft_size", cfg.mfcc.fft_size},
          {"n_mels", cfg.mfcc.n_mels},
          {"fmin", cfg.mfcc.fmin},
          {"fmax", cfg.mfcc.fmax},
          {"delta_window", cfg.mfcc.delta_window},
          {"max_audio_seconds", cfg.max_audio_seconds},
          {"max_tokens", cfg.max_tokens},
          {"use_asr_transcript", cfg.use_asr_transcript}};
}

FeatureConfig feature_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "n_mfcc",       "frame_length", "hop_length",        "fft_size",
      "n_mels",       "fmin",         "fmax",              "delta_window",
      "max_audio_seconds", "max_tokens", "use_asr_transcript"};
  if (!j.is_object()) throw ValidationError("feature config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ValidationError("unknown feature config key '" + key + "'");
  FeatureConfig cfg;
  try {
    const auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("n_mfcc", cfg.mfcc.n_mfcc);
    get("frame_length", cfg.mfcc.frame_length);
    get("hop_length", cfg.mfcc.hop_length);
    get("fft_size", cfg.mfcc.fft_size);
    get("n_mels", cfg.mfcc.n_mels);
    get("fmin", cfg.mfcc.fmin);
    get("fmax", cfg.mfcc.fmax);
    get("delta_window", cfg.mfcc.delta_window);
    get("max_audio_seconds", cfg.max_audio_seconds);
    get("max_tokens", cfg.max_tokens);
    get("use_asr_transcript", cfg.use_asr_transcript);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("feature config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<double> load_xvector(const std::string& path, std::size_t dim) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open x-vector " + path);
  std::vector<double> v;
  std::string word;
  while (is >> word) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(word, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != word.size() || !std::isfinite(x)) {
      throw ValidationError("x-vector " + path + ": bad value '" + word + "'");
    }
    v.push_back(x);
  }
  if (v.size() != dim) {
    throw ValidationError("x-vector " + path + " has " + std::to_string(v.size()) +
                          " values, expected " + std::to_string(dim));
  }
  return v;
}

Vocabulary build_vocabulary(std::span<const ManifestRecord> records, const FeatureConfig& cfg) {
  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (const ManifestRecord& r : records) texts.push_back(transcript_for(r, cfg));
  return Vocabulary::build(texts);
}

FeatureExtractor::FeatureExtractor(FeatureConfig cfg, Vocabulary vocab)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)) {
  cfg_.validate();
}

FeatureBundle FeatureExtractor::from_features(const ManifestRecord& record,
                                              const FeatureMatrix& features) const {
  try {
    if (features.cols != cfg_.mfcc.feature_dim()) {
      throw ValidationError("features have " + std::to_string(features.cols) +
                            " columns, expected " + std::to_string(cfg_.mfcc.feature_dim()));
    }
    if (features.rows == 0) throw ValidationError("audio is shorter than one frame");
    FeatureBundle b;
    b.id = record.id;
    b.label = record.label;
    const PaddedFeatures padded = pad_or_truncate_audio(features, cfg_.max_frames());
    b.audio_frames = padded.matrix.rows;
    b.audio_dim = padded.matrix.cols;
    b.audio_valid = padded.valid_len;
    b.mfcc.assign(padded.matrix.values.begin(), padded.matrix.values.end());

    const TokenSequence seq =
        token_ids(tokenize(transcript_for(record, cfg_)), vocab_, cfg_.max_tokens);
    if (seq.valid_len == 0) throw ValidationError("transcript has no tokens");
    b.tokens = seq.ids;
    b.text_valid = seq.valid_len;
    if (record.xvector_path) b.xvector = load_xvector(*record.xvector_path, cfg_.xvector_dim);
    return b;
  } catch (const NumericError& e) {
    throw NumericError("record " + record.id + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("record " + record.id + ": " + e.what());
  }
}

FeatureBundle FeatureExtractor::extract(const ManifestRecord& record) const {
  FeatureMatrix features;
  try {
    features = compute_features(load_wav(record.wav_path), cfg_.mfcc);
  } catch (const NumericError& e) {
    throw NumericError("record " + record.id + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("record " + record.id + ": " + e.what());
  }
  return from_features(record, features);
}

std::vector<FeatureBundle> extract_all(std::span<const ManifestRecord> records,
                                       const FeatureExtractor& extractor,
                                       std::size_t threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(records.size(), 1));
  std::vector<FeatureBundle> out(records.size());
  std::vector<std::exception_ptr> errors(records.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        out[i] = extractor.extract(records[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  // Report the first failing record in manifest order.
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Tensor Batch::audio() const {
  if (samples.empty()) throw ValidationError("empty batch");
  const std::size_t n = samples[0].audio_frames, d = samples[0].audio_dim;
  std::vector<double> data;
  data.reserve(samples.size() * n * d);
  for (const FeatureBundle& b : samples) {
    if (b.audio_frames != n || b.audio_dim != d) {
      throw ValidationError("record " + b.id + " has a different audio shape");
    }
    data.insert(data.end(), b.mfcc.begin(), b.mfcc.end());
  }
  return Tensor({samples.size(), n, d}, std::move(data));
}

Tensor Batch::text(const Tensor& embedding) const {
  if (samples.empty()) throw ValidationError("empty batch");
  const std::size_t m = samples[0].tokens.size(), d = embedding.dim(1);
  const std::size_t vocab = embedding.dim(0);
  std::vector<double> data;
  data.reserve(samples.size() * m * d);
  const auto table = embedding.data();
  for (const FeatureBundle& b : samples) {
    if (b.tokens.size() != m) throw ValidationError("record " + b.id + " has a different token count");
    for (std::int32_t id : b.tokens) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
        throw ValidationError("record " + b.id + ": token id " + std::to_string(id) +
                              " outside the embedding table");
      }
      const auto row = table.subspan(static_cast<std::size_t>(id) * d, d);
      data.insert(data.end(), row.begin(), row.end());
    }
  }
  return Tensor({samples.size(), m, d}, std::move(data));
}

std::vector<std::size_t> Batch::audio_valid() const {
  std::vector<std::size_t> v;
  for (const FeatureBundle& b : samples) v.push_back(b.audio_valid);
  return v;
}

std::vector<std::size_t> Batch::text_valid() const {
  std::vector<std::size_t> v;
  for (const FeatureBundle& b : samples) v.push_back(b.text_valid);
  return v;
}

std::vector<int> Batch::labels() const {
  std::vector<int> v;
  for (const FeatureBundle& b : samples) v.push_back(b.label);
  return v;
}

Batch build_batch(std::span<const ManifestRecord> records, const FeatureExtractor& extractor,
                  std::span<const std::size_t> indices) {
  Batch batch;
  for (std::size_t i : indices) {
    if (i >= records.size()) throw ValidationError("batch index " + std::to_string(i) + " out of range");
    batch.samples.push_back(extractor.extract(records[i]));
  }
  return batch;
}

Batch build_batch(std::span<const FeatureBundle> bundles, std::span<const std::size_t> indices) {
  Batch batch;
  for (std::size_t i : indices) {
    if (i >= bundles.size()) throw ValidationError("batch index " + std::to_string(i) + " out of range");
    batch.samples.push_back(bundles[i]);
  }
  return batch;
}

// Synthetic corpus ---------------------------------------------------------

std::pair<double, double> synth_band(int label) {
  static constexpr std::array<std::pair<double, double>, kNumClasses> bands = {
      {{250.0, 450.0}, {700.0, 1100.0}, {1600.0, 2200.0}, {3000.0, 3800.0}}};
  if (label < 0 || static_cast<std::size_t>(label) >= kNumClasses) {
    throw ValidationError("synth_band: bad label " + std::to_string(label));
  }
  return bands[static_cast<std::size_t>(label)];
}

const std::vector<std::string>& synth_keywords(int label) {
  static const std::array<std::vector<std::string>, kNumClasses> words = {{
      {"furious", "outrageous", "hate", "unacceptable", "shouting", "enraged"},
      {"wonderful", "delighted", "great", "lovely", "excited", "fantastic"},
      {"miserable", "lonely", "crying", "lost", "grief", "heartbroken"},
      {"okay", "schedule", "tuesday", "report", "usual", "normal"},
  }};
  if (label < 0 || static_cast<std::size_t>(label) >= kNumClasses) {
    throw ValidationError("synth_keywords: bad label " + std::to_string(label));
  }
  return words[static_cast<std::size_t>(label)];
}

namespace {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {"the", "i",    "you",  "it",   "was", "and",
                                                 "that", "so",  "just", "really", "we", "then"};
  return words;
}

std::string fixed(double v) {
  std::ostringstream os;
  os << std::setprecision(9) << v;
  return os.str();
}

}  // namespace

std::vector<ManifestRecord> synth_dataset(const std::string& out_dir, const SynthConfig& cfg) {
  if (cfg.n_per_class < 1) throw ValidationError("n_per_class must be >= 1");
  if (!(cfg.seconds > 0.0)) throw ValidationError("seconds must be > 0");
  const fs::path root(out_dir);
  fs::create_directories(root / "wav");
  fs::create_directories(root / "xvectors");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // A handful of synthetic speakers, shared across classes.
  constexpr std::size_t kSpeakers = 5;
  std::vector<std::vector<double>> speakers(kSpeakers, std::vector<double>(cfg.xvector_dim));
  for (auto& s : speakers)
    for (double& v : s) v = gauss(rng);

  const std::size_t n_samples = static_cast<std::size_t>(std::llround(cfg.seconds * kSampleRate));
  std::vector<ManifestRecord> manifest;
  std::vector<ManifestRecord> resolved;
  for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
    for (int label = 0; label < static_cast<int>(kNumClasses); ++label) {
      std::ostringstream id;
      id << kClassNames[static_cast<std::size_t>(label)] << '_' << std::setw(4)
         << std::setfill('0') << i;
      ManifestRecord r;
      r.id = id.str();
      r.label = label;

      const auto [lo, hi] = synth_band(label);
      WaveformBuffer wave;
      wave.samples.assign(n_samples, 0.0f);
      std::vector<double> acc(n_samples, 0.0);
      for (int k = 0; k < 3; ++k) {
        const double freq = lo + (hi - lo) * unit(rng);
        const double amp = 0.15 + 0.1 * unit(rng);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        for (std::size_t t = 0; t < n_samples; ++t) {
          acc[t] += amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(t) /
                                       kSampleRate + phase);
        }
      }
      for (std::size_t t = 0; t < n_samples; ++t) {
        const double v = acc[t] + cfg.noise_level * gauss(rng);
        wave.samples[t] = static_cast<float>(std::clamp(v, -1.0, 1.0));
      }
      const std::string wav_rel = "wav/" + r.id + ".wav";
      write_wav((root / wav_rel).string(), wave);

      const auto& keys = synth_keywords(label);
      const auto& fill = filler_words();
      std::vector<std::string> words;
      const std::size_t n_keys = 2 + static_cast<std::size_t>(unit(rng) * 3);
      const std::size_t n_fill = 2 + static_cast<std::size_t>(unit(rng) * 5);
      for (std::size_t k = 0; k < n_keys; ++k)
        words.push_back(keys[static_cast<std::size_t>(unit(rng) * keys.size())]);
      for (std::size_t k = 0; k < n_fill; ++k)
        words.push_back(fill[static_cast<std::size_t>(unit(rng) * fill.size())]);
      std::shuffle(words.begin(), words.end(), rng);
      for (std::size_t k = 0; k < words.size(); ++k) r.transcript += (k ? " " : "") + words[k];
      r.asr_transcript = r.transcript;

      const std::string xv_rel = "xvectors/" + r.id + ".txt";
      {
        const auto& spk = speakers[static_cast<std::size_t>(unit(rng) * kSpeakers)];
        std::ofstream os(root / xv_rel);
        for (std::size_t k = 0; k < cfg.xvector_dim; ++k)
          os << (k ? " " : "") << fixed(spk[k] + 0.1 * gauss(rng));
        os << '\n';
        if (!os) throw ValidationError("cannot write " + (root / xv_rel).string());
      }

      r.wav_path = wav_rel;
      r.xvector_path = xv_rel;
      manifest.push_back(r);
      r.wav_path = (root / wav_rel).lexically_normal().string();
      r.xvector_path = (root / xv_rel).lexically_normal().string();
      resolved.push_back(std::move(r));
    }
  }
  write_manifest((root / "manifest.jsonl").string(), manifest);

  // Word vectors for every token of the corpus.
  std::vector<std::string> vocab;
  for (int label = 0; label < static_cast<int>(kNumClasses); ++label)
    for (const std::string& w : synth_keywords(label)) vocab.push_back(w);
  for (const std::string& w : filler_words()) vocab.push_back(w);
  std::ofstream emb(root / "embeddings.txt");
  for (const std::string& w : vocab) {
    emb << w;
    for (std::size_t k = 0; k < cfg.embedding_dim; ++k) emb << ' ' << fixed(0.3 * gauss(rng));
    emb << '\n';
  }
  if (!emb) throw ValidationError("cannot write embeddings under " + out_dir);
  return resolved;
}

}  // namespace emorec
