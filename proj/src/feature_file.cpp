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

#include "emorec/feature_file.hpp"

#include <fstream>

#include "binary_io.hpp"
#include "emorec/error.hpp"

namespace emorec {

namespace {
constexpr char kMagic[4] = {'E', 'M', 'F', '1'};
}

void write_feature_file(const std::string& path,
                        const std::vector<FeatureRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write feature file " + path);
  os.write(kMagic, 4);
  for (const FeatureRecord& r : records) {
    io::write_u32(os, static_cast<std::uint32_t>(r.id.size()));
    os.write(r.id.data(), static_cast<std::streamsize>(r.id.size()));
    io::write_u32(os, static_cast<std::uint32_t>(r.features.rows));
    io::write_u32(os, static_cast<std::uint32_t>(r.features.cols));
    for (double v : r.features.values) io::write_f32(os, static_cast<float>(v));
  }
  if (!os) throw ValidationError("failed writing feature file " + path);
}

std::vector<FeatureRecord> read_feature_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open feature file " + path);
  char magic[4];
  if (!io::read_exact(is, magic, 4, "feature file header") ||
      std::memcmp(magic, kMagic, 4) != 0) {
    throw CorruptFileError(path + ": bad magic (expected EMF1)");
  }
  std::vector<FeatureRecord> out;
  while (true) {
    unsigned char len_bytes[4];
    if (!io::read_exact(is, len_bytes, 4, "record id length")) break;
    const std::uint32_t id_len = static_cast<std::uint32_t>(len_bytes[0]) |
                                 (static_cast<std::uint32_t>(len_bytes[1]) << 8) |
                                 (static_cast<std::uint32_t>(len_bytes[2]) << 16) |
                                 (static_cast<std::uint32_t>(len_bytes[3]) << 24);
    FeatureRecord rec;
    rec.id.resize(id_len);
    if (id_len && !io::read_exact(is, rec.id.data(), id_len, "record id")) {
      throw CorruptFileError(path + ": truncated record id");
    }
    const std::uint32_t rows = io::read_u32(is, "record " + rec.id);
    const std::uint32_t cols = io::read_u32(is, "record " + rec.id);
    rec.features = FeatureMatrix(rows, cols);
    for (double& v : rec.features.values)
      v = static_cast<double>(io::read_f32(is, "record " + rec.id));
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace emorec
