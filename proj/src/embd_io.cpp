/* Copyright (c) 2026 The cfcondense Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cfcondense/data_model.hpp"

namespace cfcondense {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

constexpr char kMagic[4] = {'E', 'M', 'B', 'D'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 8 + 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > buf_.size())
      fail(ErrorCode::kTruncated, std::string("EMBD payload truncated while reading ") + what);
    std::uint8_t bytes[sizeof(T)];
    std::memcpy(bytes, buf_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

std::size_t dtype_size(DType dtype) { return dtype == DType::kFloat32 ? 4 : 8; }

EmbdHeader parse_header(Reader& in, std::size_t total_size) {
  if (total_size < 4) fail(ErrorCode::kTruncated, "EMBD file shorter than its magic");
  char magic[4];
  for (char& c : magic) c = static_cast<char>(in.get<std::uint8_t>("magic"));
  if (std::memcmp(magic, kMagic, 4) != 0) fail(ErrorCode::kBadMagic, "not an EMBD file (bad magic)");
  EmbdHeader h;
  h.version = in.get<std::uint32_t>("version");
  if (h.version != kEmbdVersion)
    fail(ErrorCode::kUnsupportedVersion, "unsupported EMBD version " + std::to_string(h.version));
  h.dim = in.get<std::uint32_t>("dim");
  h.count = in.get<std::uint64_t>("count");
  const auto dtype = in.get<std::uint8_t>("dtype");
  if (dtype > 1) fail(ErrorCode::kUnsupportedVersion, "unknown EMBD dtype tag " + std::to_string(dtype));
  h.dtype = static_cast<DType>(dtype);
  return h;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec))
    fail(ErrorCode::kNotFound, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIo, "read failure on " + path.string());
  return buf;
}

}  // namespace

std::vector<std::uint8_t> encode_embedding(const EmbeddingSet& set, DType dtype) {
  set.validate();
  std::vector<std::uint8_t> out;
  const auto n = static_cast<std::size_t>(set.count());
  const auto d = static_cast<std::size_t>(set.dim());
  out.reserve(kHeaderSize + n * d * dtype_size(dtype) + 4 * n);
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint32_t>(out, kEmbdVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put<std::uint64_t>(out, n);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
  for (Eigen::Index i = 0; i < set.count(); ++i) {
    for (Eigen::Index j = 0; j < set.dim(); ++j) {
      if (dtype == DType::kFloat32) {
        put<float>(out, static_cast<float>(set.data(i, j)));
      } else {
        put<double>(out, set.data(i, j));
      }
    }
  }
  for (auto y : set.labels) put<std::uint32_t>(out, y);
  return out;
}

EmbeddingSet decode_embedding(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  const EmbdHeader h = parse_header(in, bytes.size());
  const std::size_t payload =
      h.count * h.dim * dtype_size(h.dtype) + h.count * sizeof(std::uint32_t);
  if (in.remaining() < payload)
    fail(ErrorCode::kTruncated, "EMBD payload truncated: expected " + std::to_string(payload) +
                                    " bytes, found " + std::to_string(in.remaining()));
  EmbeddingSet set;
  set.data.resize(static_cast<Eigen::Index>(h.count), static_cast<Eigen::Index>(h.dim));
  for (Eigen::Index i = 0; i < set.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < set.data.cols(); ++j) {
      set.data(i, j) = h.dtype == DType::kFloat32 ? static_cast<double>(in.get<float>("values"))
                                                  : in.get<double>("values");
    }
  }
  if (!set.data.allFinite()) fail(ErrorCode::kNonFinite, "EMBD payload contains non-finite values");
  set.labels.resize(h.count);
  for (auto& y : set.labels) y = in.get<std::uint32_t>("labels");
  return set;
}

void write_embedding_file(const EmbeddingSet& set, const std::filesystem::path& path,
                          DType dtype) {
  const auto bytes = encode_embedding(set, dtype);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failure on " + path.string());
}

EmbeddingSet read_embedding_file(const std::filesystem::path& path) {
  auto set = decode_embedding(slurp(path));
  set.modality_name = path.stem().string();
  return set;
}

EmbdHeader read_embedding_header(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  Reader in(bytes);
  return parse_header(in, bytes.size());
}

}  // namespace cfcondense
