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

#include <fstream>

#include <json.hpp>

#include "cfcondense/data_model.hpp"

namespace cfcondense {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string dtype_tag(DType d) { return d == DType::kFloat32 ? "float32" : "float64"; }

DType parse_dtype(const std::string& tag) {
  if (tag == "float32") return DType::kFloat32;
  if (tag == "float64") return DType::kFloat64;
  fail(ErrorCode::kConfig, "manifest: unknown dtype '" + tag + "'");
}

}  // namespace

void write_manifest(const DatasetManifest& m, const fs::path& path) {
  json j;
  j["format_version"] = m.format_version;
  j["num_classes"] = m.num_classes;
  j["class_names"] = m.class_names;
  j["dim"] = m.dim;
  j["count"] = m.count;
  j["dtype"] = dtype_tag(m.dtype);
  j["seed"] = m.seed;
  j["modalities"] = json::array();
  for (const auto& e : m.modalities) j["modalities"].push_back({{"name", e.name}, {"path", e.path}});
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failure on " + path.string());
}

DatasetManifest read_manifest(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) fail(ErrorCode::kNotFound, "no such manifest: " + path.string());
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open manifest " + path.string());
  DatasetManifest m;
  try {
    const json j = json::parse(in);
    m.format_version = j.at("format_version").get<int>();
    m.num_classes = j.at("num_classes").get<std::uint32_t>();
    m.class_names = j.value("class_names", std::vector<std::string>{});
    m.dim = j.at("dim").get<std::uint32_t>();
    m.count = j.at("count").get<std::uint64_t>();
    m.dtype = parse_dtype(j.value("dtype", std::string("float64")));
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto& e : j.at("modalities"))
      m.modalities.push_back({e.at("name").get<std::string>(), e.at("path").get<std::string>()});
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, "malformed manifest " + path.string() + ": " + e.what());
  }
  if (m.format_version != 1)
    fail(ErrorCode::kUnsupportedVersion,
         "unsupported manifest format_version " + std::to_string(m.format_version));
  return m;
}

fs::path save_dataset(const PairedDataset& dataset, const fs::path& dir, std::uint64_t seed,
                      DType dtype) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  DatasetManifest m;
  m.num_classes = dataset.num_classes();
  m.class_names = dataset.class_names();
  m.dim = static_cast<std::uint32_t>(dataset.dim());
  m.count = static_cast<std::uint64_t>(dataset.count());
  m.dtype = dtype;
  m.seed = seed;
  for (const auto& set : dataset.modalities()) {
    const std::string file = set.modality_name + ".embd";
    write_embedding_file(set, dir / file, dtype);
    m.modalities.push_back({set.modality_name, file});
  }
  const auto path = dir / "manifest.json";
  write_manifest(m, path);
  return path;
}

PairedDataset load_dataset(const fs::path& manifest_or_dir) {
  const fs::path path = fs::is_directory(manifest_or_dir) ? manifest_or_dir / "manifest.json"
                                                           : manifest_or_dir;
  const DatasetManifest m = read_manifest(path);
  require(!m.modalities.empty(), ErrorCode::kConfig, "manifest lists no modalities");
  std::vector<EmbeddingSet> sets;
  for (const auto& e : m.modalities) {
    const fs::path file = path.parent_path() / e.path;
    const EmbdHeader h = read_embedding_header(file);
    require(h.dim == m.dim && h.count == m.count && h.dtype == m.dtype, ErrorCode::kConfig,
            "header of " + file.string() + " disagrees with manifest (dim/count/dtype)");
    EmbeddingSet set = read_embedding_file(file);
    set.modality_name = e.name;
    sets.push_back(std::move(set));
  }
  return PairedDataset(std::move(sets), m.num_classes, m.class_names);
}

}  // namespace cfcondense
