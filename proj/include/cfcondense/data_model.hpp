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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfcondense/core.hpp"

namespace cfcondense {

enum class DType : std::uint8_t { kFloat32 = 0, kFloat64 = 1 };

/// N x D embeddings of a single modality, one labelled sample per row.
struct EmbeddingSet {
  std::string modality_name;
  Matrix data;
  Labels labels;

  Eigen::Index dim() const { return data.cols(); }
  Eigen::Index count() const { return data.rows(); }

  /// Throws kInvalidArgument / kNonFinite if the set is malformed.
  void validate(std::uint32_t num_classes = 0) const;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

/// Row i of every modality describes the same underlying sample.
class PairedDataset {
 public:
  PairedDataset() = default;
  /// Rejects sets whose counts, dims or label vectors disagree.
  PairedDataset(std::vector<EmbeddingSet> modalities, std::uint32_t num_classes,
                std::vector<std::string> class_names = {});

  std::size_t modality_count() const { return modalities_.size(); }
  const EmbeddingSet& modality(std::size_t m) const { return modalities_[m]; }
  const std::vector<EmbeddingSet>& modalities() const { return modalities_; }
  std::uint32_t num_classes() const { return num_classes_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const Labels& labels() const { return modalities_.front().labels; }
  Eigen::Index dim() const { return modalities_.front().dim(); }
  Eigen::Index count() const { return modalities_.front().count(); }

  /// Row indices of each class, in ascending order.
  const std::vector<std::vector<Eigen::Index>>& class_rows() const {
    return class_rows_;
  }

  /// Returns a copy with every row rescaled to unit L2 norm.
  PairedDataset l2_normalized() const;

 private:
  std::vector<EmbeddingSet> modalities_;
  std::uint32_t num_classes_ = 0;
  std::vector<std::string> class_names_;
  std::vector<std::vector<Eigen::Index>> class_rows_;
};

/// Learnable condensed set. Rows are grouped by class: rows
/// [c*dpc, (c+1)*dpc) belong to class c in every modality.
struct SyntheticSet {
  std::vector<std::string> modality_names;
  std::vector<Matrix> modalities;
  Labels labels;
  std::uint32_t num_classes = 0;
  std::uint32_t dpc = 0;

  Eigen::Index rows() const { return static_cast<Eigen::Index>(labels.size()); }
  Eigen::Index dim() const { return modalities.empty() ? 0 : modalities.front().cols(); }
  void validate() const;

  /// View of the synthetic set as a real dataset (for probes and metrics).
  PairedDataset as_dataset() const;

  friend bool operator==(const SyntheticSet&, const SyntheticSet&) = default;
};

// ---------------------------------------------------------------------------
// EMBD binary format
//
//   "EMBD" | u32 version=1 | u32 dim | u64 count | u8 dtype |
//   count*dim values (row-major) | count u32 labels
//
// All integers and floats little-endian.

inline constexpr std::uint32_t kEmbdVersion = 1;

void write_embedding_file(const EmbeddingSet& set, const std::filesystem::path& path,
                          DType dtype = DType::kFloat64);
EmbeddingSet read_embedding_file(const std::filesystem::path& path);

/// Serialize to an in-memory buffer; same bytes as write_embedding_file.
std::vector<std::uint8_t> encode_embedding(const EmbeddingSet& set,
                                           DType dtype = DType::kFloat64);
EmbeddingSet decode_embedding(const std::vector<std::uint8_t>& bytes);

struct EmbdHeader {
  std::uint32_t version = 0;
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  DType dtype = DType::kFloat64;
};
EmbdHeader read_embedding_header(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  std::string name;
  std::string path;  // relative to the manifest directory
};

struct DatasetManifest {
  int format_version = 1;
  std::vector<ManifestEntry> modalities;
  std::uint32_t num_classes = 0;
  std::vector<std::string> class_names;
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  DType dtype = DType::kFloat64;
  std::uint64_t seed = 0;
};

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Writes every modality as `<name>.embd` next to `manifest.json` in `dir`.
std::filesystem::path save_dataset(const PairedDataset& dataset,
                                   const std::filesystem::path& dir,
                                   std::uint64_t seed = 0,
                                   DType dtype = DType::kFloat64);
/// Loads a dataset from a manifest path, or a directory holding manifest.json.
/// Header fields must agree with the manifest exactly.
PairedDataset load_dataset(const std::filesystem::path& manifest_or_dir);

// ---------------------------------------------------------------------------
// Synthetic corpus

struct CorpusParams {
  std::uint32_t num_classes = 10;
  std::uint32_t per_class = 500;
  std::uint32_t dim = 16;
  std::uint32_t modality_count = 2;
  double class_separation = 2.0;
  double cross_modal_coupling = 0.8;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
};

/// Gaussian class clusters per modality with a shared per-sample latent.
///
/// For sample i of class c and modality m:
///   x = mu[m][c] + coupling * (R z_i) + (1 - coupling) * noise_scale * eps
/// with mu[m][c] = separation * (uniform random unit vector), z_i ~ N(0, I)
/// shared by all modalities of row i, R a random rotation shared across
/// modalities and eps ~ N(0, I) independent. Rows are ordered by class.
PairedDataset generate_corpus(const CorpusParams& params);

/// Same class structure (means, rotation) as generate_corpus(params) but an
/// independent draw of `per_class` samples, for held-out evaluation.
PairedDataset generate_corpus_holdout(const CorpusParams& params,
                                      std::uint32_t per_class);

}  // namespace cfcondense
