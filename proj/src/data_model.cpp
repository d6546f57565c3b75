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

#include "cfcondense/data_model.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace cfcondense {

unsigned thread_count() {
  if (const char* env = std::getenv("CFCONDENSE_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void EmbeddingSet::validate(std::uint32_t num_classes) const {
  require(data.rows() > 0 && data.cols() > 0, ErrorCode::kInvalidArgument,
          "embedding set '" + modality_name + "' is empty");
  require(static_cast<Eigen::Index>(labels.size()) == data.rows(),
          ErrorCode::kInvalidArgument,
          "embedding set '" + modality_name + "': label count " +
              std::to_string(labels.size()) + " != row count " +
              std::to_string(data.rows()));
  require(data.allFinite(), ErrorCode::kNonFinite,
          "embedding set '" + modality_name + "' contains non-finite values");
  if (num_classes > 0) {
    for (auto y : labels)
      require(y < num_classes, ErrorCode::kInvalidArgument,
              "label " + std::to_string(y) + " out of range for " +
                  std::to_string(num_classes) + " classes");
  }
}

PairedDataset::PairedDataset(std::vector<EmbeddingSet> modalities,
                             std::uint32_t num_classes,
                             std::vector<std::string> class_names)
    : modalities_(std::move(modalities)),
      num_classes_(num_classes),
      class_names_(std::move(class_names)) {
  require(!modalities_.empty(), ErrorCode::kInvalidArgument,
          "dataset needs at least one modality");
  require(num_classes_ > 0, ErrorCode::kInvalidArgument, "num_classes must be positive");
  const auto& first = modalities_.front();
  for (const auto& m : modalities_) {
    m.validate(num_classes_);
    require(m.dim() == first.dim(), ErrorCode::kDimensionMismatch,
            "modality '" + m.modality_name + "' has dim " + std::to_string(m.dim()) +
                ", expected " + std::to_string(first.dim()));
    require(m.count() == first.count(), ErrorCode::kModalityMismatch,
            "modality '" + m.modality_name + "' has " + std::to_string(m.count()) +
                " rows, expected " + std::to_string(first.count()));
    require(m.labels == first.labels, ErrorCode::kModalityMismatch,
            "modality '" + m.modality_name + "' label vector differs; rows are not paired");
  }
  if (class_names_.empty()) {
    for (std::uint32_t c = 0; c < num_classes_; ++c)
      class_names_.push_back("class_" + std::to_string(c));
  }
  require(class_names_.size() == num_classes_, ErrorCode::kInvalidArgument,
          "class_names length differs from num_classes");
  class_rows_.assign(num_classes_, {});
  for (Eigen::Index i = 0; i < first.count(); ++i)
    class_rows_[first.labels[static_cast<std::size_t>(i)]].push_back(i);
}

PairedDataset PairedDataset::l2_normalized() const {
  auto mods = modalities_;
  for (auto& m : mods) {
    for (Eigen::Index i = 0; i < m.data.rows(); ++i) {
      const double n = m.data.row(i).norm();
      if (n > 0) m.data.row(i) /= n;
    }
  }
  return PairedDataset(std::move(mods), num_classes_, class_names_);
}

void SyntheticSet::validate() const {
  require(!modalities.empty(), ErrorCode::kInvalidArgument, "synthetic set has no modalities");
  require(modality_names.size() == modalities.size(), ErrorCode::kInvalidArgument,
          "synthetic set: modality name count mismatch");
  require(labels.size() == static_cast<std::size_t>(num_classes) * dpc,
          ErrorCode::kInvalidArgument, "synthetic set: rows != num_classes * dpc");
  for (std::size_t i = 0; i < labels.size(); ++i)
    require(labels[i] == i / dpc, ErrorCode::kInvalidArgument,
            "synthetic set: rows are not grouped by class");
  for (const auto& m : modalities) {
    require(m.rows() == rows() && m.cols() == dim(), ErrorCode::kDimensionMismatch,
            "synthetic set: modality shape mismatch");
    require(m.allFinite(), ErrorCode::kNonFinite, "synthetic set contains non-finite values");
  }
}

PairedDataset SyntheticSet::as_dataset() const {
  std::vector<EmbeddingSet> sets;
  for (std::size_t m = 0; m < modalities.size(); ++m)
    sets.push_back({modality_names[m], modalities[m], labels});
  return PairedDataset(std::move(sets), num_classes);
}

}  // namespace cfcondense
