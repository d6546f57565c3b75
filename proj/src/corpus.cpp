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
#include "cfcondense/rng.hpp"

namespace cfcondense {
namespace {

enum Stream : std::uint64_t { kStructure = 1, kTrainSamples = 2, kHoldoutSamples = 3 };

struct CorpusStructure {
  std::vector<Matrix> means;  // per modality, C x D
  Matrix rotation;            // D x D orthogonal
};

CorpusStructure draw_structure(const CorpusParams& p) {
  Rng rng = make_rng(p.seed, kStructure);
  CorpusStructure s;
  for (std::uint32_t m = 0; m < p.modality_count; ++m) {
    Matrix mu = gaussian_matrix<double>(p.num_classes, p.dim, 1.0, rng);
    for (Eigen::Index c = 0; c < mu.rows(); ++c) mu.row(c) *= p.class_separation / mu.row(c).norm();
    s.means.push_back(std::move(mu));
  }
  const Matrix g = gaussian_matrix<double>(p.dim, p.dim, 1.0, rng);
  s.rotation = Eigen::HouseholderQR<Matrix>(g).householderQ();
  return s;
}

PairedDataset draw_samples(const CorpusParams& p, const CorpusStructure& s,
                           std::uint32_t per_class, std::uint64_t stream) {
  require(p.num_classes > 0 && per_class > 0 && p.dim > 0 && p.modality_count > 0,
          ErrorCode::kInvalidArgument, "corpus: all counts must be positive");
  require(p.cross_modal_coupling >= 0.0 && p.cross_modal_coupling <= 1.0,
          ErrorCode::kInvalidArgument, "corpus: coupling must lie in [0, 1]");
  Rng rng = make_rng(p.seed, stream);
  const Eigen::Index n = static_cast<Eigen::Index>(p.num_classes) * per_class;
  const Matrix latent = gaussian_matrix<double>(n, p.dim, 1.0, rng) * s.rotation.transpose();
  Labels labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i / per_class);

  const double a = p.cross_modal_coupling;
  std::vector<EmbeddingSet> sets;
  for (std::uint32_t m = 0; m < p.modality_count; ++m) {
    const Matrix noise = gaussian_matrix<double>(n, p.dim, p.noise_scale, rng);
    EmbeddingSet set;
    set.modality_name = "m" + std::to_string(m);
    set.data = a * latent + (1.0 - a) * noise;
    for (Eigen::Index i = 0; i < n; ++i) set.data.row(i) += s.means[m].row(labels[static_cast<std::size_t>(i)]);
    set.labels = labels;
    sets.push_back(std::move(set));
  }
  return PairedDataset(std::move(sets), p.num_classes);
}

}  // namespace

PairedDataset generate_corpus(const CorpusParams& params) {
  return draw_samples(params, draw_structure(params), params.per_class, kTrainSamples);
}

PairedDataset generate_corpus_holdout(const CorpusParams& params, std::uint32_t per_class) {
  return draw_samples(params, draw_structure(params), per_class, kHoldoutSamples);
}

}  // namespace cfcondense
