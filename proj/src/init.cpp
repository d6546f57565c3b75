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

#include "cfcondense/condenser.hpp"
#include "cfcondense/rng.hpp"

namespace cfcondense {
namespace {

void check_class_sizes(const PairedDataset& dataset, std::uint32_t dpc) {
  require(dpc > 0, ErrorCode::kConfig, "dpc must be positive");
  for (std::uint32_t c = 0; c < dataset.num_classes(); ++c) {
    const auto n = dataset.class_rows()[c].size();
    require(n >= dpc, ErrorCode::kInsufficientData,
            "class " + std::to_string(c) + " has " + std::to_string(n) +
                " samples, fewer than dpc=" + std::to_string(dpc));
  }
}

}  // namespace

SyntheticSet gather_synthetic(const PairedDataset& dataset,
                              const std::vector<std::vector<Eigen::Index>>& rows_per_class) {
  require(rows_per_class.size() == dataset.num_classes(), ErrorCode::kInvalidArgument,
          "gather_synthetic: one row list per class required");
  const auto dpc = static_cast<std::uint32_t>(rows_per_class.front().size());
  SyntheticSet syn;
  syn.num_classes = dataset.num_classes();
  syn.dpc = dpc;
  const Eigen::Index total = static_cast<Eigen::Index>(syn.num_classes) * dpc;
  for (const auto& set : dataset.modalities()) {
    syn.modality_names.push_back(set.modality_name);
    Matrix m(total, set.dim());
    Eigen::Index out = 0;
    for (const auto& rows : rows_per_class) {
      require(rows.size() == dpc, ErrorCode::kInvalidArgument,
              "gather_synthetic: classes must contribute equal row counts");
      for (auto r : rows) m.row(out++) = set.data.row(r);
    }
    syn.modalities.push_back(std::move(m));
  }
  for (std::uint32_t c = 0; c < syn.num_classes; ++c)
    for (std::uint32_t k = 0; k < dpc; ++k) syn.labels.push_back(c);
  return syn;
}

SyntheticSet init_random(const PairedDataset& dataset, std::uint32_t dpc, std::uint64_t seed) {
  check_class_sizes(dataset, dpc);
  Rng rng = make_rng(seed, 0x1417);
  std::vector<std::vector<Eigen::Index>> picks;
  for (const auto& rows : dataset.class_rows()) {
    auto shuffled = rows;
    shuffle(shuffled.begin(), shuffled.end(), rng);
    shuffled.resize(dpc);
    picks.push_back(std::move(shuffled));
  }
  return gather_synthetic(dataset, picks);
}

std::vector<Eigen::Index> herding_select(const Matrix& points, std::uint32_t k) {
  require(k <= points.rows(), ErrorCode::kInsufficientData,
          "herding_select: k exceeds the number of points");
  const Vector mu = column_mean(points);
  Vector w = mu;
  std::vector<bool> taken(static_cast<std::size_t>(points.rows()), false);
  std::vector<Eigen::Index> order;
  order.reserve(k);
  for (std::uint32_t step = 0; step < k; ++step) {
    Eigen::Index best = -1;
    double best_score = 0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const double score = points.row(i).dot(w);
      if (best < 0 || score > best_score) {
        best = i;
        best_score = score;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    order.push_back(best);
    w += mu - points.row(best).transpose();
  }
  return order;
}

SyntheticSet init_herding(const PairedDataset& dataset, std::uint32_t dpc) {
  check_class_sizes(dataset, dpc);
  const auto n_mod = static_cast<Eigen::Index>(dataset.modality_count());
  const Eigen::Index d = dataset.dim();
  std::vector<std::vector<Eigen::Index>> picks;
  for (const auto& rows : dataset.class_rows()) {
    Matrix concat(static_cast<Eigen::Index>(rows.size()), n_mod * d);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (Eigen::Index m = 0; m < n_mod; ++m)
        concat.block(static_cast<Eigen::Index>(i), m * d, 1, d) =
            dataset.modality(static_cast<std::size_t>(m)).data.row(rows[i]);
    std::vector<Eigen::Index> chosen;
    for (auto local : herding_select(concat, dpc)) chosen.push_back(rows[static_cast<std::size_t>(local)]);
    picks.push_back(std::move(chosen));
  }
  return gather_synthetic(dataset, picks);
}

}  // namespace cfcondense
