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
#include <numeric>

#include "cfcondense/evaluator.hpp"

namespace cfcondense {
namespace {

Matrix unit_rows(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0) out.row(i) /= n;
  }
  return out;
}

double row_cosine(const Eigen::Ref<const RowVec<double>>& a,
                  const Eigen::Ref<const RowVec<double>>& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0) || !(nb > 0)) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace

double recall_at_k(const Matrix& queries, const Matrix& gallery, const Relevance& relevance,
                   std::uint32_t k) {
  require(k >= 1, ErrorCode::kInvalidArgument, "recall_at_k: k must be at least 1");
  require(queries.cols() == gallery.cols(), ErrorCode::kDimensionMismatch,
          "recall_at_k: query and gallery dims differ");
  require(relevance.rows() == queries.rows() && relevance.cols() == gallery.rows(),
          ErrorCode::kDimensionMismatch, "recall_at_k: relevance must be Q x G");
  require(queries.rows() >= 1, ErrorCode::kInvalidArgument, "recall_at_k: no queries");
  for (Eigen::Index q = 0; q < relevance.rows(); ++q)
    require(relevance.row(q).any(), ErrorCode::kInvalidRelevance,
            "recall_at_k: query " + std::to_string(q) + " has no relevant gallery item");

  // Pairwise dots rather than a matrix product: identical gallery rows must
  // score identically so ties resolve by index.
  const Matrix uq = unit_rows(queries), ug = unit_rows(gallery);
  Matrix sim(uq.rows(), ug.rows());
  for (Eigen::Index q = 0; q < uq.rows(); ++q)
    for (Eigen::Index g = 0; g < ug.rows(); ++g) sim(q, g) = uq.row(q).dot(ug.row(g));
  const auto top = std::min<Eigen::Index>(k, gallery.rows());
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(gallery.rows()));
  std::size_t hits = 0;
  for (Eigen::Index q = 0; q < sim.rows(); ++q) {
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::partial_sort(idx.begin(), idx.begin() + top, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (sim(q, a) != sim(q, b)) return sim(q, a) > sim(q, b);
      return a < b;
    });
    for (Eigen::Index r = 0; r < top; ++r) {
      if (relevance(q, idx[static_cast<std::size_t>(r)])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(queries.rows());
}

RetrievalHead RetrievalHead::fit(const Matrix& source, const Matrix& target, double ridge) {
  require(source.rows() == target.rows(), ErrorCode::kModalityMismatch,
          "retrieval head: source and target must be paired");
  Matrix x(source.rows(), source.cols() + 1);
  x << source, Matrix::Ones(source.rows(), 1);
  Matrix gram = x.transpose() * x;
  gram.diagonal().head(source.cols()).array() += ridge;
  // The bias column is lightly regularised so the system stays positive definite.
  gram(source.cols(), source.cols()) += 1e-9;
  return {gram.ldlt().solve(x.transpose() * target)};
}

Matrix RetrievalHead::apply(const Matrix& source) const {
  const Eigen::Index d = weights.rows() - 1;
  return (source * weights.topRows(d)).rowwise() + weights.row(d);
}

RecallSet paired_retrieval(const PairedDataset& train, const PairedDataset& test,
                           const std::vector<std::uint32_t>& ks) {
  require(train.modality_count() >= 2 && test.modality_count() >= 2, ErrorCode::kInvalidArgument,
          "retrieval needs two modalities");
  const Matrix& ta = train.modality(0).data;
  const Matrix& tv = train.modality(1).data;
  const Matrix& qa = test.modality(0).data;
  const Matrix& qv = test.modality(1).data;
  const auto a2v = RetrievalHead::fit(ta, tv);
  const auto v2a = RetrievalHead::fit(tv, ta);
  const Relevance rel = Relevance::Identity(test.count(), test.count());
  const Matrix qa_mapped = a2v.apply(qa);
  const Matrix qv_mapped = v2a.apply(qv);
  RecallSet out;
  out.ks = ks;
  for (auto k : ks) {
    out.a2t.push_back(recall_at_k(qa_mapped, qv, rel, k));
    out.t2a.push_back(recall_at_k(qv_mapped, qa, rel, k));
  }
  return out;
}

std::vector<double> cross_modal_consistency(const PairedDataset& real, const PairedDataset& syn,
                                            std::size_t a, std::size_t v) {
  require(real.modality_count() >= 2 && syn.modality_count() == real.modality_count(),
          ErrorCode::kModalityMismatch, "cross_modal_consistency needs matching >= 2 modalities");
  require(a < real.modality_count() && v < real.modality_count() && a != v,
          ErrorCode::kInvalidArgument, "cross_modal_consistency: bad modality indices");
  require(real.num_classes() == syn.num_classes(), ErrorCode::kInvalidArgument,
          "cross_modal_consistency: class sets differ");
  const auto mean_pair_cos = [&](const PairedDataset& d, const std::vector<Eigen::Index>& rows) {
    CompensatedSum<double> acc;
    for (auto r : rows) acc.add(row_cosine(d.modality(a).data.row(r), d.modality(v).data.row(r)));
    return acc.value() / static_cast<double>(rows.size());
  };
  std::vector<double> out;
  for (std::uint32_t c = 0; c < real.num_classes(); ++c) {
    const auto& rr = real.class_rows()[c];
    const auto& sr = syn.class_rows()[c];
    if (rr.size() < 2 || sr.size() < 2) {
      out.push_back(0.0);
      continue;
    }
    out.push_back(std::abs(mean_pair_cos(real, rr) - mean_pair_cos(syn, sr)));
  }
  return out;
}

std::vector<double> cross_modal_consistency(const PairedDataset& real, const SyntheticSet& syn,
                                            std::size_t a, std::size_t v) {
  return cross_modal_consistency(real, syn.as_dataset(), a, v);
}

}  // namespace cfcondense
