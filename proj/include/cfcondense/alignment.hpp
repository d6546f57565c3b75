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

// Uni-modal, cross-modal and joint-modal alignment objectives between a real
// batch and a synthetic batch, and their weighted sum. Every function returns
// the loss together with its gradient with respect to the synthetic rows.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cfcondense/cf_engine.hpp"
#include "cfcondense/core.hpp"

namespace cfcondense {

struct LossWeights {
  double uni = 1.0;
  double cross = 0.5;
  double joint = 0.5;

  void validate() const {
    for (double w : {uni, cross, joint})
      require(std::isfinite(w) && w >= 0, ErrorCode::kConfig,
              "loss weights must be finite and non-negative");
    require(uni + cross + joint > 0, ErrorCode::kConfig, "loss weights are all zero");
  }
};

/// What to do when an interaction vector has zero norm and the cosine is
/// undefined.
enum class Degeneracy {
  kThrow,  // raise kDegenerateInteraction
  kZero,   // contribute loss 0 with zero gradient
};

/// Distance used by the uni-modal term.
enum class UniDistance { kCfd, kMmd };

/// How the cross-modal term compares interaction vectors.
enum class CrossMode {
  kCosine,          // cosine of batch-mean interaction vectors
  kCfdInteraction,  // CFD between the per-row interaction vector sets
};

struct AlignmentOptions {
  UniDistance uni_distance = UniDistance::kCfd;
  CfdWeights cfd_weights{};
  double mmd_bandwidth = 1.0;
  CrossMode cross_mode = CrossMode::kCosine;
  Degeneracy degeneracy = Degeneracy::kThrow;
};

template <typename Scalar>
using Batch = std::vector<Mat<Scalar>>;

template <typename Scalar>
struct UniLoss {
  Scalar value{0};
  std::vector<Scalar> per_modality;
  Batch<Scalar> grads;
};

/// Result of a term that couples two modalities a and v.
template <typename Scalar>
struct PairLoss {
  Scalar value{0};
  Scalar rho{1};
  Mat<Scalar> grad_a;
  Mat<Scalar> grad_v;
  bool degenerate = false;
};

template <typename Scalar>
struct LossBreakdown {
  std::vector<Scalar> uni_per_modality;
  Scalar uni{0};
  Scalar cross{0};
  Scalar joint{0};
  Scalar total{0};
  Scalar rho_cross{1};
  Scalar rho_joint{1};
  int degenerate_terms = 0;
  Batch<Scalar> grads;
};

namespace detail {

template <typename Scalar>
void check_batches(const Batch<Scalar>& real, const Batch<Scalar>& syn) {
  require(real.size() == syn.size(), ErrorCode::kModalityMismatch,
          "real and synthetic batches have different modality counts (" +
              std::to_string(real.size()) + " vs " + std::to_string(syn.size()) + ")");
  require(!real.empty(), ErrorCode::kModalityMismatch, "no modalities in batch");
  for (std::size_t m = 0; m < real.size(); ++m) {
    require(real[m].cols() == real[0].cols() && syn[m].cols() == real[0].cols(),
            ErrorCode::kDimensionMismatch, "modality dims differ within a batch");
    require(real[m].rows() == real[0].rows() && syn[m].rows() == syn[0].rows(),
            ErrorCode::kModalityMismatch, "modality row counts differ within a batch");
  }
}

template <typename DA, typename DB, typename DC, typename DD>
void check_pair(const Eigen::MatrixBase<DA>& real_a, const Eigen::MatrixBase<DB>& real_v,
                const Eigen::MatrixBase<DC>& syn_a, const Eigen::MatrixBase<DD>& syn_v,
                const char* who) {
  require(real_a.rows() == real_v.rows() && syn_a.rows() == syn_v.rows(),
          ErrorCode::kModalityMismatch, std::string(who) + ": paired batches differ in rows");
  require(real_a.cols() == real_v.cols() && syn_a.cols() == real_a.cols() &&
              syn_v.cols() == real_a.cols(),
          ErrorCode::kDimensionMismatch, std::string(who) + ": dims differ");
  require(real_a.rows() >= 1 && syn_a.rows() >= 1, ErrorCode::kInvalidArgument,
          std::string(who) + ": empty batch");
}

/// Cosine of (p, q) and its gradients. Returns false when either norm is 0.
template <typename Scalar>
bool cosine_with_grads(const Vec<Scalar>& p, const Vec<Scalar>& q, Scalar& rho,
                       Vec<Scalar>& d_p, Vec<Scalar>& d_q) {
  const Scalar np = p.norm(), nq = q.norm();
  if (!(np > 0) || !(nq > 0)) return false;
  rho = p.dot(q) / (np * nq);
  d_p = q / (np * nq) - rho * p / (np * np);
  d_q = p / (np * nq) - rho * q / (nq * nq);
  return true;
}

template <typename Scalar>
PairLoss<Scalar> degenerate_pair(Eigen::Index rows, Eigen::Index cols, Degeneracy policy,
                                 const char* who) {
  if (policy == Degeneracy::kThrow)
    fail(ErrorCode::kDegenerateInteraction, std::string(who) + ": zero-norm interaction vector");
  PairLoss<Scalar> out;
  out.value = 0;
  out.rho = 1;
  out.grad_a = Mat<Scalar>::Zero(rows, cols);
  out.grad_v = Mat<Scalar>::Zero(rows, cols);
  out.degenerate = true;
  return out;
}

}  // namespace detail

/// Row-wise Hadamard product of two paired batches.
template <typename DA, typename DB>
Mat<typename DA::Scalar> interaction_vectors(const Eigen::MatrixBase<DA>& a,
                                             const Eigen::MatrixBase<DB>& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::kDimensionMismatch,
          "interaction_vectors: shape mismatch");
  return a.cwiseProduct(b);
}

/// Sum over modalities of the uni-modal distance (CFD by default).
template <typename Scalar>
UniLoss<Scalar> uni_modal_loss(const Batch<Scalar>& real, const Batch<Scalar>& syn,
                               const FrequencyBatch<Scalar>& freqs,
                               const AlignmentOptions& opt = {}) {
  detail::check_batches(real, syn);
  UniLoss<Scalar> out;
  CompensatedSum<Scalar> total;
  for (std::size_t m = 0; m < real.size(); ++m) {
    ValueAndGrad<Scalar> vg =
        opt.uni_distance == UniDistance::kCfd
            ? cfd_value_and_grad(real[m], syn[m], freqs, opt.cfd_weights)
            : mmd_value_and_grad(real[m], syn[m], static_cast<Scalar>(opt.mmd_bandwidth));
    out.per_modality.push_back(vg.value);
    total.add(vg.value);
    out.grads.push_back(std::move(vg.grad));
  }
  out.value = total.value();
  return out;
}

/// 1 - cos(u, w) with u, w the batch means of the real and synthetic
/// interaction vectors a (.) v.
template <typename DA, typename DB, typename DC, typename DD>
PairLoss<typename DA::Scalar> cross_modal_loss(const Eigen::MatrixBase<DA>& real_a,
                                               const Eigen::MatrixBase<DB>& real_v,
                                               const Eigen::MatrixBase<DC>& syn_a,
                                               const Eigen::MatrixBase<DD>& syn_v,
                                               Degeneracy policy = Degeneracy::kThrow) {
  using Scalar = typename DA::Scalar;
  detail::check_pair(real_a, real_v, syn_a, syn_v, "cross_modal_loss");
  const Vec<Scalar> u = column_mean(interaction_vectors(real_a, real_v));
  const Vec<Scalar> w = column_mean(interaction_vectors(syn_a, syn_v));
  PairLoss<Scalar> out;
  Vec<Scalar> d_u, d_w;
  if (!detail::cosine_with_grads(u, w, out.rho, d_u, d_w))
    return detail::degenerate_pair<Scalar>(syn_a.rows(), syn_a.cols(), policy,
                                           "cross_modal_loss");
  out.value = Scalar(1) - out.rho;
  // d loss / d w = -d_w ; w = (1/M) sum_j a_j (.) v_j
  const RowVec<Scalar> g = -d_w.transpose() / static_cast<Scalar>(syn_a.rows());
  out.grad_a = syn_v.array().rowwise() * g.array();
  out.grad_v = syn_a.array().rowwise() * g.array();
  return out;
}

/// 1 - cos(p, q) with p = mean(real_a) (.) mean(syn_v) and
/// q = mean(real_v) (.) mean(syn_a).
template <typename DA, typename DB, typename DC, typename DD>
PairLoss<typename DA::Scalar> joint_modal_loss(const Eigen::MatrixBase<DA>& real_a,
                                               const Eigen::MatrixBase<DB>& real_v,
                                               const Eigen::MatrixBase<DC>& syn_a,
                                               const Eigen::MatrixBase<DD>& syn_v,
                                               Degeneracy policy = Degeneracy::kThrow) {
  using Scalar = typename DA::Scalar;
  detail::check_pair(real_a, real_v, syn_a, syn_v, "joint_modal_loss");
  const Vec<Scalar> ea = column_mean(real_a), ev = column_mean(real_v);
  const Vec<Scalar> sa = column_mean(syn_a), sv = column_mean(syn_v);
  const Vec<Scalar> p = ea.cwiseProduct(sv);
  const Vec<Scalar> q = ev.cwiseProduct(sa);
  PairLoss<Scalar> out;
  Vec<Scalar> d_p, d_q;
  if (!detail::cosine_with_grads(p, q, out.rho, d_p, d_q))
    return detail::degenerate_pair<Scalar>(syn_a.rows(), syn_a.cols(), policy,
                                           "joint_modal_loss");
  out.value = Scalar(1) - out.rho;
  const auto M = static_cast<Scalar>(syn_a.rows());
  const RowVec<Scalar> g_sa = -(d_q.cwiseProduct(ev)).transpose() / M;
  const RowVec<Scalar> g_sv = -(d_p.cwiseProduct(ea)).transpose() / M;
  out.grad_a = g_sa.replicate(syn_a.rows(), 1);
  out.grad_v = g_sv.replicate(syn_v.rows(), 1);
  return out;
}

/// Experimental cross-modal variant: CFD between the sets of real and
/// synthetic interaction vectors. `rho` is reported as 1 - value.
template <typename DA, typename DB, typename DC, typename DD>
PairLoss<typename DA::Scalar> cross_modal_cfd_loss(
    const Eigen::MatrixBase<DA>& real_a, const Eigen::MatrixBase<DB>& real_v,
    const Eigen::MatrixBase<DC>& syn_a, const Eigen::MatrixBase<DD>& syn_v,
    const FrequencyBatch<typename DA::Scalar>& freqs, CfdWeights w = {}) {
  using Scalar = typename DA::Scalar;
  detail::check_pair(real_a, real_v, syn_a, syn_v, "cross_modal_cfd_loss");
  const Mat<Scalar> syn_i = interaction_vectors(syn_a, syn_v);
  auto vg = cfd_value_and_grad(interaction_vectors(real_a, real_v), syn_i, freqs, w);
  PairLoss<Scalar> out;
  out.value = vg.value;
  out.rho = Scalar(1) - vg.value;
  out.grad_a = vg.grad.cwiseProduct(syn_v);
  out.grad_v = vg.grad.cwiseProduct(syn_a);
  return out;
}

/// lambda_uni * L_uni + lambda_cross * L_cross + lambda_joint * L_joint.
/// With more than two modalities the cross and joint terms are averaged over
/// all unordered modality pairs; with one modality they are skipped and their
/// weights must be zero.
template <typename Scalar>
LossBreakdown<Scalar> total_loss(const Batch<Scalar>& real, const Batch<Scalar>& syn,
                                 const FrequencyBatch<Scalar>& freqs, const LossWeights& weights,
                                 const AlignmentOptions& opt = {}) {
  weights.validate();
  detail::check_batches(real, syn);
  const std::size_t n_mod = real.size();
  if (n_mod < 2 && (weights.cross > 0 || weights.joint > 0))
    fail(ErrorCode::kConfig,
         std::string("single-modality data requires ") +
             (weights.cross > 0 ? "lambda_cross" : "lambda_joint") + " = 0");

  LossBreakdown<Scalar> out;
  out.grads.reserve(n_mod);
  for (const auto& s : syn) out.grads.push_back(Mat<Scalar>::Zero(s.rows(), s.cols()));

  if (weights.uni > 0) {
    UniLoss<Scalar> uni = uni_modal_loss(real, syn, freqs, opt);
    out.uni_per_modality = uni.per_modality;
    out.uni = uni.value;
    for (std::size_t m = 0; m < n_mod; ++m) out.grads[m] += Scalar(weights.uni) * uni.grads[m];
  } else {
    out.uni_per_modality.assign(n_mod, Scalar(0));
  }

  if (n_mod >= 2 && (weights.cross > 0 || weights.joint > 0)) {
    const auto pairs = static_cast<Scalar>(n_mod * (n_mod - 1) / 2);
    CompensatedSum<Scalar> cross, joint, rho_c, rho_j;
    for (std::size_t a = 0; a < n_mod; ++a) {
      for (std::size_t v = a + 1; v < n_mod; ++v) {
        if (weights.cross > 0) {
          PairLoss<Scalar> c =
              opt.cross_mode == CrossMode::kCosine
                  ? cross_modal_loss(real[a], real[v], syn[a], syn[v], opt.degeneracy)
                  : cross_modal_cfd_loss(real[a], real[v], syn[a], syn[v], freqs,
                                         opt.cfd_weights);
          cross.add(c.value);
          rho_c.add(c.rho);
          out.degenerate_terms += c.degenerate ? 1 : 0;
          const Scalar s = Scalar(weights.cross) / pairs;
          out.grads[a] += s * c.grad_a;
          out.grads[v] += s * c.grad_v;
        }
        if (weights.joint > 0) {
          PairLoss<Scalar> j = joint_modal_loss(real[a], real[v], syn[a], syn[v], opt.degeneracy);
          joint.add(j.value);
          rho_j.add(j.rho);
          out.degenerate_terms += j.degenerate ? 1 : 0;
          const Scalar s = Scalar(weights.joint) / pairs;
          out.grads[a] += s * j.grad_a;
          out.grads[v] += s * j.grad_v;
        }
      }
    }
    if (weights.cross > 0) {
      out.cross = cross.value() / pairs;
      out.rho_cross = rho_c.value() / pairs;
    }
    if (weights.joint > 0) {
      out.joint = joint.value() / pairs;
      out.rho_joint = rho_j.value() / pairs;
    }
  }
  out.total = Scalar(weights.uni) * out.uni + Scalar(weights.cross) * out.cross +
              Scalar(weights.joint) * out.joint;
  return out;
}

}  // namespace cfcondense
