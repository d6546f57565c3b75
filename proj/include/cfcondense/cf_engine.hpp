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

// Empirical characteristic functions, the characteristic function
// discrepancy (CFD) and the Gaussian-kernel MMD, each with analytic
// gradients with respect to the second ("synthetic") sample set.
//
// Sample sets are matrices with one point per row. All functions are pure
// and templated on the scalar type of their Eigen arguments.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "cfcondense/core.hpp"
#include "cfcondense/rng.hpp"

namespace cfcondense {

/// K frequency vectors t_k (rows of `freqs`) drawn from N(0, sigma^2 I).
template <typename Scalar = double>
struct FrequencyBatch {
  Mat<Scalar> freqs;
  Scalar sigma{1};

  Eigen::Index count() const { return freqs.rows(); }
  Eigen::Index dim() const { return freqs.cols(); }
};

template <typename Scalar = double>
FrequencyBatch<Scalar> sample_frequencies(Eigen::Index dim, Eigen::Index count, Scalar sigma,
                                          Rng& rng) {
  require(count >= 1 && dim >= 1, ErrorCode::kInvalidArgument,
          "sample_frequencies: count and dim must be positive");
  require(sigma > 0 && std::isfinite(sigma), ErrorCode::kInvalidArgument,
          "sample_frequencies: sigma must be positive and finite");
  return {gaussian_matrix<Scalar>(count, dim, sigma, rng), sigma};
}

template <typename Scalar = double>
FrequencyBatch<Scalar> sample_frequencies(Eigen::Index dim, Eigen::Index count, Scalar sigma,
                                          std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_frequencies<Scalar>(dim, count, sigma, rng);
}

/// Monte-Carlo characteristic function evaluated at each frequency of a batch.
template <typename Scalar = double>
struct EmpiricalCF {
  Vec<Scalar> re;
  Vec<Scalar> im;

  Eigen::Index size() const { return re.size(); }
  Vec<Scalar> amplitude() const {
    Vec<Scalar> a(re.size());
    for (Eigen::Index k = 0; k < re.size(); ++k) a(k) = std::hypot(re(k), im(k));
    return a;
  }
  Vec<Scalar> phase() const {
    Vec<Scalar> a(re.size());
    for (Eigen::Index k = 0; k < re.size(); ++k) a(k) = std::atan2(im(k), re(k));
    return a;
  }
};

namespace detail {

template <typename D, typename Scalar>
void check_dims(const Eigen::MatrixBase<D>& points, const FrequencyBatch<Scalar>& f,
                const char* who) {
  require(points.cols() == f.dim(), ErrorCode::kDimensionMismatch,
          std::string(who) + ": point dim " + std::to_string(points.cols()) +
              " != frequency dim " + std::to_string(f.dim()));
  require(points.rows() >= 1, ErrorCode::kInvalidArgument,
          std::string(who) + ": sample set is empty");
}

/// Phases t_k . z_n laid out N x K.
template <typename D, typename Scalar>
Mat<Scalar> phases(const Eigen::MatrixBase<D>& points, const FrequencyBatch<Scalar>& f) {
  return points * f.freqs.transpose();
}

template <typename Scalar>
void cos_sin(const Mat<Scalar>& theta, Mat<Scalar>& c, Mat<Scalar>& s) {
  c.resize(theta.rows(), theta.cols());
  s.resize(theta.rows(), theta.cols());
  const Scalar* in = theta.data();
  Scalar* co = c.data();
  Scalar* si = s.data();
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
#if defined(__GLIBC__)
    if constexpr (std::is_same_v<Scalar, double>) {
      ::sincos(in[i], &si[i], &co[i]);
      continue;
    }
#endif
    co[i] = std::cos(in[i]);
    si[i] = std::sin(in[i]);
  }
}

}  // namespace detail

/// Phi(t_k) = (1/N) sum_n exp(i t_k . z_n).
template <typename Derived>
EmpiricalCF<typename Derived::Scalar> empirical_cf(
    const Eigen::MatrixBase<Derived>& points,
    const FrequencyBatch<typename Derived::Scalar>& freqs) {
  using Scalar = typename Derived::Scalar;
  detail::check_dims(points, freqs, "empirical_cf");
  const Mat<Scalar> theta = detail::phases(points, freqs);
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(points.rows());
  Mat<Scalar> cos_t, sin_t;
  detail::cos_sin(theta, cos_t, sin_t);
  EmpiricalCF<Scalar> cf{Vec<Scalar>(freqs.count()), Vec<Scalar>(freqs.count())};
  for (Eigen::Index k = 0; k < theta.cols(); ++k) {
    cf.re(k) = compensated_sum(cos_t.col(k)) * inv_n;
    cf.im(k) = compensated_sum(sin_t.col(k)) * inv_n;
  }
  return cf;
}

/// Weights of the amplitude and phase parts of the discrepancy. With
/// alpha == beta == 1 the per-frequency term equals |Phi_x - Phi_y|^2.
struct CfdWeights {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Per-frequency discrepancy
///   alpha (|Phi_x| - |Phi_y|)^2 + beta 2 |Phi_x| |Phi_y| (1 - cos(a_x - a_y)).
template <typename Scalar>
Vec<Scalar> cfd_terms(const EmpiricalCF<Scalar>& x, const EmpiricalCF<Scalar>& y,
                      CfdWeights w = {}) {
  require(x.size() == y.size(), ErrorCode::kDimensionMismatch,
          "cfd_terms: characteristic functions evaluated on different batches");
  const Vec<Scalar> ax = x.amplitude(), ay = y.amplitude();
  const Vec<Scalar> px = x.phase(), py = y.phase();
  Vec<Scalar> out(x.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    const Scalar amp = ax(k) - ay(k);
    // 1 - cos(d) written as 2 sin^2(d / 2) to avoid cancellation for small d.
    const Scalar half = std::sin((px(k) - py(k)) / Scalar(2));
    out(k) = Scalar(w.alpha) * amp * amp +
             Scalar(w.beta) * Scalar(4) * ax(k) * ay(k) * half * half;
  }
  return out;
}

template <typename DR, typename DS>
typename DR::Scalar cfd(const Eigen::MatrixBase<DR>& real, const Eigen::MatrixBase<DS>& syn,
                        const FrequencyBatch<typename DR::Scalar>& freqs, CfdWeights w = {}) {
  using Scalar = typename DR::Scalar;
  require(real.cols() == syn.cols(), ErrorCode::kDimensionMismatch,
          "cfd: real and synthetic dims differ");
  const auto terms = cfd_terms(empirical_cf(real, freqs), empirical_cf(syn, freqs), w);
  return compensated_sum(terms) / static_cast<Scalar>(terms.size());
}

template <typename Scalar>
struct ValueAndGrad {
  Scalar value{0};
  Mat<Scalar> grad;
};

/// cfd and its gradient with respect to every coordinate of `syn`.
template <typename DR, typename DS>
ValueAndGrad<typename DR::Scalar> cfd_value_and_grad(
    const Eigen::MatrixBase<DR>& real, const Eigen::MatrixBase<DS>& syn,
    const FrequencyBatch<typename DR::Scalar>& freqs, CfdWeights w = {}) {
  using Scalar = typename DR::Scalar;
  require(real.cols() == syn.cols(), ErrorCode::kDimensionMismatch,
          "cfd_grad: real and synthetic dims differ");
  detail::check_dims(syn, freqs, "cfd_grad");
  const auto cx = empirical_cf(real, freqs);
  const Mat<Scalar> theta = detail::phases(syn, freqs);
  const Scalar inv_m = Scalar(1) / static_cast<Scalar>(syn.rows());
  EmpiricalCF<Scalar> cy{Vec<Scalar>(freqs.count()), Vec<Scalar>(freqs.count())};
  Mat<Scalar> cos_t, sin_t;
  detail::cos_sin(theta, cos_t, sin_t);
  for (Eigen::Index k = 0; k < theta.cols(); ++k) {
    cy.re(k) = compensated_sum(cos_t.col(k)) * inv_m;
    cy.im(k) = compensated_sum(sin_t.col(k)) * inv_m;
  }
  const Vec<Scalar> terms = cfd_terms(cx, cy, w);
  const auto K = static_cast<Scalar>(freqs.count());

  // d term_k / d(Re Phi_y, Im Phi_y)
  RowVec<Scalar> gx(freqs.count()), gy(freqs.count());
  const bool plain = w.alpha == 1.0 && w.beta == 1.0;
  for (Eigen::Index k = 0; k < freqs.count(); ++k) {
    const Scalar x = cy.re(k), y = cy.im(k);
    if (plain) {
      gx(k) = Scalar(2) * (x - cx.re(k));
      gy(k) = Scalar(2) * (y - cx.im(k));
      continue;
    }
    const Scalar r = std::hypot(x, y);
    const Scalar big_r = std::hypot(cx.re(k), cx.im(k));
    const Scalar ux = r > 0 ? x / r : Scalar(0);
    const Scalar uy = r > 0 ? y / r : Scalar(0);
    gx(k) = Scalar(w.alpha) * Scalar(2) * (r - big_r) * ux +
            Scalar(w.beta) * Scalar(2) * (big_r * ux - cx.re(k));
    gy(k) = Scalar(w.alpha) * Scalar(2) * (r - big_r) * uy +
            Scalar(w.beta) * Scalar(2) * (big_r * uy - cx.im(k));
  }
  // d Phi_y(t_k) / d z_j = (1/M) (-sin, cos)(t_k . z_j) t_k
  const Mat<Scalar> coeff =
      (cos_t.array().rowwise() * gy.array() - sin_t.array().rowwise() * gx.array()).matrix();
  ValueAndGrad<Scalar> out;
  out.value = compensated_sum(terms) / K;
  out.grad = (coeff * freqs.freqs) * (inv_m / K);
  return out;
}

template <typename DR, typename DS>
Mat<typename DR::Scalar> cfd_grad(const Eigen::MatrixBase<DR>& real,
                                  const Eigen::MatrixBase<DS>& syn,
                                  const FrequencyBatch<typename DR::Scalar>& freqs,
                                  CfdWeights w = {}) {
  return cfd_value_and_grad(real, syn, freqs, w).grad;
}

// ---------------------------------------------------------------------------
// Gaussian-kernel MMD, biased V-statistic.

namespace detail {

template <typename DA, typename DB>
Mat<typename DA::Scalar> gaussian_gram(const Eigen::MatrixBase<DA>& a,
                                       const Eigen::MatrixBase<DB>& b,
                                       typename DA::Scalar bandwidth) {
  using Scalar = typename DA::Scalar;
  const Scalar scale = Scalar(-1) / (Scalar(2) * bandwidth * bandwidth);
  Mat<Scalar> k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = std::exp(scale * (a.row(i) - b.row(j)).squaredNorm());
  return k;
}

template <typename DR, typename DS>
void check_mmd_args(const Eigen::MatrixBase<DR>& real, const Eigen::MatrixBase<DS>& syn,
                    double bandwidth) {
  require(real.cols() == syn.cols(), ErrorCode::kDimensionMismatch,
          "mmd: real and synthetic dims differ");
  require(real.rows() >= 1 && syn.rows() >= 1, ErrorCode::kInvalidArgument,
          "mmd: sample sets must be non-empty");
  require(bandwidth > 0 && std::isfinite(bandwidth), ErrorCode::kInvalidArgument,
          "mmd: bandwidth must be positive");
}

}  // namespace detail

template <typename DR, typename DS>
typename DR::Scalar mmd(const Eigen::MatrixBase<DR>& real, const Eigen::MatrixBase<DS>& syn,
                        typename DR::Scalar bandwidth) {
  using Scalar = typename DR::Scalar;
  detail::check_mmd_args(real, syn, static_cast<double>(bandwidth));
  const auto krr = detail::gaussian_gram(real, real, bandwidth);
  const auto kss = detail::gaussian_gram(syn, syn, bandwidth);
  const auto krs = detail::gaussian_gram(real, syn, bandwidth);
  const Scalar v = compensated_sum(krr) / static_cast<Scalar>(krr.size()) +
                   compensated_sum(kss) / static_cast<Scalar>(kss.size()) -
                   Scalar(2) * compensated_sum(krs) / static_cast<Scalar>(krs.size());
  return std::max(v, Scalar(0));
}

template <typename DR, typename DS>
ValueAndGrad<typename DR::Scalar> mmd_value_and_grad(const Eigen::MatrixBase<DR>& real,
                                                     const Eigen::MatrixBase<DS>& syn,
                                                     typename DR::Scalar bandwidth) {
  using Scalar = typename DR::Scalar;
  detail::check_mmd_args(real, syn, static_cast<double>(bandwidth));
  const auto kss = detail::gaussian_gram(syn, syn, bandwidth);
  const auto ksr = detail::gaussian_gram(syn, real, bandwidth);
  const auto M = static_cast<Scalar>(syn.rows());
  const auto N = static_cast<Scalar>(real.rows());
  const Scalar inv_bw2 = Scalar(1) / (bandwidth * bandwidth);

  // d k(s_j, x) / d s_j = -k(s_j, x) (s_j - x) / bw^2
  Mat<Scalar> grad(syn.rows(), syn.cols());
  for (Eigen::Index j = 0; j < syn.rows(); ++j) {
    RowVec<Scalar> self = -(kss.row(j).sum() * syn.row(j) - kss.row(j) * syn);
    RowVec<Scalar> cross = -(ksr.row(j).sum() * syn.row(j) - ksr.row(j) * real);
    grad.row(j) = inv_bw2 * (Scalar(2) / (M * M) * self - Scalar(2) / (N * M) * cross);
  }
  ValueAndGrad<Scalar> out;
  out.value = mmd(real, syn, bandwidth);
  out.grad = std::move(grad);
  return out;
}

template <typename DR, typename DS>
Mat<typename DR::Scalar> mmd_grad(const Eigen::MatrixBase<DR>& real,
                                  const Eigen::MatrixBase<DS>& syn,
                                  typename DR::Scalar bandwidth) {
  return mmd_value_and_grad(real, syn, bandwidth).grad;
}

/// Median Euclidean distance over all pairs of rows drawn from up to
/// `max_rows` rows of `points` (uniform subsample when larger).
template <typename Derived>
typename Derived::Scalar median_pairwise_distance(const Eigen::MatrixBase<Derived>& points,
                                                  Eigen::Index max_rows, Rng& rng) {
  using Scalar = typename Derived::Scalar;
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(points.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
  if (points.rows() > max_rows) {
    shuffle(rows.begin(), rows.end(), rng);
    rows.resize(static_cast<std::size_t>(max_rows));
  }
  std::vector<Scalar> d;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b)
      d.push_back((points.row(rows[a]) - points.row(rows[b])).norm());
  require(!d.empty(), ErrorCode::kInvalidArgument,
          "median_pairwise_distance: need at least two points");
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

}  // namespace cfcondense
