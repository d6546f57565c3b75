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

// Reference implementations used to check the library. They favour the
// most literal formulation over speed or shared code paths.
#pragma once

#include <algorithm>
#include <complex>
#include <numeric>
#include <vector>

#include "cfcondense/core.hpp"

namespace cfcondense::oracle {

using Complex = std::complex<double>;

/// Phi(t) = (1/N) sum_n exp(i t.z_n), one entry per frequency row.
inline std::vector<Complex> cf(const Matrix& points, const Matrix& freqs) {
  std::vector<Complex> out;
  for (Eigen::Index k = 0; k < freqs.rows(); ++k) {
    Complex acc = 0;
    for (Eigen::Index n = 0; n < points.rows(); ++n) {
      double dot = 0;
      for (Eigen::Index j = 0; j < points.cols(); ++j) dot += freqs(k, j) * points(n, j);
      acc += std::exp(Complex(0, dot));
    }
    out.push_back(acc / static_cast<double>(points.rows()));
  }
  return out;
}

/// (1/K) sum_k |Phi_x(t_k) - Phi_y(t_k)|^2.
inline double cfd(const Matrix& x, const Matrix& y, const Matrix& freqs) {
  const auto px = cf(x, freqs), py = cf(y, freqs);
  double acc = 0;
  for (std::size_t k = 0; k < px.size(); ++k) acc += std::norm(px[k] - py[k]);
  return acc / static_cast<double>(px.size());
}

inline double gaussian(const Eigen::Ref<const RowVec<double>>& a,
                       const Eigen::Ref<const RowVec<double>>& b, double bw) {
  double d2 = 0;
  for (Eigen::Index j = 0; j < a.size(); ++j) d2 += (a(j) - b(j)) * (a(j) - b(j));
  return std::exp(-d2 / (2 * bw * bw));
}

/// Biased MMD^2 with a Gaussian kernel, by triple loops.
inline double mmd(const Matrix& x, const Matrix& y, double bw) {
  const auto mean_k = [&](const Matrix& a, const Matrix& b) {
    double acc = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < b.rows(); ++j) acc += gaussian(a.row(i), b.row(j), bw);
    return acc / static_cast<double>(a.rows() * b.rows());
  };
  return mean_k(x, x) + mean_k(y, y) - 2 * mean_k(x, y);
}

inline Vector mean_rows(const Matrix& m) {
  Vector out = Vector::Zero(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out += m.row(i).transpose();
  return out / static_cast<double>(m.rows());
}

inline double cosine(const Vector& a, const Vector& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

/// 1 - cos(mean_i ra_i*rv_i, mean_j sa_j*sv_j).
inline double cross_loss(const Matrix& ra, const Matrix& rv, const Matrix& sa, const Matrix& sv) {
  Vector u = Vector::Zero(ra.cols()), w = Vector::Zero(ra.cols());
  for (Eigen::Index i = 0; i < ra.rows(); ++i)
    for (Eigen::Index j = 0; j < ra.cols(); ++j) u(j) += ra(i, j) * rv(i, j) / static_cast<double>(ra.rows());
  for (Eigen::Index i = 0; i < sa.rows(); ++i)
    for (Eigen::Index j = 0; j < sa.cols(); ++j) w(j) += sa(i, j) * sv(i, j) / static_cast<double>(sa.rows());
  return 1 - cosine(u, w);
}

/// 1 - cos(mean(ra)*mean(sv), mean(rv)*mean(sa)).
inline double joint_loss(const Matrix& ra, const Matrix& rv, const Matrix& sa, const Matrix& sv) {
  const Vector p = mean_rows(ra).cwiseProduct(mean_rows(sv));
  const Vector q = mean_rows(rv).cwiseProduct(mean_rows(sa));
  return 1 - cosine(p, q);
}

/// Kernel herding with the linear kernel k(x, y) = <x, y>: at step t pick the
/// unselected point maximising E_p[k(x, .)] - 1/(t+1) sum_{s<=t} k(x, x_s).
inline std::vector<Eigen::Index> kernel_herding(const Matrix& points, std::size_t k) {
  const Matrix gram = points * points.transpose();
  const Eigen::Index n = points.rows();
  std::vector<Eigen::Index> chosen;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (std::size_t t = 0; t < k; ++t) {
    Eigen::Index best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      double attract = 0, repel = 0;
      for (Eigen::Index j = 0; j < n; ++j) attract += gram(i, j);
      for (auto s : chosen) repel += gram(i, s);
      const double val = attract / static_cast<double>(n) - repel / static_cast<double>(t + 1);
      if (val > best_val) {
        best_val = val;
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    chosen.push_back(best);
  }
  return chosen;
}

/// Recall@k by fully sorting every gallery item per query.
inline double recall(const Matrix& q, const Matrix& g,
                     const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& rel, std::size_t k) {
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<std::pair<double, Eigen::Index>> scored;
    for (Eigen::Index j = 0; j < g.rows(); ++j) {
      const double s = q.row(i).normalized().dot(g.row(j).normalized());
      scored.emplace_back(-s, j);
    }
    std::sort(scored.begin(), scored.end());
    for (std::size_t r = 0; r < std::min(k, scored.size()); ++r) {
      if (rel(i, scored[r].second)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(q.rows());
}

}  // namespace cfcondense::oracle
