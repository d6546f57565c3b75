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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <thread>

#include "cfcondense/rng.hpp"

namespace cfcondense {
namespace {

enum Stream : std::uint64_t {
  kScaleStream = 11,
  kFreqStream = 12,
  kRealBatchStream = 13,
  kSynBatchStream = 14,
};

constexpr Eigen::Index kMedianSubsample = 256;

/// Runs fn(i) for i in [0, n) on up to thread_count() threads. Results must
/// be written to per-index slots so the reduction order stays fixed.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Per-class real-row sampler.
class RealSampler {
 public:
  RealSampler(const std::vector<Eigen::Index>& rows, RealSampling mode)
      : rows_(rows), order_(rows), mode_(mode) {}

  std::vector<Eigen::Index> draw(std::uint32_t batch, Rng& rng) {
    const std::size_t n = rows_.size();
    if (batch >= n) return rows_;
    std::vector<Eigen::Index> out;
    out.reserve(batch);
    if (mode_ == RealSampling::kWithReplacement) {
      for (std::uint32_t i = 0; i < batch; ++i) out.push_back(rows_[uniform_index(n, rng)]);
      return out;
    }
    if (cursor_ == 0 || cursor_ + batch > n) {
      shuffle(order_.begin(), order_.end(), rng);
      cursor_ = 0;
    }
    out.assign(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
               order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + batch));
    cursor_ += batch;
    return out;
  }

 private:
  std::vector<Eigen::Index> rows_;
  std::vector<Eigen::Index> order_;
  RealSampling mode_;
  std::size_t cursor_ = 0;
};

Matrix gather_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

AlignmentOptions alignment_options(const CondenseConfig& config, const ResolvedScales& scales,
                                   Degeneracy degeneracy) {
  AlignmentOptions opt;
  opt.uni_distance = config.uni_distance;
  opt.cfd_weights = config.cfd_weights;
  opt.mmd_bandwidth = scales.mmd_bandwidth;
  opt.cross_mode = config.cross_mode;
  opt.degeneracy = degeneracy;
  return opt;
}

void accumulate(IterationRecord& rec, const LossBreakdown<double>& b) {
  if (rec.uni_per_modality.empty()) rec.uni_per_modality.assign(b.uni_per_modality.size(), 0.0);
  for (std::size_t m = 0; m < b.uni_per_modality.size(); ++m)
    rec.uni_per_modality[m] += b.uni_per_modality[m];
  rec.uni += b.uni;
  rec.cross += b.cross;
  rec.joint += b.joint;
  rec.total += b.total;
  rec.rho_cross += b.rho_cross;
  rec.rho_joint += b.rho_joint;
}

void check_finite(const IterationRecord& rec, const std::vector<LossBreakdown<double>>& parts) {
  const auto diverged = [&](const char* term) {
    fail(ErrorCode::kDivergence,
         "non-finite " + std::string(term) + " at iteration " + std::to_string(rec.iter));
  };
  if (!std::isfinite(rec.uni)) diverged("uni loss");
  if (!std::isfinite(rec.cross)) diverged("cross loss");
  if (!std::isfinite(rec.joint)) diverged("joint loss");
  if (!std::isfinite(rec.total)) diverged("total loss");
  for (const auto& p : parts)
    for (const auto& g : p.grads)
      if (!g.allFinite()) diverged("gradient");
}

}  // namespace

void CondenseConfig::validate(std::uint32_t num_classes, std::size_t modality_count) const {
  const auto bad = [](const std::string& key, const std::string& why) {
    fail(ErrorCode::kConfig, "config key '" + key + "': " + why);
  };
  if (dpc == 0) bad("dpc", "must be positive");
  if (iterations == 0) bad("iterations", "must be positive");
  if (!(syn_lr > 0) || !std::isfinite(syn_lr)) bad("syn_lr", "must be positive and finite");
  if (!(momentum >= 0 && momentum < 1)) bad("momentum", "must lie in [0, 1)");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1)) bad("adam_beta1", "must lie in [0, 1)");
  if (!(adam_beta2 >= 0 && adam_beta2 < 1)) bad("adam_beta2", "must lie in [0, 1)");
  if (!(adam_eps > 0)) bad("adam_eps", "must be positive");
  if (real_batch == 0) bad("real_batch", "must be positive");
  if (syn_batch == 0) bad("syn_batch", "must be positive");
  if (freq_count == 0) bad("freq_count", "must be positive");
  if (!std::isfinite(sigma_t)) bad("sigma_t", "must be finite");
  if (!std::isfinite(mmd_bandwidth)) bad("mmd_bandwidth", "must be finite");
  if (!std::isfinite(clip_norm)) bad("clip_norm", "must be finite");
  if (!(cfd_weights.alpha >= 0) || !(cfd_weights.beta >= 0)) bad("cfd_alpha", "must be non-negative");
  for (auto [key, w] : {std::pair{"lambda_uni", weights.uni}, std::pair{"lambda_cross", weights.cross},
                        std::pair{"lambda_joint", weights.joint}})
    if (!std::isfinite(w) || w < 0) bad(key, "must be finite and non-negative");
  if (weights.uni + weights.cross + weights.joint <= 0) bad("lambda_uni", "all loss weights are zero");
  if (num_classes > 0 && syn_batch > static_cast<std::uint64_t>(dpc) * num_classes)
    bad("syn_batch", "exceeds dpc * num_classes");
  if (modality_count == 1) {
    if (weights.cross > 0) bad("lambda_cross", "must be 0 for single-modality data");
    if (weights.joint > 0) bad("lambda_joint", "must be 0 for single-modality data");
  }
}

ResolvedScales resolve_scales(const PairedDataset& dataset, const CondenseConfig& config) {
  ResolvedScales s;
  if (config.sigma_t > 0 && config.mmd_bandwidth > 0) {
    s.sigma_t = config.sigma_t;
    s.mmd_bandwidth = config.mmd_bandwidth;
    return s;
  }
  const PairedDataset data = config.normalize ? dataset.l2_normalized() : dataset;
  Rng rng = make_rng(config.seed, kScaleStream);
  double median_sum = 0;
  for (const auto& set : data.modalities())
    median_sum += median_pairwise_distance(set.data, kMedianSubsample, rng);
  const double median = median_sum / static_cast<double>(data.modality_count());
  require(median > 0, ErrorCode::kInvalidArgument,
          "median pairwise distance is zero; set sigma_t and mmd_bandwidth explicitly");
  s.sigma_t = config.sigma_t > 0 ? config.sigma_t : 1.0 / median;
  s.mmd_bandwidth = config.mmd_bandwidth > 0 ? config.mmd_bandwidth : median;
  return s;
}

RowOptimizer::RowOptimizer(const CondenseConfig& config, std::size_t modalities,
                           Eigen::Index rows, Eigen::Index dim)
    : kind_(config.optimizer),
      lr_(config.syn_lr),
      momentum_(config.momentum),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_eps) {
  for (std::size_t m = 0; m < modalities; ++m) {
    first_.push_back(Matrix::Zero(rows, dim));
    if (kind_ == OptimizerKind::kAdam) second_.push_back(Matrix::Zero(rows, dim));
    steps_.emplace_back(static_cast<std::size_t>(rows), 0u);
  }
}

void RowOptimizer::step(std::size_t m, Eigen::Index row, Eigen::Ref<Matrix> param,
                        const Eigen::Ref<const RowVec<double>>& grad) {
  auto buf = first_[m].row(row);
  if (kind_ == OptimizerKind::kSgdMomentum) {
    buf = momentum_ * buf + grad;
    param.row(row) -= lr_ * buf;
    return;
  }
  const auto t = ++steps_[m][static_cast<std::size_t>(row)];
  auto sq = second_[m].row(row);
  buf = beta1_ * buf + (1 - beta1_) * grad;
  sq = beta2_ * sq + (1 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1 - std::pow(beta1_, t);
  const double c2 = 1 - std::pow(beta2_, t);
  param.row(row).array() -= lr_ * (buf.array() / c1) / ((sq.array() / c2).sqrt() + eps_);
}

CondenseResult condense(const PairedDataset& dataset, const CondenseConfig& config,
                        const CondenseCallbacks& callbacks) {
  config.validate(dataset.num_classes(), dataset.modality_count());
  const PairedDataset data = config.normalize ? dataset.l2_normalized() : dataset;
  SyntheticSet start = config.init == InitKind::kHerding ? init_herding(data, config.dpc)
                                                         : init_random(data, config.dpc, config.seed);
  return condense_from(dataset, std::move(start), config, callbacks);
}

CondenseResult condense_from(const PairedDataset& dataset, SyntheticSet syn,
                             const CondenseConfig& config, const CondenseCallbacks& callbacks) {
  config.validate(dataset.num_classes(), dataset.modality_count());
  syn.validate();
  require(syn.num_classes == dataset.num_classes() &&
              syn.modalities.size() == dataset.modality_count() && syn.dim() == dataset.dim(),
          ErrorCode::kDimensionMismatch, "synthetic set does not match the dataset layout");
  const PairedDataset data = config.normalize ? dataset.l2_normalized() : dataset;
  const std::size_t n_mod = data.modality_count();
  const std::uint32_t n_cls = data.num_classes();
  const std::uint32_t dpc = syn.dpc;

  CondenseResult result;
  const ResolvedScales scales = resolve_scales(dataset, config);
  result.trace.sigma_t = scales.sigma_t;
  result.trace.mmd_bandwidth = scales.mmd_bandwidth;
  const AlignmentOptions opt = alignment_options(config, scales, Degeneracy::kZero);

  Rng freq_rng = make_rng(config.seed, kFreqStream);
  Rng real_rng = make_rng(config.seed, kRealBatchStream);
  Rng syn_rng = make_rng(config.seed, kSynBatchStream);
  FrequencyBatch<double> freqs =
      sample_frequencies<double>(data.dim(), config.freq_count, scales.sigma_t, freq_rng);

  std::vector<RealSampler> samplers;
  for (const auto& rows : data.class_rows()) samplers.emplace_back(rows, config.real_sampling);
  RowOptimizer optimizer(config, n_mod, syn.rows(), syn.dim());
  const std::uint32_t syn_take = std::min(config.syn_batch, dpc);

  for (std::uint32_t iter = 0; iter < config.iterations; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.resample_freqs && iter > 0)
      freqs = sample_frequencies<double>(data.dim(), config.freq_count, scales.sigma_t, freq_rng);

    // Draw all batches up front so the random streams do not depend on threading.
    std::vector<std::vector<Eigen::Index>> real_rows(n_cls), syn_rows(n_cls);
    for (std::uint32_t c = 0; c < n_cls; ++c) {
      real_rows[c] = samplers[c].draw(config.real_batch, real_rng);
      std::vector<Eigen::Index> local(dpc);
      for (std::uint32_t k = 0; k < dpc; ++k) local[k] = static_cast<Eigen::Index>(c) * dpc + k;
      if (syn_take < dpc) {
        shuffle(local.begin(), local.end(), syn_rng);
        local.resize(syn_take);
        std::sort(local.begin(), local.end());
      }
      syn_rows[c] = std::move(local);
    }

    std::vector<LossBreakdown<double>> parts(n_cls);
    parallel_for(n_cls, [&](std::size_t c) {
      Batch<double> real_b, syn_b;
      for (std::size_t m = 0; m < n_mod; ++m) {
        real_b.push_back(gather_rows(data.modality(m).data, real_rows[c]));
        syn_b.push_back(gather_rows(syn.modalities[m], syn_rows[c]));
      }
      parts[c] = total_loss(real_b, syn_b, freqs, config.weights, opt);
    });

    IterationRecord rec;
    rec.iter = iter;
    rec.rho_cross = 0;
    rec.rho_joint = 0;
    int degenerate = 0;
    for (const auto& p : parts) {
      accumulate(rec, p);
      degenerate += p.degenerate_terms;
    }
    rec.rho_cross /= n_cls;
    rec.rho_joint /= n_cls;
    check_finite(rec, parts);
    if (degenerate > 0)
      std::cerr << "warning: iteration " << iter << ": " << degenerate
                << " degenerate interaction term(s) contributed zero loss\n";

    CompensatedSum<double> sq;
    for (const auto& p : parts)
      for (const auto& g : p.grads) sq.add(g.squaredNorm());
    rec.grad_norm = std::sqrt(sq.value());
    const double scale =
        config.clip_norm > 0 && rec.grad_norm > config.clip_norm ? config.clip_norm / rec.grad_norm : 1.0;

    for (std::uint32_t c = 0; c < n_cls; ++c) {
      for (std::size_t m = 0; m < n_mod; ++m) {
        const Matrix& g = parts[c].grads[m];
        for (std::size_t i = 0; i < syn_rows[c].size(); ++i) {
          const RowVec<double> gi = scale * g.row(static_cast<Eigen::Index>(i));
          optimizer.step(m, syn_rows[c][i], syn.modalities[m], gi);
        }
      }
    }
    for (const auto& m : syn.modalities)
      if (!m.allFinite())
        fail(ErrorCode::kDivergence,
             "synthetic set became non-finite at iteration " + std::to_string(iter));

    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    rec.seconds = std::max(dt.count(), 1e-9);
    result.trace.iterations.push_back(rec);
    if (callbacks.on_iteration) callbacks.on_iteration(rec);
    if (config.eval_every > 0 && (iter + 1) % config.eval_every == 0 && callbacks.on_checkpoint)
      result.trace.checkpoints.push_back(callbacks.on_checkpoint(iter + 1, syn));
  }
  result.synthetic = std::move(syn);
  return result;
}

IterationRecord evaluate_objective(const PairedDataset& dataset, const SyntheticSet& syn,
                                   const CondenseConfig& config, std::uint64_t freq_seed) {
  syn.validate();
  const PairedDataset data = config.normalize ? dataset.l2_normalized() : dataset;
  const ResolvedScales scales = resolve_scales(dataset, config);
  const AlignmentOptions opt = alignment_options(config, scales, Degeneracy::kZero);
  Rng rng = make_rng(freq_seed, kFreqStream);
  const auto freqs = sample_frequencies<double>(data.dim(), config.freq_count, scales.sigma_t, rng);
  IterationRecord rec;
  rec.rho_cross = 0;
  rec.rho_joint = 0;
  for (std::uint32_t c = 0; c < data.num_classes(); ++c) {
    Batch<double> real_b, syn_b;
    for (std::size_t m = 0; m < data.modality_count(); ++m) {
      real_b.push_back(gather_rows(data.modality(m).data, data.class_rows()[c]));
      syn_b.push_back(syn.modalities[m].middleRows(static_cast<Eigen::Index>(c) * syn.dpc, syn.dpc));
    }
    accumulate(rec, total_loss(real_b, syn_b, freqs, config.weights, opt));
  }
  rec.rho_cross /= data.num_classes();
  rec.rho_joint /= data.num_classes();
  return rec;
}

}  // namespace cfcondense
