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
#include <functional>
#include <string>
#include <vector>

#include "cfcondense/alignment.hpp"
#include "cfcondense/data_model.hpp"

namespace cfcondense {

enum class OptimizerKind { kSgdMomentum, kAdam };
enum class InitKind { kRandom, kHerding };
enum class RealSampling { kWithoutReplacement, kWithReplacement };

struct CondenseConfig {
  std::uint32_t dpc = 10;
  std::uint32_t iterations = 30;
  double syn_lr = 0.5;
  OptimizerKind optimizer = OptimizerKind::kSgdMomentum;
  double momentum = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint32_t real_batch = 128;
  std::uint32_t syn_batch = 32;
  RealSampling real_sampling = RealSampling::kWithoutReplacement;
  std::uint32_t freq_count = 1024;
  double sigma_t = 0.0;        // <= 0: 1 / median pairwise distance
  bool resample_freqs = true;
  LossWeights weights{};
  UniDistance uni_distance = UniDistance::kCfd;
  double mmd_bandwidth = 0.0;  // <= 0: median pairwise distance
  CfdWeights cfd_weights{};
  CrossMode cross_mode = CrossMode::kCosine;
  double clip_norm = 10.0;     // <= 0 disables clipping
  bool normalize = false;      // L2-normalise real rows before condensing
  InitKind init = InitKind::kHerding;
  std::uint64_t seed = 0;
  std::uint32_t eval_every = 0;  // checkpoint cadence, 0 = never

  /// Throws kConfig naming the offending key.
  void validate(std::uint32_t num_classes = 0, std::size_t modality_count = 0) const;
};

/// Loss breakdown of one iteration, summed over classes (rho averaged).
struct IterationRecord {
  std::uint32_t iter = 0;
  std::vector<double> uni_per_modality;
  double uni = 0;
  double cross = 0;
  double joint = 0;
  double total = 0;
  double rho_cross = 1;
  double rho_joint = 1;
  double grad_norm = 0;
  double seconds = 0;  // not persisted in trace.json
};

struct CondenseTrace {
  std::vector<IterationRecord> iterations;
  std::vector<std::string> checkpoints;
  double sigma_t = 0;
  double mmd_bandwidth = 0;
};

// ---------------------------------------------------------------------------
// Initialisation

/// dpc uniformly drawn rows per class, shared across modalities.
SyntheticSet init_random(const PairedDataset& dataset, std::uint32_t dpc, std::uint64_t seed);

/// Greedy kernel herding per class on the concatenated modality vectors.
SyntheticSet init_herding(const PairedDataset& dataset, std::uint32_t dpc);

/// Herding selection order on a single point set (one point per row):
/// w = mean; repeat k times: pick argmax <w, x> over unselected rows (lowest
/// index on ties), w += mean - x.
std::vector<Eigen::Index> herding_select(const Matrix& points, std::uint32_t k);

/// Copies the given per-class rows of every modality into a synthetic set.
SyntheticSet gather_synthetic(const PairedDataset& dataset,
                              const std::vector<std::vector<Eigen::Index>>& rows_per_class);

// ---------------------------------------------------------------------------
// Optimisation

struct CondenseCallbacks {
  std::function<void(const IterationRecord&)> on_iteration;
  /// Invoked every `eval_every` iterations; returns the checkpoint path.
  std::function<std::string(std::uint32_t iter, const SyntheticSet&)> on_checkpoint;
};

struct CondenseResult {
  SyntheticSet synthetic;
  CondenseTrace trace;
};

/// Frequency scale and MMD bandwidth actually used for a run.
struct ResolvedScales {
  double sigma_t = 1;
  double mmd_bandwidth = 1;
};
ResolvedScales resolve_scales(const PairedDataset& dataset, const CondenseConfig& config);

CondenseResult condense(const PairedDataset& dataset, const CondenseConfig& config,
                        const CondenseCallbacks& callbacks = {});

/// Continues from an existing synthetic set instead of initialising one.
CondenseResult condense_from(const PairedDataset& dataset, SyntheticSet start,
                             const CondenseConfig& config,
                             const CondenseCallbacks& callbacks = {});

/// Full objective: every real row of each class against every synthetic row
/// of that class, one fixed frequency batch drawn from `freq_seed`.
IterationRecord evaluate_objective(const PairedDataset& dataset, const SyntheticSet& syn,
                                   const CondenseConfig& config, std::uint64_t freq_seed);

/// Per-row optimiser state.
class RowOptimizer {
 public:
  RowOptimizer(const CondenseConfig& config, std::size_t modalities, Eigen::Index rows,
               Eigen::Index dim);
  /// Applies one step to row `row` of modality `m` of `param` given its gradient.
  void step(std::size_t m, Eigen::Index row, Eigen::Ref<Matrix> param,
            const Eigen::Ref<const RowVec<double>>& grad);

 private:
  OptimizerKind kind_;
  double lr_, momentum_, beta1_, beta2_, eps_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::vector<std::vector<std::uint32_t>> steps_;
};

// ---------------------------------------------------------------------------
// Config and checkpoint I/O

std::string config_to_json(const CondenseConfig& config);
CondenseConfig config_from_json(const std::string& text);
/// Applies `key=value` overrides; unknown keys raise kConfig.
CondenseConfig apply_overrides(const CondenseConfig& config,
                               const std::vector<std::string>& overrides);

std::string trace_to_json(const CondenseTrace& trace);
CondenseTrace trace_from_json(const std::string& text);

/// Writes `manifest.json`, one EMBD file per modality and `trace.json` to `dir`.
void save_checkpoint(const SyntheticSet& syn, const CondenseTrace& trace,
                     const std::filesystem::path& dir);
struct Checkpoint {
  SyntheticSet synthetic;
  CondenseTrace trace;
};
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace cfcondense
