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
#include <string>
#include <vector>

#include "cfcondense/condenser.hpp"
#include "cfcondense/data_model.hpp"

namespace cfcondense {

// ---------------------------------------------------------------------------
// Linear probe

enum class ProbeInput { kConcat, kSum, kSingle };

struct ProbeConfig {
  std::uint32_t epochs = 100;
  std::uint32_t min_steps = 3000;  // small training sets still get this many updates
  double lr = 0.001;
  double weight_decay = 1e-4;
  std::uint32_t batch_size = 64;
  std::uint64_t seed = 0;
  ProbeInput input = ProbeInput::kConcat;
  std::size_t modality = 0;  // used with ProbeInput::kSingle

  void validate() const;
};

/// Probe input features for each row of `data`.
Matrix probe_features(const PairedDataset& data, const ProbeConfig& config);

struct LinearProbe {
  Matrix weights;  // F x C
  Vector bias;     // C

  std::vector<std::uint32_t> predict(const Matrix& features) const;
};

/// Softmax regression trained with mini-batch Adam on cross-entropy.
LinearProbe fit_linear_probe(const Matrix& features, const Labels& labels,
                             std::uint32_t num_classes, const ProbeConfig& config);

double accuracy(const std::vector<std::uint32_t>& predicted, const Labels& truth);

/// Trains on `train` and returns top-1 accuracy on `test`. Classes missing
/// from `train` produce a warning on stderr.
double train_linear_probe(const PairedDataset& train, const PairedDataset& test,
                          const ProbeConfig& config);
double train_linear_probe(const SyntheticSet& train, const PairedDataset& test,
                          const ProbeConfig& config);

// ---------------------------------------------------------------------------
// Retrieval

using Relevance = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Fraction of queries whose k most cosine-similar gallery items (ties to the
/// lower gallery index) contain at least one relevant item.
double recall_at_k(const Matrix& queries, const Matrix& gallery, const Relevance& relevance,
                   std::uint32_t k);

/// Ridge map from one modality to another, fitted on paired rows.
struct RetrievalHead {
  Matrix weights;  // (D+1) x D, last row is the bias

  static RetrievalHead fit(const Matrix& source, const Matrix& target, double ridge = 1.0);
  Matrix apply(const Matrix& source) const;
};

struct RecallSet {
  std::vector<std::uint32_t> ks{1, 5, 10};
  std::vector<double> a2t;  // modality 0 queries, modality 1 gallery
  std::vector<double> t2a;
};

/// Fits ridge heads on the paired rows of `train` (modalities 0 and 1) and
/// measures paired retrieval on `test`, where row i is relevant to row i.
RecallSet paired_retrieval(const PairedDataset& train, const PairedDataset& test,
                           const std::vector<std::uint32_t>& ks = {1, 5, 10});

// ---------------------------------------------------------------------------
// Cross-modal consistency

/// Per class: |mean_i cos(a_i, v_i) over real rows - same over synthetic
/// rows| for modalities `a` and `v`. Classes with fewer than two rows on
/// either side score 0.
std::vector<double> cross_modal_consistency(const PairedDataset& real, const PairedDataset& syn,
                                            std::size_t a = 0, std::size_t v = 1);
std::vector<double> cross_modal_consistency(const PairedDataset& real, const SyntheticSet& syn,
                                            std::size_t a = 0, std::size_t v = 1);

// ---------------------------------------------------------------------------
// Method comparison

enum class Method { kRandom, kHerding, kMmdCondense, kCfdCondense, kCheckpoint };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct EvalRow {
  std::string method;
  std::uint32_t dpc = 0;
  std::uint64_t seed = 0;
  double probe_accuracy = 0;
  RecallSet recall;
  double initial_loss = 0;  // condense methods only
  double final_loss = 0;
};

struct MethodSummary {
  std::string method;
  std::uint32_t dpc = 0;
  double probe_accuracy_mean = 0;
  double probe_accuracy_std = 0;
  std::vector<double> recall_a2t_mean;
  std::vector<double> recall_t2a_mean;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<MethodSummary> summaries;
  double full_data_accuracy_mean = 0;
  double full_data_accuracy_std = 0;
  std::vector<std::uint32_t> ks{1, 5, 10};

  std::string to_csv() const;
  std::string to_json() const;
  /// Throws kInvalidArgument when an invariant (ranges, recall monotone in K) fails.
  void check_invariants() const;
};

struct CompareSpec {
  std::vector<std::uint32_t> dpc_list{10};
  std::vector<Method> methods{Method::kRandom, Method::kHerding, Method::kMmdCondense,
                              Method::kCfdCondense};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  CondenseConfig condense{};
  ProbeConfig probe{};
  bool full_data_reference = true;
};

/// Condensed (or selected) set for one comparison cell.
SyntheticSet produce_condensed(const PairedDataset& train, Method method, std::uint32_t dpc,
                               std::uint64_t seed, const CondenseConfig& base,
                               CondenseTrace* trace = nullptr);

EvalRow evaluate_synthetic(const SyntheticSet& syn, const PairedDataset& test,
                           const std::string& method, std::uint64_t seed,
                           const ProbeConfig& probe);

EvalReport compare_methods(const PairedDataset& train, const PairedDataset& test,
                           const CompareSpec& spec);

/// Mean and sample standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& xs);

/// Fills summaries from rows, keeping first-seen (method, dpc) order.
void summarize(EvalReport& report);

}  // namespace cfcondense
