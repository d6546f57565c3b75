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

#include <cmath>
#include <iostream>
#include <numeric>

#include "cfcondense/evaluator.hpp"
#include "cfcondense/rng.hpp"

namespace cfcondense {

void ProbeConfig::validate() const {
  require(epochs > 0, ErrorCode::kConfig, "probe: epochs must be positive");
  require(batch_size > 0, ErrorCode::kConfig, "probe: batch_size must be positive");
  require(lr > 0 && std::isfinite(lr), ErrorCode::kConfig, "probe: lr must be positive");
  require(weight_decay >= 0, ErrorCode::kConfig, "probe: weight_decay must be non-negative");
}

Matrix probe_features(const PairedDataset& data, const ProbeConfig& config) {
  const Eigen::Index d = data.dim();
  switch (config.input) {
    case ProbeInput::kSingle:
      require(config.modality < data.modality_count(), ErrorCode::kInvalidArgument,
              "probe: modality index out of range");
      return data.modality(config.modality).data;
    case ProbeInput::kSum: {
      Matrix out = Matrix::Zero(data.count(), d);
      for (const auto& m : data.modalities()) out += m.data;
      return out;
    }
    case ProbeInput::kConcat:
      break;
  }
  Matrix out(data.count(), d * static_cast<Eigen::Index>(data.modality_count()));
  for (std::size_t m = 0; m < data.modality_count(); ++m)
    out.middleCols(static_cast<Eigen::Index>(m) * d, d) = data.modality(m).data;
  return out;
}

std::vector<std::uint32_t> LinearProbe::predict(const Matrix& features) const {
  const Matrix logits = (features * weights).rowwise() + bias.transpose();
  std::vector<std::uint32_t> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(best);
  }
  return out;
}

LinearProbe fit_linear_probe(const Matrix& features, const Labels& labels,
                             std::uint32_t num_classes, const ProbeConfig& config) {
  config.validate();
  require(static_cast<Eigen::Index>(labels.size()) == features.rows(), ErrorCode::kInvalidArgument,
          "probe: label count differs from feature rows");
  const Eigen::Index n = features.rows(), f = features.cols(), c = num_classes;
  LinearProbe probe{Matrix::Zero(f, c), Vector::Zero(c)};
  Matrix m_w = Matrix::Zero(f, c), v_w = Matrix::Zero(f, c);
  Vector m_b = Vector::Zero(c), v_b = Vector::Zero(c);
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;

  Rng rng = make_rng(config.seed, 0x9e0be);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch = std::min<Eigen::Index>(config.batch_size, n);
  const Eigen::Index per_epoch = (n + batch - 1) / batch;
  const std::uint64_t total_steps =
      std::max<std::uint64_t>(static_cast<std::uint64_t>(config.epochs) * per_epoch, config.min_steps);

  std::uint64_t t = 0;
  while (t < total_steps) {
    shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n && t < total_steps; start += batch) {
      const Eigen::Index b = std::min(batch, n - start);
      Matrix x(b, f);
      Matrix y = Matrix::Zero(b, c);
      for (Eigen::Index i = 0; i < b; ++i) {
        const auto row = order[static_cast<std::size_t>(start + i)];
        x.row(i) = features.row(row);
        y(i, labels[static_cast<std::size_t>(row)]) = 1.0;
      }
      Matrix p = (x * probe.weights).rowwise() + probe.bias.transpose();
      for (Eigen::Index i = 0; i < b; ++i) {
        p.row(i).array() -= p.row(i).maxCoeff();
        p.row(i) = p.row(i).array().exp().matrix();
        p.row(i) /= p.row(i).sum();
      }
      const Matrix err = (p - y) / static_cast<double>(b);
      const Matrix g_w = x.transpose() * err + config.weight_decay * probe.weights;
      const Vector g_b = err.colwise().sum().transpose();
      ++t;
      const double c1 = 1 - std::pow(b1, static_cast<double>(t));
      const double c2 = 1 - std::pow(b2, static_cast<double>(t));
      m_w = b1 * m_w + (1 - b1) * g_w;
      v_w = b2 * v_w + (1 - b2) * g_w.cwiseAbs2();
      m_b = b1 * m_b + (1 - b1) * g_b;
      v_b = b2 * v_b + (1 - b2) * g_b.cwiseAbs2();
      probe.weights.array() -= config.lr * (m_w.array() / c1) / ((v_w.array() / c2).sqrt() + eps);
      probe.bias.array() -= config.lr * (m_b.array() / c1) / ((v_b.array() / c2).sqrt() + eps);
    }
  }
  return probe;
}

double accuracy(const std::vector<std::uint32_t>& predicted, const Labels& truth) {
  require(predicted.size() == truth.size() && !truth.empty(), ErrorCode::kInvalidArgument,
          "accuracy: size mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double train_linear_probe(const PairedDataset& train, const PairedDataset& test,
                          const ProbeConfig& config) {
  require(train.dim() == test.dim() && train.modality_count() == test.modality_count(),
          ErrorCode::kDimensionMismatch, "probe: train and test layouts differ");
  require(train.num_classes() == test.num_classes(), ErrorCode::kInvalidArgument,
          "probe: train and test class sets differ");
  for (std::uint32_t c = 0; c < train.num_classes(); ++c)
    if (train.class_rows()[c].empty())
      std::cerr << "warning: class " << c << " absent from probe training data\n";
  const LinearProbe probe =
      fit_linear_probe(probe_features(train, config), train.labels(), train.num_classes(), config);
  return accuracy(probe.predict(probe_features(test, config)), test.labels());
}

double train_linear_probe(const SyntheticSet& train, const PairedDataset& test,
                          const ProbeConfig& config) {
  return train_linear_probe(train.as_dataset(), test, config);
}

}  // namespace cfcondense
