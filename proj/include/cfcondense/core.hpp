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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cfcondense {

/// Dense matrix with one sample per row.
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = Mat<double>;
using Vector = Vec<double>;
using Labels = std::vector<std::uint32_t>;

enum class ErrorCode {
  kIo,
  kNotFound,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kNonFinite,
  kInvalidArgument,
  kDimensionMismatch,
  kModalityMismatch,
  kDegenerateInteraction,
  kConfig,
  kInsufficientData,
  kDivergence,
  kInvalidRelevance,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kModalityMismatch: return "ModalityMismatch";
    case ErrorCode::kDegenerateInteraction: return "DegenerateInteraction";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kDivergence: return "DivergenceError";
    case ErrorCode::kInvalidRelevance: return "InvalidRelevance";
  }
  return "Unknown";
}

/// The single exception type thrown by the library. `code()` identifies the
/// failure class; the message carries the details.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

/// Neumaier-compensated accumulator. Used for every reduction whose result
/// is compared against an oracle at 1e-12.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Scalar value() const { return sum_ + comp_; }

 private:
  Scalar sum_{0};
  Scalar comp_{0};
};

template <typename Derived>
typename Derived::Scalar compensated_sum(const Eigen::DenseBase<Derived>& x) {
  CompensatedSum<typename Derived::Scalar> acc;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) acc.add(x(i, j));
  return acc.value();
}

/// Column-wise mean of a sample matrix (one sample per row), compensated.
template <typename Derived>
Vec<typename Derived::Scalar> column_mean(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Vec<Scalar> mean(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    mean(j) = compensated_sum(x.col(j)) / static_cast<Scalar>(x.rows());
  return mean;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

/// Number of worker threads allowed for internal parallelism. Honours the
/// CFCONDENSE_THREADS environment variable.
unsigned thread_count();

}  // namespace cfcondense
