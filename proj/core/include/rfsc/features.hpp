#pragma once

#include <cstddef>
#include <vector>

#include "rfsc/math.hpp"

namespace rfsc {

/// How many principal components to keep: an explicit count, or the
/// smallest count whose cumulative explained-variance ratio reaches a
/// threshold (optionally capped).
struct PcaTarget {
  static PcaTarget fixed(std::size_t k) {
    PcaTarget t;
    t.fixed_k = k;
    return t;
  }
  static PcaTarget variance(double threshold, std::size_t cap = 0) {
    PcaTarget t;
    t.variance_threshold = threshold;
    t.cap = cap;
    return t;
  }

  std::size_t fixed_k = 0;          // 0 means use the threshold
  double variance_threshold = 0.0;  // in (0, 1]
  std::size_t cap = 0;              // 0 means uncapped
};

struct PcaModel {
  std::vector<double> mean;                      // length d
  Matrix components;                             // k x d, orthonormal rows
  std::vector<double> explained_variance;        // population eigenvalues, descending
  std::vector<double> explained_variance_ratio;  // fractions of total variance

  std::size_t component_count() const { return components.rows(); }
  std::size_t input_dim() const { return mean.size(); }
};

/// Fits principal components of the rows of x (population covariance
/// convention). Works through the d x d covariance when d <= n and
/// through the n x n Gram matrix otherwise, so wide feature matrices
/// stay cheap. Component signs are fixed so each row's largest-magnitude
/// entry is positive.
PcaModel pca_fit(const Matrix& x, const PcaTarget& target);

Matrix pca_transform(const PcaModel& model, const Matrix& x);

std::vector<double> cumulative_explained_variance(const PcaModel& model);

/// Per-column standardization to zero mean, unit variance (population
/// convention). Constant columns are flagged by a zero std and map to 0.
struct Scaler {
  std::vector<double> means;
  std::vector<double> stds;  // 0 marks a constant column
};

Scaler scaler_fit(const Matrix& x);

Matrix scaler_transform(const Scaler& scaler, const Matrix& x);

}  // namespace rfsc
