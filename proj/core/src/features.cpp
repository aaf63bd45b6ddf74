#include "rfsc/features.hpp"

#include <algorithm>
#include <cmath>

#include "rfsc/errors.hpp"

namespace rfsc {
namespace {

// Flip each component row so its largest-magnitude entry (first such
// entry on ties) is positive. Removes the eigensolver's sign freedom so
// identical inputs always give identical models.
void canonicalize_signs(Matrix& components) {
  for (std::size_t r = 0; r < components.rows(); ++r) {
    auto row = components.row(r);
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double mag = std::abs(row[c]);
      if (mag > best) {
        best = mag;
        arg = c;
      }
    }
    if (row[arg] < 0.0)
      for (double& v : row) v = -v;
  }
}

}  // namespace

PcaModel pca_fit(const Matrix& x, const PcaTarget& target) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw InvalidArgument("pca: need at least 2 samples");
  if (d < 1) throw InvalidArgument("pca: need at least 1 feature");
  if (target.fixed_k == 0 &&
      !(target.variance_threshold > 0.0 && target.variance_threshold <= 1.0))
    throw InvalidArgument("pca: variance threshold must be in (0, 1]");

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(row[j])) throw DataError("pca: non-finite feature value");
      model.mean[j] += row[j];
    }
  }
  for (double& m : model.mean) m /= static_cast<double>(n);

  Matrix centered(n, d);
  double total_variance = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = x.row(i);
    auto dst = centered.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      dst[j] = src[j] - model.mean[j];
      total_variance += dst[j] * dst[j];
    }
  }
  total_variance /= static_cast<double>(n);
  if (total_variance <= 0.0) throw DegenerateDataError("pca: all samples identical");

  const std::size_t max_rank = std::min(n - 1, d);
  if (target.fixed_k > max_rank)
    throw RankError("pca: requested " + std::to_string(target.fixed_k) +
                    " components but data supports at most " + std::to_string(max_rank));

  // eigendecompose whichever Gram matrix is smaller; both share the
  // nonzero spectrum of the covariance
  std::vector<double> eigenvalues;
  Matrix raw_components;
  if (d <= n) {
    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = centered.row(i);
      for (std::size_t a = 0; a < d; ++a) {
        const double va = row[a];
        if (va == 0.0) continue;
        double* out = &cov(a, 0);
        for (std::size_t b = a; b < d; ++b) out[b] += va * row[b];
      }
    }
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) {
        cov(a, b) /= static_cast<double>(n);
        cov(b, a) = cov(a, b);
      }
    auto eig = symmetric_eigen(cov);
    eigenvalues = std::move(eig.values);
    raw_components = Matrix(eigenvalues.size(), d);
    for (std::size_t r = 0; r < raw_components.rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) raw_components(r, c) = eig.vectors(c, r);
  } else {
    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double g =
            dot(centered.row(i), centered.row(j)) / static_cast<double>(n);
        gram(i, j) = g;
        gram(j, i) = g;
      }
    auto eig = symmetric_eigen(gram);
    eigenvalues = std::move(eig.values);
    // lift Gram eigenvectors u into feature space: v = X_c^T u, then
    // normalize (||X_c^T u|| = sqrt(n * lambda))
    raw_components = Matrix(eigenvalues.size(), d);
    for (std::size_t r = 0; r < eigenvalues.size(); ++r) {
      auto out = raw_components.row(r);
      for (std::size_t i = 0; i < n; ++i) {
        const double u = eig.vectors(i, r);
        if (u == 0.0) continue;
        const auto row = centered.row(i);
        for (std::size_t c = 0; c < d; ++c) out[c] += u * row[c];
      }
      double norm2 = 0.0;
      for (const double v : out) norm2 += v * v;
      const double norm = std::sqrt(norm2);
      if (norm > 0.0)
        for (double& v : out) v /= norm;
    }
  }

  // numerical rank cut: discard nonpositive and negligible eigenvalues
  const double rank_tol = total_variance * 1e-12;
  std::size_t rank = 0;
  while (rank < eigenvalues.size() && rank < max_rank && eigenvalues[rank] > rank_tol)
    ++rank;
  if (rank == 0) throw DegenerateDataError("pca: no usable variance direction");

  std::size_t k;
  if (target.fixed_k > 0) {
    if (target.fixed_k > rank)
      throw RankError("pca: requested " + std::to_string(target.fixed_k) +
                      " components but numerical rank is " + std::to_string(rank));
    k = target.fixed_k;
  } else {
    double cum = 0.0;
    k = rank;
    for (std::size_t i = 0; i < rank; ++i) {
      cum += eigenvalues[i] / total_variance;
      if (cum >= target.variance_threshold) {
        k = i + 1;
        break;
      }
    }
    if (target.cap > 0) k = std::min(k, target.cap);
  }

  model.components = Matrix(k, d);
  model.explained_variance.resize(k);
  model.explained_variance_ratio.resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto src = raw_components.row(r);
    std::copy(src.begin(), src.end(), model.components.row(r).begin());
    model.explained_variance[r] = eigenvalues[r];
    model.explained_variance_ratio[r] = eigenvalues[r] / total_variance;
  }
  canonicalize_signs(model.components);
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
  const std::size_t d = model.input_dim();
  const std::size_t k = model.component_count();
  if (x.cols() != d)
    throw ShapeError("pca transform: input has " + std::to_string(x.cols()) +
                     " features, model expects " + std::to_string(d));
  Matrix out(x.rows(), k);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - model.mean[j];
    for (std::size_t r = 0; r < k; ++r)
      out(i, r) = dot(model.components.row(r), centered);
  }
  return out;
}

std::vector<double> cumulative_explained_variance(const PcaModel& model) {
  std::vector<double> cum(model.explained_variance_ratio.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cum.size(); ++i) {
    acc += model.explained_variance_ratio[i];
    cum[i] = acc;
  }
  return cum;
}

Scaler scaler_fit(const Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n < 2) throw InvalidArgument("scaler: need at least 2 samples");

  Scaler s;
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(row[j])) throw DataError("scaler: non-finite feature value");
      s.means[j] += row[j];
    }
  }
  for (double& m : s.means) m /= static_cast<double>(n);

  std::vector<double> peak(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = row[j] - s.means[j];
      s.stds[j] += dev * dev;
      peak[j] = std::max(peak[j], std::abs(row[j]));
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double var = s.stds[j] / static_cast<double>(n);
    double sd = var > 0.0 ? std::sqrt(var) : 0.0;
    // columns that are constant up to roundoff count as constant;
    // dividing by a 1e-17 "std" would just amplify noise
    if (sd <= 1e-12 * std::max(1.0, peak[j])) sd = 0.0;
    s.stds[j] = sd;
  }
  return s;
}

Matrix scaler_transform(const Scaler& scaler, const Matrix& x) {
  const std::size_t d = scaler.means.size();
  if (x.cols() != d)
    throw ShapeError("scaler transform: input has " + std::to_string(x.cols()) +
                     " features, scaler expects " + std::to_string(d));
  Matrix out(x.rows(), d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < d; ++j)
      dst[j] = scaler.stds[j] > 0.0 ? (row[j] - scaler.means[j]) / scaler.stds[j] : 0.0;
  }
  return out;
}

}  // namespace rfsc
