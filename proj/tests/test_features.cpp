#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "oracles.hpp"
#include "rfsc/classify.hpp"
#include "rfsc/errors.hpp"
#include "rfsc/features.hpp"
#include "rfsc/math.hpp"
#include "rfsc/rng.hpp"

using namespace rfsc;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, Rng& rng, double spread = 1.0) {
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      x(i, j) = spread * rng.normal() + static_cast<double>(j);
  return x;
}

}  // namespace

TEST_CASE("pca of two antipodal points keeps the diagonal direction") {
  Matrix x(2, 2);
  x(0, 0) = 1.0;
  x(0, 1) = 1.0;
  x(1, 0) = -1.0;
  x(1, 1) = -1.0;
  const PcaModel model = pca_fit(x, PcaTarget::fixed(1));
  REQUIRE(model.component_count() == 1);
  CHECK(model.mean[0] == 0.0);
  CHECK(model.mean[1] == 0.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(model.components(0, 0) == doctest::Approx(inv_sqrt2));
  CHECK(model.components(0, 1) == doctest::Approx(inv_sqrt2));
  REQUIRE(model.explained_variance_ratio.size() == 1);
  CHECK(model.explained_variance_ratio[0] == doctest::Approx(1.0));
  // population eigenvalue of {-sqrt2, +sqrt2} projections
  CHECK(model.explained_variance[0] == doctest::Approx(2.0));

  Matrix probe(1, 2);
  probe(0, 0) = 2.0;
  probe(0, 1) = 2.0;
  const Matrix t = pca_transform(model, probe);
  CHECK(t(0, 0) == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("pca components agree with the covariance eigendecomposition") {
  Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng.next_below(40);
    const std::size_t d = 2 + rng.next_below(10);
    const Matrix x = random_matrix(n, d, rng);
    const PcaModel model = pca_fit(x, PcaTarget::fixed(std::min(n - 1, d)));
    const auto ref = oracle::pca_reference(x);

    const double scale = std::max(1.0, ref.values.front());
    for (std::size_t j = 0; j < model.component_count(); ++j)
      CHECK(std::abs(model.explained_variance[j] - ref.values[j]) <= 1e-8 * scale);

    // each component solves the eigenproblem of the population covariance
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / static_cast<double>(n);
    for (std::size_t j = 0; j < model.component_count(); ++j) {
      for (std::size_t a = 0; a < d; ++a) {
        double cv = 0.0;
        for (std::size_t b = 0; b < d; ++b) {
          double cov_ab = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            cov_ab += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
          cov_ab /= static_cast<double>(n);
          cv += cov_ab * model.components(j, b);
        }
        CHECK(std::abs(cv - model.explained_variance[j] * model.components(j, a)) <=
              1e-8 * scale);
      }
      // sign convention: the largest-magnitude entry is positive
      std::size_t big = 0;
      for (std::size_t a = 1; a < d; ++a)
        if (std::abs(model.components(j, a)) > std::abs(model.components(j, big))) big = a;
      CHECK(model.components(j, big) > 0.0);
    }

    // orthonormal rows
    for (std::size_t j = 0; j < model.component_count(); ++j)
      for (std::size_t j2 = 0; j2 <= j; ++j2) {
        const double g = dot(model.components.row(j), model.components.row(j2));
        CHECK(std::abs(g - (j == j2 ? 1.0 : 0.0)) <= 1e-10);
      }
  }
}

TEST_CASE("variance threshold picks the smallest sufficient count") {
  Rng rng(53);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 8 + rng.next_below(30);
    const std::size_t d = 3 + rng.next_below(8);
    const Matrix x = random_matrix(n, d, rng);
    for (const double tau : {0.5, 0.9, 0.99}) {
      const PcaModel model = pca_fit(x, PcaTarget::variance(tau));
      const auto cum = cumulative_explained_variance(model);
      const std::size_t k = model.component_count();
      REQUIRE(k >= 1);
      CHECK(cum[k - 1] >= tau - 1e-12);
      if (k >= 2) {
        // one fewer component would not reach the threshold
        const PcaModel full = pca_fit(x, PcaTarget::fixed(std::min(n - 1, d)));
        const auto cum_full = cumulative_explained_variance(full);
        CHECK(cum_full[k - 2] < tau);
      }
    }
  }
}

TEST_CASE("variance threshold honors the cap") {
  Rng rng(57);
  const Matrix x = random_matrix(40, 10, rng);
  const PcaModel capped = pca_fit(x, PcaTarget::variance(0.999999, 3));
  CHECK(capped.component_count() == 3);
  const PcaModel uncapped = pca_fit(x, PcaTarget::variance(0.999999));
  CHECK(uncapped.component_count() > 3);
}

TEST_CASE("threshold of one keeps every usable direction") {
  Rng rng(59);
  // rank-2 data embedded in four dimensions
  Matrix x(12, 4);
  for (std::size_t i = 0; i < 12; ++i) {
    const double u = rng.normal(), v = rng.normal();
    x(i, 0) = u;
    x(i, 1) = v;
    x(i, 2) = u + v;
    x(i, 3) = u - v;
  }
  const PcaModel model = pca_fit(x, PcaTarget::variance(1.0));
  CHECK(model.component_count() == 2);
}

TEST_CASE("transformed training data is centered with eigenvalue variances") {
  Rng rng(61);
  const Matrix x = random_matrix(30, 6, rng);
  const PcaModel model = pca_fit(x, PcaTarget::fixed(4));
  const Matrix t = pca_transform(model, x);
  REQUIRE(t.rows() == 30);
  REQUIRE(t.cols() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 30; ++i) mean += t(i, j);
    mean /= 30.0;
    CHECK(std::abs(mean) < 1e-10);
    double var = 0.0;
    for (std::size_t i = 0; i < 30; ++i) var += t(i, j) * t(i, j);
    var /= 30.0;
    CHECK(var == doctest::Approx(model.explained_variance[j]).epsilon(1e-8));
  }
}

TEST_CASE("full-rank projection reconstructs the data") {
  Rng rng(63);
  const std::size_t n = 20, d = 5;
  const Matrix x = random_matrix(n, d, rng);
  const PcaModel model = pca_fit(x, PcaTarget::fixed(d));  // n - 1 >= d here
  const Matrix t = pca_transform(model, x);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a) {
      double rec = model.mean[a];
      for (std::size_t j = 0; j < d; ++j) rec += t(i, j) * model.components(j, a);
      CHECK(rec == doctest::Approx(x(i, a)).epsilon(1e-8));
    }
}

TEST_CASE("explained variance ratios are a sorted partition") {
  Rng rng(65);
  const Matrix x = random_matrix(25, 7, rng);
  const PcaModel model = pca_fit(x, PcaTarget::fixed(6));
  double prev = 1.0;
  double sum = 0.0;
  for (const double r : model.explained_variance_ratio) {
    CHECK(r > 0.0);
    CHECK(r <= prev + 1e-12);
    prev = r;
    sum += r;
  }
  CHECK(sum <= 1.0 + 1e-9);
  const auto cum = cumulative_explained_variance(model);
  for (std::size_t j = 1; j < cum.size(); ++j) CHECK(cum[j] >= cum[j - 1]);
}

TEST_CASE("cumulative ratios accumulate in order") {
  PcaModel model;
  model.explained_variance_ratio = {0.6, 0.3, 0.1};
  const auto cum = cumulative_explained_variance(model);
  REQUIRE(cum.size() == 3);
  CHECK(cum[0] == doctest::Approx(0.6));
  CHECK(cum[1] == doctest::Approx(0.9));
  CHECK(cum[2] == doctest::Approx(1.0));
}

TEST_CASE("pca rejects impossible requests and bad data") {
  Rng rng(67);
  const Matrix x = random_matrix(6, 4, rng);
  CHECK_THROWS_AS(pca_fit(x, PcaTarget::fixed(5)), RankError);
  CHECK_THROWS_AS(pca_fit(x, PcaTarget::variance(0.0)), InvalidArgument);
  CHECK_THROWS_AS(pca_fit(x, PcaTarget::variance(1.5)), InvalidArgument);

  Matrix one_row(1, 3);
  CHECK_THROWS_AS(pca_fit(one_row, PcaTarget::fixed(1)), InvalidArgument);

  Matrix constant(5, 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) constant(i, j) = 7.0;
  CHECK_THROWS_AS(pca_fit(constant, PcaTarget::fixed(1)), DegenerateDataError);

  Matrix bad = x;
  bad(2, 1) = std::nan("");
  CHECK_THROWS_AS(pca_fit(bad, PcaTarget::fixed(2)), DataError);

  const PcaModel model = pca_fit(x, PcaTarget::fixed(2));
  Matrix narrow(2, 3);
  CHECK_THROWS_AS(pca_transform(model, narrow), ShapeError);
}

TEST_CASE("scaler standardizes a two-point column") {
  Matrix x(2, 1);
  x(0, 0) = 1.0;
  x(1, 0) = 3.0;
  const Scaler scaler = scaler_fit(x);
  REQUIRE(scaler.means.size() == 1);
  CHECK(scaler.means[0] == doctest::Approx(2.0));
  CHECK(scaler.stds[0] == doctest::Approx(1.0));  // population convention
  const Matrix t = scaler_transform(scaler, x);
  CHECK(t(0, 0) == doctest::Approx(-1.0));
  CHECK(t(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("scaler flags constant columns and maps them to zero") {
  Matrix x(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    x(i, 0) = 5.0;
    x(i, 1) = static_cast<double>(i);
  }
  const Scaler scaler = scaler_fit(x);
  CHECK(scaler.stds[0] == 0.0);
  CHECK(scaler.stds[1] > 0.0);
  const Matrix t = scaler_transform(scaler, x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(t(i, 0) == 0.0);
}

TEST_CASE("scaled training columns have zero mean and unit variance") {
  Rng rng(71);
  const Matrix x = random_matrix(40, 5, rng, 3.0);
  const Matrix t = scaler_transform(scaler_fit(x), x);
  for (std::size_t j = 0; j < 5; ++j) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < 40; ++i) mean += t(i, j);
    mean /= 40.0;
    for (std::size_t i = 0; i < 40; ++i) var += (t(i, j) - mean) * (t(i, j) - mean);
    var /= 40.0;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scaler validates its input") {
  Matrix one(1, 2);
  CHECK_THROWS_AS(scaler_fit(one), InvalidArgument);
  Matrix bad(3, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(scaler_fit(bad), DataError);
  Matrix x(3, 2);
  x(0, 0) = 1.0;
  x(1, 0) = 2.0;
  const Scaler scaler = scaler_fit(x);
  Matrix wide(2, 3);
  CHECK_THROWS_AS(scaler_transform(scaler, wide), ShapeError);
}

TEST_CASE("classification after scaling ignores positive per-feature rescaling") {
  Rng rng(73);
  const std::size_t n = 30, d = 4;
  Matrix base(n, d);
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool hot = i % 2 == 0;
    labels[i] = hot ? "hot" : "cold";
    for (std::size_t j = 0; j < d; ++j)
      base(i, j) = rng.normal() + (hot ? 2.0 : -2.0);
  }
  const std::vector<double> gains{0.001, 5.0, 300.0, 1e6};
  Matrix scaled_in(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) scaled_in(i, j) = base(i, j) * gains[j];

  SvmParams params;
  params.c = 10.0;
  const SvmModel model_a =
      svm_train(scaler_transform(scaler_fit(base), base), labels, params);
  const SvmModel model_b =
      svm_train(scaler_transform(scaler_fit(scaled_in), scaled_in), labels, params);

  Matrix probes(10, d);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < d; ++j) probes(i, j) = rng.normal() * 2.0;
  Matrix probes_scaled(10, d);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < d; ++j) probes_scaled(i, j) = probes(i, j) * gains[j];

  const auto pred_a = svm_predict(model_a, scaler_transform(scaler_fit(base), probes));
  const auto pred_b =
      svm_predict(model_b, scaler_transform(scaler_fit(scaled_in), probes_scaled));
  CHECK(pred_a == pred_b);
}
