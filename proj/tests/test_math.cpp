#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rfsc/errors.hpp"
#include "rfsc/math.hpp"
#include "rfsc/rng.hpp"

using namespace rfsc;

namespace {

Matrix random_symmetric(std::size_t d, Rng& rng) {
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = rng.normal();
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

std::uint64_t digest_of(const std::string& s) {
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

}  // namespace

TEST_CASE("matrix storage is row major with live row spans") {
  Matrix m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK_FALSE(m.empty());
  m(0, 0) = 1.0;
  m(0, 2) = 3.0;
  m(1, 1) = 5.0;
  CHECK(m.data()[0] == 1.0);
  CHECK(m.data()[2] == 3.0);
  CHECK(m.data()[4] == 5.0);
  auto r1 = m.row(1);
  CHECK(r1.size() == 3);
  r1[0] = 9.0;
  CHECK(m(1, 0) == 9.0);
  CHECK(Matrix().empty());
}

TEST_CASE("dot product") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{4.0, -5.0, 6.0};
  CHECK(dot(a, b) == doctest::Approx(12.0));
  CHECK(dot(std::vector<double>{}, std::vector<double>{}) == 0.0);
}

TEST_CASE("eigendecomposition of a diagonal matrix") {
  Matrix a(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 3.0;
  a(2, 2) = 2.0;
  const auto eig = symmetric_eigen(a);
  REQUIRE(eig.values.size() == 3);
  CHECK(eig.values[0] == doctest::Approx(3.0));
  CHECK(eig.values[1] == doctest::Approx(2.0));
  CHECK(eig.values[2] == doctest::Approx(1.0));
  // eigenvector columns are signed unit axes
  CHECK(std::abs(eig.vectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(eig.vectors(2, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(eig.vectors(0, 2)) == doctest::Approx(1.0));
}

TEST_CASE("symmetric eigendecomposition matches a Jacobi reference") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 11);
    const Matrix a = random_symmetric(d, rng);
    const auto mine = symmetric_eigen(a);
    const auto ref = oracle::jacobi_eigen(a);
    REQUIRE(mine.values.size() == d);
    const double scale = std::max({1.0, std::abs(ref.values.front()),
                                   std::abs(ref.values.back())});
    for (std::size_t j = 0; j < d; ++j) {
      CHECK(std::abs(mine.values[j] - ref.values[j]) <= 1e-9 * scale);
      if (j + 1 < d) CHECK(mine.values[j] >= mine.values[j + 1] - 1e-12 * scale);
    }
    // residual and orthonormality pin the eigenvectors without sign fights
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < d; ++i) {
        double av = 0.0;
        for (std::size_t k = 0; k < d; ++k) av += a(i, k) * mine.vectors(k, j);
        CHECK(std::abs(av - mine.values[j] * mine.vectors(i, j)) <= 1e-9 * scale);
      }
      for (std::size_t j2 = 0; j2 <= j; ++j2) {
        double g = 0.0;
        for (std::size_t k = 0; k < d; ++k) g += mine.vectors(k, j) * mine.vectors(k, j2);
        CHECK(std::abs(g - (j == j2 ? 1.0 : 0.0)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("base64 encodes the reference vectors") {
  auto enc = [](const std::string& s) {
    return base64_encode({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foo") == "Zm9v");
  CHECK(enc("foob") == "Zm9vYg==");
  CHECK(enc("foobar") == "Zm9vYmFy");
}

TEST_CASE("base64 round trips random payloads") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::uint8_t> bytes(rng.next_below(200));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next_below(256));
    const auto text = base64_encode(bytes);
    CHECK(base64_decode(text) == bytes);
  }
}

TEST_CASE("base64 rejects malformed text") {
  CHECK_THROWS_AS(base64_decode("abc"), FormatError);
  CHECK_THROWS_AS(base64_decode("a?=="), FormatError);
  CHECK_THROWS_AS(base64_decode("=abc"), FormatError);
  CHECK_THROWS_AS(base64_decode("ab=c"), FormatError);
}

TEST_CASE("fnv1a64 known digests") {
  CHECK(digest_of("") == 0xcbf29ce484222325ull);
  CHECK(digest_of("a") == 0xaf63dc4c8601ec8cull);
  CHECK(digest_of("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("rng streams are reproducible") {
  Rng a(123), b(123), c(124);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_diff = any_diff || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform stays in range and covers it") {
  Rng rng(5);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-3.0, 5.0);
    CHECK(u >= -3.0);
    CHECK(u < 5.0);
  }
}

TEST_CASE("next_below is unbiased enough and in range") {
  Rng rng(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.next_below(7)];
  for (const int c : counts) {
    CHECK(c > 9000);
    CHECK(c < 11000);
  }
}

TEST_CASE("normal draws have standard moments") {
  Rng rng(17);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("normal_complex has unit total variance") {
  Rng rng(19);
  double power = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) power += std::norm(rng.normal_complex());
  CHECK(power / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("shuffle permutes without losing elements") {
  Rng rng(23);
  std::vector<int> items(50);
  std::iota(items.begin(), items.end(), 0);
  auto shuffled = items;
  rng.shuffle(shuffled);
  CHECK(shuffled != items);  // 50! leaves no realistic chance of identity
  auto sorted = shuffled;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == items);
}

TEST_CASE("derive_seed separates streams and is stable") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
  CHECK(derive_seed(42, 7) != derive_seed(43, 7));
}
