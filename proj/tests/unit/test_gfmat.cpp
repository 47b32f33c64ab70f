#include <doctest.h>

#include <cmath>
#include <sstream>

#include "blomkit/gfmat.hpp"
#include "oracles.hpp"

using namespace blomkit;
using namespace blomkit::gf;

namespace {

const PrimeModulus q31{31};

const oracle::Rows kM = {{1, 0, 1, 1}, {1, 2, 0, 1}, {0, 0, 1, 1}, {0, 2, 3, 1}};
const oracle::Rows kS = {{3, 2, 2, 4}, {2, 6, 1, 5}, {2, 1, 2, 4}, {4, 5, 4, 14}};
const oracle::Rows kP = {{1, 2, 3, 4}, {1, 0, 1, 1}, {2, 1, 3, 1}, {4, 0, 9, 5}};

Matrix M(const oracle::Rows& r, const PrimeModulus& q = q31) { return Matrix::from_rows(r, q); }

Matrix random_of(Rng& rng, std::size_t r, std::size_t c, const PrimeModulus& q) {
  return random_matrix(r, c, q, rng);
}

}  // namespace

TEST_CASE("prime modulus") {
  CHECK(PrimeModulus::is_prime(2));
  CHECK(PrimeModulus::is_prime(31));
  CHECK(PrimeModulus::is_prime(4294967291ULL));
  CHECK_FALSE(PrimeModulus::is_prime(1));
  CHECK_FALSE(PrimeModulus::is_prime(30));
  CHECK_FALSE(PrimeModulus::is_prime(961));
  CHECK_THROWS_AS(PrimeModulus(30), ModulusError);
  CHECK_THROWS_AS(PrimeModulus(1), ModulusError);
  CHECK_THROWS_AS(PrimeModulus(0), ModulusError);
  CHECK_THROWS_AS(PrimeModulus(4294967311ULL), ModulusError);

  CHECK(q31.reduce(-1) == 30);
  CHECK(q31.reduce(155) == 0);
  CHECK(q31.pow(2, 5) == 1);
  for (Residue a = 1; a < 31; ++a) CHECK(q31.mul(a, q31.inverse(a)) == 1);
  CHECK_THROWS_AS(q31.inverse(0), ModulusError);
}

TEST_CASE("matrix construction") {
  const auto m = M({{32, -1}, {62, 5}});
  CHECK(m.to_rows() == oracle::Rows{{1, 30}, {0, 5}});
  CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}, q31), DimensionError);
  CHECK_THROWS_AS(Matrix::from_rows({}, q31), DimensionError);
  CHECK_THROWS_AS(m.at(2, 0), std::out_of_range);
  CHECK(m.with(0, 0, 33)(0, 0) == 2);
  CHECK(m(0, 0) == 1);
}

TEST_CASE("mat_mul") {
  SUBCASE("M times its transpose gives S") {
    CHECK(mat_mul(M(kM), transpose(M(kM))).to_rows() == kS);
  }
  SUBCASE("identity is neutral") {
    CHECK(mat_mul(Matrix::identity(4, q31), M(kM)) == M(kM));
  }
  SUBCASE("S P reduced") {
    const oracle::Rows expected = {
        {25, 8, 22, 5}, {30, 5, 29, 9}, {23, 6, 18, 0}, {11, 12, 0, 2}};
    CHECK(mat_mul(M(kS), M(kP)).to_rows() == expected);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(mat_mul(M({{1, 2}}), M({{1, 2}})), DimensionError);
    CHECK_THROWS_AS(mat_mul(M({{1}}), Matrix::identity(1, PrimeModulus(7))), ModulusError);
  }
  SUBCASE("operation counts") {
    Rng rng(3);
    for (std::size_t r = 1; r <= 5; ++r) {
      for (std::size_t k = 1; k <= 5; ++k) {
        for (std::size_t c = 1; c <= 5; ++c) {
          OpCounter counter;
          mat_mul(random_of(rng, r, k, q31), random_of(rng, k, c, q31), &counter);
          CHECK(counter.mults == r * c * k);
          CHECK(counter.adds == r * c * (k - 1));
          CHECK(counter.exps == 0);
        }
      }
    }
  }
}

TEST_CASE("mat_add") {
  CHECK(mat_add(M(kM), Matrix(4, 4, q31)) == M(kM));
  CHECK(mat_add(M({{1, 2}, {2, 1}}), M({{3, 0}, {0, 3}})).to_rows() == oracle::Rows{{4, 2}, {2, 4}});
  CHECK(mat_add(M({{30, 30}, {30, 30}}), M({{2, 2}, {2, 2}})).to_rows() ==
        oracle::Rows{{1, 1}, {1, 1}});
  CHECK_THROWS_AS(mat_add(M({{1, 2}}), M({{1}, {2}})), DimensionError);
  CHECK_THROWS_AS(mat_add(M({{1}}), Matrix(1, 1, PrimeModulus(7))), ModulusError);
}

TEST_CASE("transpose and reverse_rows") {
  CHECK(transpose(M({{1, 2, 3}, {4, 5, 6}})).to_rows() == oracle::Rows{{1, 4}, {2, 5}, {3, 6}});
  CHECK(transpose(M(kS)) == M(kS));
  CHECK(reverse_rows(M(kS)).to_rows() ==
        oracle::Rows{{4, 5, 4, 14}, {2, 1, 2, 4}, {2, 6, 1, 5}, {3, 2, 2, 4}});
  CHECK(reverse_rows(M({{7, 8, 9}})) == M({{7, 8, 9}}));

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = 1 + rng.below(6);
    const auto c = 1 + rng.below(6);
    const auto m = random_of(rng, r, c, q31);
    CHECK(transpose(transpose(m)) == m);
    CHECK(reverse_rows(reverse_rows(m)) == m);
    oracle::Rows exchange(r, std::vector<std::int64_t>(r, 0));
    for (std::size_t i = 0; i < r; ++i) exchange[i][r - 1 - i] = 1;
    CHECK(reverse_rows(m).to_rows() == oracle::mul(exchange, m.to_rows(), 31));
  }
}

TEST_CASE("vandermonde") {
  CHECK(vandermonde(VandermondeSeeds({1, 2, 3}, q31), 1, q31).to_rows() ==
        oracle::Rows{{1, 1, 1}, {1, 2, 3}});
  CHECK(vandermonde(VandermondeSeeds({2, 3}, q31), 2, q31).to_rows() ==
        oracle::Rows{{1, 1}, {2, 3}, {4, 9}});

  SUBCASE("seeds 1..8, t = 3: every 4 columns independent") {
    const auto v = vandermonde(VandermondeSeeds({1, 2, 3, 4, 5, 6, 7, 8}, q31), 3, q31);
    const auto rows = v.to_rows();
    for (const auto& s : oracle::subsets(8, 4)) {
      oracle::Rows sub(4, std::vector<std::int64_t>(4));
      for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) sub[r][c] = rows[r][s[c]];
      }
      CHECK(oracle::det_mod(sub, 31) != 0);
      CHECK(columns_independent(v, s));
    }
  }
  SUBCASE("rank of square Vandermonde with distinct seeds") {
    CHECK(rank(vandermonde(VandermondeSeeds({1, 2, 3, 4}, q31), 3, q31)) == 4);
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
      const PrimeModulus q(trial % 2 ? 101 : 31);
      const unsigned t = 1 + static_cast<unsigned>(rng.below(6));
      const auto seeds = VandermondeSeeds::draw(t + 1, q, rng);
      CHECK(rank(vandermonde(seeds, t, q)) == t + 1);
    }
  }
  SUBCASE("cost model") {
    OpCounter counter;
    vandermonde(VandermondeSeeds({1, 2, 3, 4, 5}, q31), 3, q31, &counter);
    CHECK(counter.exps == 5 * 2);
    CHECK(counter.mults == 0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(VandermondeSeeds({1, 2, 2}, q31), std::invalid_argument);
    CHECK_THROWS_AS(VandermondeSeeds({0, 1}, q31), std::invalid_argument);
    CHECK_THROWS_AS(VandermondeSeeds({1, 32}, q31), std::invalid_argument);
    const PrimeModulus q5(5);
    CHECK_THROWS_AS(vandermonde(VandermondeSeeds({1, 2}, q5), 5, q5), std::invalid_argument);
    Rng rng(1);
    CHECK_THROWS_AS(VandermondeSeeds::draw(31, q31, rng), std::invalid_argument);
    CHECK(VandermondeSeeds::draw(30, q31, rng).size() == 30);
  }
}

TEST_CASE("random_matrix") {
  CHECK(random_matrix(4, 4, q31, 99) == random_matrix(4, 4, q31, 99));
  CHECK(random_matrix(4, 4, q31, 99) != random_matrix(4, 4, q31, 100));
  const auto one = random_matrix(1, 1, q31, 5);
  CHECK(one.rows() == 1);
  CHECK(one(0, 0) < 31);

  SUBCASE("residue frequencies are uniform") {
    const auto m = random_matrix(100, 100, q31, 2024);
    std::vector<double> freq(31, 0.0);
    for (auto v : m.data()) freq[v] += 1;
    const double n = 10000.0;
    const double p = 1.0 / 31.0;
    const double expected = n * p;
    const double sigma = std::sqrt(n * p * (1 - p));
    double chi2 = 0;
    for (double f : freq) {
      CHECK(std::abs(f - expected) < 5 * sigma);
      chi2 += (f - expected) * (f - expected) / expected;
    }
    // 30 degrees of freedom; 5 sigma above the mean of the chi-square law.
    CHECK(chi2 < 30 + 5 * std::sqrt(60.0));
  }
}

TEST_CASE("symmetric_from_random and is_symmetric") {
  CHECK(symmetric_from_random(M(kM)).to_rows() == kS);
  CHECK(symmetric_from_random(Matrix::identity(5, q31)) == Matrix::identity(5, q31));
  CHECK_THROWS_AS(symmetric_from_random(M({{1, 2}})), DimensionError);
  CHECK(is_symmetric(M(kS)));
  CHECK_FALSE(is_symmetric(M({{0, 1}, {2, 0}})));
  CHECK(is_symmetric(M({{9}})));
  CHECK_FALSE(is_symmetric(M({{1, 2}})));
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 1 + rng.below(7);
    CHECK(is_symmetric(symmetric_from_random(random_of(rng, n, n, q31))));
  }
}

TEST_CASE("rank and columns_independent") {
  CHECK(rank(Matrix::identity(4, q31)) == 4);
  CHECK(rank(Matrix(3, 5, q31)) == 0);
  const std::vector<std::size_t> all3{0, 1, 2};
  CHECK(columns_independent(Matrix::identity(3, q31), all3));
  const auto dup = M({{1, 1, 0}, {2, 2, 1}, {3, 3, 4}});
  const std::vector<std::size_t> both{0, 1};
  CHECK_FALSE(columns_independent(dup, both));
  const std::vector<std::size_t> bad{0, 3};
  CHECK_THROWS_AS(columns_independent(dup, bad), std::out_of_range);
  const std::vector<std::size_t> repeated{1, 1};
  CHECK_THROWS_AS(columns_independent(dup, repeated), std::invalid_argument);

  SUBCASE("published P") {
    const std::vector<std::size_t> all4{0, 1, 2, 3};
    const bool expected = oracle::det_mod(kP, 31) != 0;
    CHECK(oracle::det_mod(kP, 31) == 6);
    CHECK(columns_independent(M(kP), all4) == expected);
  }
  SUBCASE("agrees with brute force on small fields") {
    const PrimeModulus q5(5);
    Rng rng(21);
    for (int trial = 0; trial < 60; ++trial) {
      const auto rows = 1 + rng.below(4);
      const auto cols = 1 + rng.below(4);
      const auto m = random_of(rng, rows, cols, q5);
      std::vector<std::size_t> all(cols);
      for (std::size_t c = 0; c < cols; ++c) all[c] = c;
      CHECK(columns_independent(m, all) == oracle::columns_independent_brute(m.to_rows(), all, 5));
    }
  }
  SUBCASE("rank of transpose") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const PrimeModulus q(trial % 3 == 0 ? 2 : 31);
      const auto m = random_of(rng, 1 + rng.below(6), 1 + rng.below(6), q);
      CHECK(rank(m) == rank(transpose(m)));
    }
  }
}

TEST_CASE("algebraic properties") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const PrimeModulus q(trial % 2 ? 31 : 257);
    const auto d1 = 1 + rng.below(6);
    const auto d2 = 1 + rng.below(6);
    const auto d3 = 1 + rng.below(6);
    const auto d4 = 1 + rng.below(6);
    const auto a = random_of(rng, d1, d2, q);
    const auto b = random_of(rng, d2, d3, q);
    const auto c = random_of(rng, d3, d4, q);
    const auto ab = mat_mul(a, b);
    CHECK(mat_mul(ab, c) == mat_mul(a, mat_mul(b, c)));
    CHECK(transpose(ab) == mat_mul(transpose(b), transpose(a)));
    CHECK(ab.to_rows() == oracle::mul(a.to_rows(), b.to_rows(), static_cast<std::int64_t>(q.value())));
    for (auto v : ab.data()) CHECK(v < q.value());
  }
}

TEST_CASE("text format round trip") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_of(rng, 1 + rng.below(5), 1 + rng.below(5), PrimeModulus(101));
    CHECK(from_text(to_text(m)) == m);
  }
  CHECK(to_text(M({{1, 2}, {3, 4}})) == "2 2 31\n1 2\n3 4\n");
  CHECK_THROWS(from_text("2 2 31\n1 2\n3\n"));
  CHECK_THROWS(from_text("2 2 30\n1 2\n3 4\n"));
  CHECK_THROWS(from_text("1 2 31\n1 40\n"));
  CHECK_THROWS(from_text("garbage"));
}
