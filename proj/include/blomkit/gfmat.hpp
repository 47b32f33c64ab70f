#pragma once

// Dense matrices over the prime field GF(q).
//
// Every entry is stored as its least non-negative residue and every operation
// reduces eagerly, so the invariant 0 <= e < q holds for any Matrix value.
// Matrices are immutable once built: operations return fresh values.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blomkit/rng.hpp"

namespace blomkit::gf {

using Residue = std::uint64_t;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ModulusError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A prime q, checked by trial division when constructed. Limited to q < 2^32
/// so that products of two residues fit in 64 bits.
class PrimeModulus {
 public:
  explicit PrimeModulus(std::uint64_t q);

  static bool is_prime(std::uint64_t n);

  std::uint64_t value() const { return q_; }

  Residue reduce(std::int64_t x) const;
  Residue reduce_unsigned(std::uint64_t x) const { return x % q_; }
  Residue add(Residue a, Residue b) const { return (a + b) % q_; }
  Residue sub(Residue a, Residue b) const { return (a + q_ - b) % q_; }
  Residue mul(Residue a, Residue b) const { return (a * b) % q_; }
  Residue pow(Residue base, std::uint64_t exp) const;
  /// Multiplicative inverse by extended Euclid; throws ModulusError for 0.
  Residue inverse(Residue a) const;

  friend bool operator==(const PrimeModulus&, const PrimeModulus&) = default;

 private:
  std::uint64_t q_;
};

/// Counts field operations performed inside a counting session.
struct OpCounter {
  std::uint64_t mults = 0;
  std::uint64_t adds = 0;
  // Modular exponentiation work, measured in cumulative-power multiplications.
  std::uint64_t exps = 0;

  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

class Matrix {
 public:
  /// rows x cols zero matrix.
  Matrix(std::size_t rows, std::size_t cols, PrimeModulus q);

  /// Builds from nested rows; each value is reduced mod q. Ragged input throws.
  static Matrix from_rows(const std::vector<std::vector<std::int64_t>>& rows,
                          PrimeModulus q);
  static Matrix identity(std::size_t n, PrimeModulus q);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const PrimeModulus& modulus() const { return q_; }

  Residue operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  Residue at(std::size_t i, std::size_t j) const;

  std::span<const Residue> row(std::size_t i) const;
  std::vector<Residue> column(std::size_t j) const;
  std::span<const Residue> data() const { return data_; }

  std::vector<std::vector<std::int64_t>> to_rows() const;

  /// Copy with entry (i, j) replaced by value mod q.
  Matrix with(std::size_t i, std::size_t j, std::int64_t value) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  PrimeModulus q_;
  std::vector<Residue> data_;

  friend class MatrixBuilder;
};

/// Mutable staging area used by the algorithms that produce a Matrix.
class MatrixBuilder {
 public:
  MatrixBuilder(std::size_t rows, std::size_t cols, PrimeModulus q)
      : m_(rows, cols, q) {}

  Residue& operator()(std::size_t i, std::size_t j) {
    return m_.data_[i * m_.cols_ + j];
  }
  Matrix build() && { return std::move(m_); }

 private:
  Matrix m_;
};

/// Pairwise-distinct nonzero residues n_1..n_N used as Vandermonde generators.
class VandermondeSeeds {
 public:
  VandermondeSeeds(std::vector<Residue> seeds, const PrimeModulus& q);

  /// Draws count distinct values from [1, q) with the given generator.
  static VandermondeSeeds draw(std::size_t count, const PrimeModulus& q,
                               Rng& rng);

  const std::vector<Residue>& values() const { return seeds_; }
  std::size_t size() const { return seeds_.size(); }

 private:
  std::vector<Residue> seeds_;
};

Matrix mat_mul(const Matrix& a, const Matrix& b, OpCounter* counter = nullptr);
Matrix mat_add(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix reverse_rows(const Matrix& a);

/// (t+1) x N matrix whose row r holds the r-th powers of the seeds.
/// Building column j costs t-1 cumulative multiplications, charged to exps.
Matrix vandermonde(const VandermondeSeeds& seeds, unsigned t,
                   const PrimeModulus& q, OpCounter* counter = nullptr);

/// Uniform residues from the seeded generator. Free under the cost model.
Matrix random_matrix(std::size_t rows, std::size_t cols, const PrimeModulus& q,
                     Rng& rng);
Matrix random_matrix(std::size_t rows, std::size_t cols, const PrimeModulus& q,
                     std::uint64_t seed);

/// m * m^T; symmetric for any square m.
Matrix symmetric_from_random(const Matrix& m, OpCounter* counter = nullptr);

bool is_symmetric(const Matrix& m);

/// Rank over GF(q) by Gaussian elimination.
std::size_t rank(const Matrix& m);

/// Submatrix built from the listed columns, in the given order.
Matrix select_columns(const Matrix& m, std::span<const std::size_t> subset);

bool columns_independent(const Matrix& m, std::span<const std::size_t> subset);

/// Text form: "rows cols q" then one line of space-separated residues per row.
void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is);
std::string to_text(const Matrix& m);
Matrix from_text(const std::string& text);

}  // namespace blomkit::gf
