#include "blomkit/gfmat.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace blomkit::gf {

namespace {

constexpr std::uint64_t kMaxModulus = 1ULL << 32;

void require_same_modulus(const Matrix& a, const Matrix& b, const char* op) {
  if (a.modulus() != b.modulus()) {
    throw ModulusError(std::string(op) + ": operands use different moduli (" +
                       std::to_string(a.modulus().value()) + " vs " +
                       std::to_string(b.modulus().value()) + ")");
  }
}

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

// --- PrimeModulus ----------------------------------------------------------

bool PrimeModulus::is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n < 4) return true;
  if (n % 2 == 0) return false;
  for (std::uint64_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

PrimeModulus::PrimeModulus(std::uint64_t q) : q_(q) {
  if (q >= kMaxModulus) {
    throw ModulusError("modulus " + std::to_string(q) + " exceeds 2^32");
  }
  if (!is_prime(q)) {
    throw ModulusError("modulus " + std::to_string(q) + " is not prime");
  }
}

Residue PrimeModulus::reduce(std::int64_t x) const {
  const auto q = static_cast<std::int64_t>(q_);
  std::int64_t r = x % q;
  if (r < 0) r += q;
  return static_cast<Residue>(r);
}

Residue PrimeModulus::pow(Residue base, std::uint64_t exp) const {
  Residue result = 1 % q_;
  base %= q_;
  while (exp > 0) {
    if (exp & 1) result = mul(result, base);
    base = mul(base, base);
    exp >>= 1;
  }
  return result;
}

Residue PrimeModulus::inverse(Residue a) const {
  a %= q_;
  if (a == 0) throw ModulusError("zero has no inverse");
  std::int64_t old_r = static_cast<std::int64_t>(a);
  std::int64_t r = static_cast<std::int64_t>(q_);
  std::int64_t old_s = 1;
  std::int64_t s = 0;
  while (r != 0) {
    const std::int64_t quot = old_r / r;
    old_r = std::exchange(r, old_r - quot * r);
    old_s = std::exchange(s, old_s - quot * s);
  }
  return reduce(old_s);
}

// --- Matrix ----------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols, PrimeModulus q)
    : rows_(rows), cols_(cols), q_(q), data_(rows * cols, 0) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("matrix dimensions must be positive");
  }
}

Matrix Matrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows,
                         PrimeModulus q) {
  if (rows.empty() || rows.front().empty()) {
    throw DimensionError("matrix must have at least one row and column");
  }
  MatrixBuilder out(rows.size(), rows.front().size(), q);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw DimensionError("ragged rows: row " + std::to_string(i) + " has " +
                           std::to_string(rows[i].size()) + " entries, expected " +
                           std::to_string(rows.front().size()));
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(i, j) = q.reduce(rows[i][j]);
    }
  }
  return std::move(out).build();
}

Matrix Matrix::identity(std::size_t n, PrimeModulus q) {
  MatrixBuilder out(n, n, q);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1;
  return std::move(out).build();
}

Residue Matrix::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) {
    throw std::out_of_range("matrix index (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") outside " + dims(*this));
  }
  return (*this)(i, j);
}

std::span<const Residue> Matrix::row(std::size_t i) const {
  if (i >= rows_) throw std::out_of_range("row index out of range");
  return std::span<const Residue>(data_).subspan(i * cols_, cols_);
}

std::vector<Residue> Matrix::column(std::size_t j) const {
  if (j >= cols_) throw std::out_of_range("column index out of range");
  std::vector<Residue> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

std::vector<std::vector<std::int64_t>> Matrix::to_rows() const {
  std::vector<std::vector<std::int64_t>> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    out[i].assign(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }
  return out;
}

Matrix Matrix::with(std::size_t i, std::size_t j, std::int64_t value) const {
  Matrix copy = *this;
  if (i >= rows_ || j >= cols_) throw std::out_of_range("with: index out of range");
  copy.data_[i * cols_ + j] = q_.reduce(value);
  return copy;
}

// --- VandermondeSeeds ------------------------------------------------------

VandermondeSeeds::VandermondeSeeds(std::vector<Residue> seeds,
                                   const PrimeModulus& q)
    : seeds_(std::move(seeds)) {
  std::unordered_set<Residue> seen;
  for (Residue s : seeds_) {
    if (s == 0 || s >= q.value()) {
      throw std::invalid_argument("Vandermonde seed " + std::to_string(s) +
                                  " is not a nonzero residue mod " +
                                  std::to_string(q.value()));
    }
    if (!seen.insert(s).second) {
      throw std::invalid_argument("Vandermonde seed collision on " +
                                  std::to_string(s));
    }
  }
}

VandermondeSeeds VandermondeSeeds::draw(std::size_t count,
                                        const PrimeModulus& q, Rng& rng) {
  const std::uint64_t available = q.value() - 1;
  if (count > available) {
    throw std::invalid_argument("cannot draw " + std::to_string(count) +
                                " distinct nonzero seeds mod " +
                                std::to_string(q.value()));
  }
  // Partial Fisher-Yates over 1..q-1.
  std::vector<Residue> pool(available);
  std::iota(pool.begin(), pool.end(), Residue{1});
  for (std::size_t i = 0; i < count; ++i) {
    const auto pick = i + rng.below(available - i);
    std::swap(pool[i], pool[pick]);
  }
  pool.resize(count);
  return VandermondeSeeds(std::move(pool), q);
}

// --- operations ------------------------------------------------------------

Matrix mat_mul(const Matrix& a, const Matrix& b, OpCounter* counter) {
  require_same_modulus(a, b, "mat_mul");
  if (a.cols() != b.rows()) {
    throw DimensionError("mat_mul: cannot multiply " + dims(a) + " by " + dims(b));
  }
  const auto& q = a.modulus();
  const std::size_t inner = a.cols();
  MatrixBuilder out(a.rows(), b.cols(), q);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Residue acc = 0;
      for (std::size_t k = 0; k < inner; ++k) {
        acc = q.add(acc, q.mul(a(i, k), b(k, j)));
      }
      out(i, j) = acc;
    }
  }
  if (counter != nullptr) {
    const std::uint64_t cells = a.rows() * b.cols();
    counter->mults += cells * inner;
    counter->adds += cells * (inner - 1);
  }
  return std::move(out).build();
}

Matrix mat_add(const Matrix& a, const Matrix& b) {
  require_same_modulus(a, b, "mat_add");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("mat_add: cannot add " + dims(a) + " and " + dims(b));
  }
  MatrixBuilder out(a.rows(), a.cols(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(i, j) = a.modulus().add(a(i, j), b(i, j));
    }
  }
  return std::move(out).build();
}

Matrix transpose(const Matrix& a) {
  MatrixBuilder out(a.cols(), a.rows(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return std::move(out).build();
}

Matrix reverse_rows(const Matrix& a) {
  MatrixBuilder out(a.rows(), a.cols(), a.modulus());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(i, j) = a(a.rows() - 1 - i, j);
    }
  }
  return std::move(out).build();
}

Matrix vandermonde(const VandermondeSeeds& seeds, unsigned t,
                   const PrimeModulus& q, OpCounter* counter) {
  if (t < 1) throw std::invalid_argument("vandermonde: t must be at least 1");
  if (std::uint64_t{t} + 1 > q.value()) {
    throw std::invalid_argument("vandermonde: t+1 = " + std::to_string(t + 1) +
                                " exceeds q = " + std::to_string(q.value()));
  }
  if (seeds.size() == 0) throw DimensionError("vandermonde: no seeds");
  MatrixBuilder out(t + 1, seeds.size(), q);
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    const Residue n = seeds.values()[j] % q.value();
    out(0, j) = 1;
    out(1, j) = n;
    for (unsigned r = 2; r <= t; ++r) out(r, j) = q.mul(out(r - 1, j), n);
  }
  if (counter != nullptr) counter->exps += seeds.size() * (t - 1);
  return std::move(out).build();
}

Matrix random_matrix(std::size_t rows, std::size_t cols, const PrimeModulus& q,
                     Rng& rng) {
  MatrixBuilder out(rows, cols, q);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = rng.below(q.value());
  }
  return std::move(out).build();
}

Matrix random_matrix(std::size_t rows, std::size_t cols, const PrimeModulus& q,
                     std::uint64_t seed) {
  Rng rng(seed);
  return random_matrix(rows, cols, q, rng);
}

Matrix symmetric_from_random(const Matrix& m, OpCounter* counter) {
  if (m.rows() != m.cols()) {
    throw DimensionError("symmetric_from_random: input " + dims(m) +
                         " is not square");
  }
  return mat_mul(m, transpose(m), counter);
}

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) return false;
    }
  }
  return true;
}

std::size_t rank(const Matrix& m) {
  const auto& q = m.modulus();
  std::vector<Residue> w(m.data().begin(), m.data().end());
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  auto cell = [&](std::size_t i, std::size_t j) -> Residue& {
    return w[i * cols + j];
  };

  std::size_t pivot_row = 0;
  for (std::size_t col = 0; col < cols && pivot_row < rows; ++col) {
    std::size_t found = pivot_row;
    while (found < rows && cell(found, col) == 0) ++found;
    if (found == rows) continue;
    if (found != pivot_row) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(cell(found, j), cell(pivot_row, j));
    }
    const Residue inv = q.inverse(cell(pivot_row, col));
    for (std::size_t j = col; j < cols; ++j) cell(pivot_row, j) = q.mul(cell(pivot_row, j), inv);
    for (std::size_t i = pivot_row + 1; i < rows; ++i) {
      const Residue factor = cell(i, col);
      if (factor == 0) continue;
      for (std::size_t j = col; j < cols; ++j) {
        cell(i, j) = q.sub(cell(i, j), q.mul(factor, cell(pivot_row, j)));
      }
    }
    ++pivot_row;
  }
  return pivot_row;
}

Matrix select_columns(const Matrix& m, std::span<const std::size_t> subset) {
  if (subset.empty()) throw DimensionError("select_columns: empty subset");
  std::unordered_set<std::size_t> seen;
  for (std::size_t c : subset) {
    if (c >= m.cols()) {
      throw std::out_of_range("column index " + std::to_string(c) +
                              " outside " + dims(m));
    }
    if (!seen.insert(c).second) {
      throw std::invalid_argument("duplicate column index " + std::to_string(c));
    }
  }
  MatrixBuilder out(m.rows(), subset.size(), m.modulus());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = 0; k < subset.size(); ++k) out(i, k) = m(i, subset[k]);
  }
  return std::move(out).build();
}

bool columns_independent(const Matrix& m, std::span<const std::size_t> subset) {
  return rank(select_columns(m, subset)) == subset.size();
}

// --- text format -----------------------------------------------------------

void write_matrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << ' ' << m.cols() << ' ' << m.modulus().value() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j != 0) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
}

Matrix read_matrix(std::istream& is) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t q = 0;
  if (!(is >> rows >> cols >> q)) {
    throw std::invalid_argument("matrix text: expected header 'rows cols q'");
  }
  const PrimeModulus modulus(q);
  MatrixBuilder out(rows, cols, modulus);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      std::uint64_t v = 0;
      if (!(is >> v)) {
        throw std::invalid_argument("matrix text: missing entry (" +
                                    std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      }
      if (v >= q) {
        throw std::invalid_argument("matrix text: entry " + std::to_string(v) +
                                    " is not a residue mod " + std::to_string(q));
      }
      out(i, j) = v;
    }
  }
  return std::move(out).build();
}

std::string to_text(const Matrix& m) {
  std::ostringstream os;
  write_matrix(os, m);
  return os.str();
}

Matrix from_text(const std::string& text) {
  std::istringstream is(text);
  return read_matrix(is);
}

}  // namespace blomkit::gf
