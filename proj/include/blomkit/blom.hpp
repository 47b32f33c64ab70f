#pragma once

// Blom key predistribution, in both the original (Vandermonde public matrix)
// and modified (random public matrix, rotating secret matrix) forms.
//
// Orientation: P is (t+1) x W, S is (t+1) x (t+1), A = (S P)^T is W x (t+1).
// Node i (0-based) holds row i of A and publishes column i of P; the key
// between i and j is row_i(A) . col_j(P) = (P^T S P)_ij.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "blomkit/gfmat.hpp"

namespace blomkit::blom {

using gf::Matrix;
using gf::OpCounter;
using gf::PrimeModulus;
using gf::Residue;

enum class Variant { Original, Modified };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SchemeParams {
  unsigned t = 1;
  PrimeModulus q{31};
  std::size_t nodes = 2;
  Variant variant = Variant::Modified;

  /// Throws ParamError naming the first violated constraint.
  void validate() const;

  /// Column count of P: nodes for Original, max(nodes, t+1) for Modified.
  std::size_t public_width() const;

  friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

struct PrivateRow {
  std::size_t owner = 0;
  std::vector<Residue> row;
  std::uint64_t epoch = 0;
};

struct PublicColumn {
  std::size_t owner = 0;
  std::vector<Residue> col;
};

struct SharedKey {
  Residue value = 0;
  std::uint64_t epoch = 0;
  std::pair<std::size_t, std::size_t> pair;  // stored as (min, max)

  /// Zero keys are legal but trivially guessable.
  bool weak() const { return value == 0; }
};

struct SchemeState {
  SchemeParams params;
  Matrix pub;
  Matrix secret;
  Matrix priv;
  std::uint64_t epoch = 1;
  std::uint64_t seed = 0;

  PrivateRow private_row(std::size_t node) const;
  PublicColumn public_column(std::size_t node) const;

  friend bool operator==(const SchemeState&, const SchemeState&) = default;
};

Matrix setup_public(const SchemeParams& params, std::uint64_t seed,
                    OpCounter* counter = nullptr);
/// Original-variant public matrix from explicit generators.
Matrix setup_public(const SchemeParams& params, const gf::VandermondeSeeds& seeds,
                    OpCounter* counter = nullptr);

/// S = M M^T for a seeded random (t+1) x (t+1) M.
Matrix generate_secret(const SchemeParams& params, std::uint64_t seed,
                       OpCounter* counter = nullptr);

/// A = (S P)^T. Rejects an asymmetric S.
Matrix derive_private_matrix(const Matrix& secret, const Matrix& pub,
                             OpCounter* counter = nullptr);

SharedKey shared_key(const PrivateRow& row, const PublicColumn& col,
                     const PrimeModulus& q);

/// K = A P; symmetric whenever A came from a symmetric S.
Matrix key_matrix(const Matrix& priv, const Matrix& pub);

namespace rule {
struct SelfTransposeProduct {};
struct AddSymmetric {
  Matrix addend;
};
struct ReversalProduct {};
/// Discards S and draws a fresh M M^T from the rekey seed.
struct FreshSecret {};
}  // namespace rule

using UpdateRule = std::variant<rule::SelfTransposeProduct, rule::AddSymmetric,
                                rule::ReversalProduct, rule::FreshSecret>;

std::string rule_name(const UpdateRule& r);

/// S S^T, S + R, or S J S (J the exchange matrix). FreshSecret is not a
/// function of S and is rejected here; use rekey.
Matrix update_secret(const Matrix& secret, const UpdateRule& r);

/// Full setup: public matrix, secret matrix, private matrix at epoch 1.
SchemeState make_scheme(const SchemeParams& params, std::uint64_t seed,
                        OpCounter* counter = nullptr);

/// State assembled from given P and S (e.g. published fixtures).
SchemeState make_scheme(const SchemeParams& params, Matrix pub, Matrix secret,
                        std::uint64_t epoch = 1);

SchemeState rekey(const SchemeState& state, const UpdateRule& r,
                  std::uint64_t seed);
/// Rekey to an externally supplied secret matrix.
SchemeState rekey_with(const SchemeState& state, Matrix new_secret);

struct TSecurityReport {
  bool pass = true;
  bool exhaustive = true;
  std::uint64_t subsets_checked = 0;
  std::optional<std::vector<std::size_t>> first_failure;

  std::string describe() const;
};

/// Checks that every (t+1)-column subset of P is independent. Enumerates all
/// subsets when there are at most exhaustive_limit of them, otherwise checks
/// sample_count subsets drawn from the seed.
TSecurityReport verify_t_security_structure(const Matrix& pub, unsigned t,
                                            std::uint64_t exhaustive_limit = 200000,
                                            std::uint64_t sample_count = 20000,
                                            std::uint64_t seed = 0);

/// Structured export; the secret matrix is included only for CA exports.
std::string export_state(const SchemeState& state, bool include_secret);
SchemeState import_state(const std::string& text);

}  // namespace blomkit::blom
