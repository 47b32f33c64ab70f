#include "blomkit/blom.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "blomkit/rng.hpp"

namespace blomkit::blom {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kPublicStream = 1;
constexpr std::uint64_t kSecretStream = 2;
constexpr std::uint64_t kRekeyStream = 3;

void require_symmetric(const Matrix& m, const char* what) {
  if (!gf::is_symmetric(m)) {
    throw std::invalid_argument(std::string(what) + ": secret matrix is not symmetric");
  }
}

// Binomial coefficient, saturating at UINT64_MAX.
std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  __extension__ using Wide = unsigned __int128;
  Wide result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(result);
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t pos = k; pos-- > 0;) {
    if (idx[pos] < n - k + pos) {
      ++idx[pos];
      for (std::size_t r = pos + 1; r < k; ++r) idx[r] = idx[r - 1] + 1;
      return true;
    }
  }
  return false;
}

ordered_json matrix_json(const Matrix& m) { return m.to_rows(); }

Matrix matrix_from_json(const ordered_json& j, const PrimeModulus& q) {
  return Matrix::from_rows(j.get<std::vector<std::vector<std::int64_t>>>(), q);
}

}  // namespace

std::string to_string(Variant v) {
  return v == Variant::Original ? "original" : "modified";
}

Variant parse_variant(const std::string& name) {
  if (name == "original") return Variant::Original;
  if (name == "modified") return Variant::Modified;
  throw ParamError("unknown variant '" + name + "' (expected original|modified)");
}

void SchemeParams::validate() const {
  if (t < 1) throw ParamError("t must be at least 1");
  if (nodes < 2) throw ParamError("network needs at least 2 nodes");
  if (std::uint64_t{t} + 1 > q.value()) {
    throw ParamError("t+1 = " + std::to_string(t + 1) + " exceeds q = " +
                     std::to_string(q.value()));
  }
  if (variant == Variant::Original && nodes > q.value() - 1) {
    throw ParamError("original variant needs " + std::to_string(nodes) +
                     " distinct nonzero seeds but q-1 = " +
                     std::to_string(q.value() - 1));
  }
}

std::size_t SchemeParams::public_width() const {
  if (variant == Variant::Original) return nodes;
  return std::max<std::size_t>(nodes, t + 1);
}

PrivateRow SchemeState::private_row(std::size_t node) const {
  const auto r = priv.row(node);
  return PrivateRow{node, {r.begin(), r.end()}, epoch};
}

PublicColumn SchemeState::public_column(std::size_t node) const {
  return PublicColumn{node, pub.column(node)};
}

Matrix setup_public(const SchemeParams& params, std::uint64_t seed,
                    OpCounter* counter) {
  params.validate();
  Rng rng(derive_seed(seed, kPublicStream));
  if (params.variant == Variant::Original) {
    return setup_public(params, gf::VandermondeSeeds::draw(params.nodes, params.q, rng),
                        counter);
  }
  return gf::random_matrix(params.t + 1, params.public_width(), params.q, rng);
}

Matrix setup_public(const SchemeParams& params, const gf::VandermondeSeeds& seeds,
                    OpCounter* counter) {
  if (seeds.size() != params.nodes) {
    throw ParamError("expected " + std::to_string(params.nodes) +
                     " Vandermonde seeds, got " + std::to_string(seeds.size()));
  }
  return gf::vandermonde(seeds, params.t, params.q, counter);
}

Matrix generate_secret(const SchemeParams& params, std::uint64_t seed,
                       OpCounter* counter) {
  params.validate();
  const auto m = gf::random_matrix(params.t + 1, params.t + 1, params.q,
                                   derive_seed(seed, kSecretStream));
  return gf::symmetric_from_random(m, counter);
}

Matrix derive_private_matrix(const Matrix& secret, const Matrix& pub,
                             OpCounter* counter) {
  require_symmetric(secret, "derive_private_matrix");
  if (secret.cols() != pub.rows()) {
    throw gf::DimensionError("derive_private_matrix: S is " +
                             std::to_string(secret.rows()) + "x" +
                             std::to_string(secret.cols()) + " but P has " +
                             std::to_string(pub.rows()) + " rows");
  }
  return gf::transpose(gf::mat_mul(secret, pub, counter));
}

SharedKey shared_key(const PrivateRow& row, const PublicColumn& col,
                     const PrimeModulus& q) {
  if (row.row.size() != col.col.size()) {
    throw gf::DimensionError("shared_key: private row has " +
                             std::to_string(row.row.size()) +
                             " entries, public column has " +
                             std::to_string(col.col.size()));
  }
  Residue acc = 0;
  for (std::size_t k = 0; k < row.row.size(); ++k) {
    acc = q.add(acc, q.mul(row.row[k] % q.value(), col.col[k] % q.value()));
  }
  return SharedKey{acc, row.epoch, std::minmax(row.owner, col.owner)};
}

Matrix key_matrix(const Matrix& priv, const Matrix& pub) {
  return gf::mat_mul(priv, pub);
}

std::string rule_name(const UpdateRule& r) {
  struct Namer {
    std::string operator()(const rule::SelfTransposeProduct&) const { return "self_transpose"; }
    std::string operator()(const rule::AddSymmetric&) const { return "add_symmetric"; }
    std::string operator()(const rule::ReversalProduct&) const { return "reversal"; }
    std::string operator()(const rule::FreshSecret&) const { return "fresh"; }
  };
  return std::visit(Namer{}, r);
}

Matrix update_secret(const Matrix& secret, const UpdateRule& r) {
  require_symmetric(secret, "update_secret");
  struct Apply {
    const Matrix& s;
    Matrix operator()(const rule::SelfTransposeProduct&) const {
      return gf::mat_mul(s, gf::transpose(s));
    }
    Matrix operator()(const rule::AddSymmetric& add) const {
      require_symmetric(add.addend, "update_secret(add_symmetric)");
      return gf::mat_add(s, add.addend);
    }
    // S J S is symmetric since J is: (S J S)^T = S^T J^T S^T = S J S.
    Matrix operator()(const rule::ReversalProduct&) const {
      return gf::mat_mul(s, gf::reverse_rows(s));
    }
    Matrix operator()(const rule::FreshSecret&) const {
      throw std::invalid_argument("update_secret: fresh secrets come from rekey");
    }
  };
  return std::visit(Apply{secret}, r);
}

SchemeState make_scheme(const SchemeParams& params, std::uint64_t seed,
                        OpCounter* counter) {
  auto pub = setup_public(params, seed, counter);
  auto secret = generate_secret(params, seed, counter);
  auto priv = derive_private_matrix(secret, pub, counter);
  return SchemeState{params, std::move(pub), std::move(secret), std::move(priv), 1, seed};
}

SchemeState make_scheme(const SchemeParams& params, Matrix pub, Matrix secret,
                        std::uint64_t epoch) {
  params.validate();
  if (pub.modulus() != params.q || secret.modulus() != params.q) {
    throw gf::ModulusError("make_scheme: matrices do not use q = " +
                           std::to_string(params.q.value()));
  }
  if (pub.rows() != params.t + 1 || pub.cols() < params.nodes) {
    throw gf::DimensionError("make_scheme: public matrix must be (t+1) x >=N");
  }
  auto priv = derive_private_matrix(secret, pub);
  return SchemeState{params, std::move(pub), std::move(secret), std::move(priv), epoch, 0};
}

SchemeState rekey(const SchemeState& state, const UpdateRule& r,
                  std::uint64_t seed) {
  if (std::holds_alternative<rule::FreshSecret>(r)) {
    return rekey_with(state, generate_secret(state.params,
                                             derive_seed(seed, kRekeyStream, state.epoch)));
  }
  return rekey_with(state, update_secret(state.secret, r));
}

SchemeState rekey_with(const SchemeState& state, Matrix new_secret) {
  auto priv = derive_private_matrix(new_secret, state.pub);
  return SchemeState{state.params, state.pub, std::move(new_secret), std::move(priv),
                     state.epoch + 1, state.seed};
}

std::string TSecurityReport::describe() const {
  std::ostringstream os;
  os << (pass ? "pass" : "fail") << " (" << subsets_checked << " subsets, "
     << (exhaustive ? "exhaustive" : "sampled") << ")";
  if (first_failure) {
    os << " first dependent subset {";
    for (std::size_t i = 0; i < first_failure->size(); ++i) {
      os << (i ? "," : "") << (*first_failure)[i];
    }
    os << "}";
  }
  return os.str();
}

TSecurityReport verify_t_security_structure(const Matrix& pub, unsigned t,
                                            std::uint64_t exhaustive_limit,
                                            std::uint64_t sample_count,
                                            std::uint64_t seed) {
  if (pub.rows() < std::size_t{t} + 1) {
    throw gf::DimensionError("verify_t_security_structure: P has fewer than t+1 rows");
  }
  const std::size_t k = std::min<std::size_t>(t + 1, pub.cols());
  const std::size_t n = pub.cols();
  TSecurityReport report;
  auto check = [&](const std::vector<std::size_t>& subset) {
    ++report.subsets_checked;
    if (!gf::columns_independent(pub, subset)) {
      report.pass = false;
      report.first_failure = subset;
      return false;
    }
    return true;
  };

  if (choose(n, k) <= exhaustive_limit) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    do {
      if (!check(idx)) break;
    } while (next_combination(idx, n));
    return report;
  }

  report.exhaustive = false;
  Rng rng(seed);
  std::vector<std::size_t> pool(n);
  for (std::uint64_t s = 0; s < sample_count; ++s) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + rng.below(n - i)]);
    }
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(subset.begin(), subset.end());
    if (!check(subset)) break;
  }
  return report;
}

std::string export_state(const SchemeState& state, bool include_secret) {
  ordered_json j;
  j["format"] = "blomkit-scheme/1";
  j["params"] = {{"t", state.params.t},
                 {"q", state.params.q.value()},
                 {"nodes", state.params.nodes},
                 {"variant", to_string(state.params.variant)}};
  j["epoch"] = state.epoch;
  j["seed"] = state.seed;
  j["generator"] = std::string(Rng::kGeneratorId);
  j["public"] = matrix_json(state.pub);
  if (include_secret) j["secret"] = matrix_json(state.secret);
  j["private"] = matrix_json(state.priv);
  return j.dump(2) + "\n";
}

SchemeState import_state(const std::string& text) {
  const auto j = ordered_json::parse(text);
  if (j.value("format", "") != "blomkit-scheme/1") {
    throw std::invalid_argument("not a blomkit scheme document");
  }
  const auto& p = j.at("params");
  SchemeParams params{p.at("t").get<unsigned>(), PrimeModulus(p.at("q").get<std::uint64_t>()),
                      p.at("nodes").get<std::size_t>(),
                      parse_variant(p.at("variant").get<std::string>())};
  params.validate();
  auto pub = matrix_from_json(j.at("public"), params.q);
  auto priv = matrix_from_json(j.at("private"), params.q);
  // Node-side exports omit S; keep a zero placeholder of the right shape.
  auto secret = j.contains("secret") ? matrix_from_json(j.at("secret"), params.q)
                                     : Matrix(params.t + 1, params.t + 1, params.q);
  if (j.contains("secret") && gf::transpose(gf::mat_mul(secret, pub)) != priv) {
    throw std::invalid_argument("scheme document: private matrix does not equal (S P)^T");
  }
  return SchemeState{params, std::move(pub), std::move(secret), std::move(priv),
                     j.at("epoch").get<std::uint64_t>(), j.at("seed").get<std::uint64_t>()};
}

}  // namespace blomkit::blom
