#include <doctest.h>

#include "blomkit/blom.hpp"
#include "oracles.hpp"

using namespace blomkit;
using namespace blomkit::blom;

namespace {

const PrimeModulus q31{31};
const oracle::Rows kP = {{1, 2, 3, 4}, {1, 0, 1, 1}, {2, 1, 3, 1}, {4, 0, 9, 5}};
const oracle::Rows kS = {{3, 2, 2, 4}, {2, 6, 1, 5}, {2, 1, 2, 4}, {4, 5, 4, 14}};
const oracle::Rows kSNextPrinted = {
    {36, 37, 26, 76}, {37, 32, 31, 77}, {26, 31, 20, 58}, {76, 77, 58, 152}};

SchemeParams example_params() { return SchemeParams{3, q31, 4, Variant::Modified}; }

SchemeState example_state() {
  return make_scheme(example_params(), Matrix::from_rows(kP, q31), Matrix::from_rows(kS, q31));
}

}  // namespace

TEST_CASE("params") {
  CHECK_NOTHROW(example_params().validate());
  CHECK_THROWS_AS((SchemeParams{0, q31, 4, Variant::Modified}.validate()), ParamError);
  CHECK_THROWS_AS((SchemeParams{1, q31, 1, Variant::Modified}.validate()), ParamError);
  CHECK_THROWS_AS((SchemeParams{2, q31, 31, Variant::Original}.validate()), ParamError);
  CHECK_NOTHROW((SchemeParams{2, q31, 30, Variant::Original}.validate()));
  CHECK((SchemeParams{5, q31, 3, Variant::Modified}.public_width()) == 6);
  CHECK((SchemeParams{2, q31, 9, Variant::Modified}.public_width()) == 9);
  CHECK(parse_variant("original") == Variant::Original);
  CHECK(to_string(Variant::Modified) == "modified");
  CHECK_THROWS_AS(parse_variant("blom"), ParamError);
}

TEST_CASE("setup_public") {
  const SchemeParams original{1, q31, 3, Variant::Original};
  CHECK(setup_public(original, gf::VandermondeSeeds({1, 2, 3}, q31)).to_rows() ==
        oracle::Rows{{1, 1, 1}, {1, 2, 3}});
  CHECK(setup_public(example_params(), 42) == setup_public(example_params(), 42));
  CHECK(setup_public(original, 42) == setup_public(original, 42));
  const auto p = setup_public(SchemeParams{2, q31, 7, Variant::Modified}, 1);
  CHECK(p.rows() == 3);
  CHECK(p.cols() == 7);
  CHECK_THROWS_AS(setup_public(SchemeParams{1, q31, 40, Variant::Original}, 1), ParamError);
  CHECK_THROWS_AS(setup_public(original, gf::VandermondeSeeds({1, 2}, q31)), ParamError);
}

TEST_CASE("generate_secret") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = generate_secret(SchemeParams{4, q31, 6, Variant::Modified}, seed);
    CHECK(s.rows() == 5);
    CHECK(gf::is_symmetric(s));
  }
}

TEST_CASE("derive_private_matrix") {
  const auto pub = Matrix::from_rows(kP, q31);
  const auto a = derive_private_matrix(Matrix::from_rows(kS, q31), pub);
  CHECK(a.to_rows() ==
        oracle::Rows{{25, 30, 23, 11}, {8, 5, 6, 12}, {22, 29, 18, 0}, {5, 9, 0, 2}});
  CHECK(derive_private_matrix(Matrix::identity(4, q31), pub) == gf::transpose(pub));
  CHECK(derive_private_matrix(Matrix::from_rows(kSNextPrinted, q31), pub).to_rows() ==
        oracle::Rows{{26, 5, 19, 9}, {5, 12, 10, 24}, {8, 30, 9, 18}, {29, 7, 11, 21}});
  CHECK_THROWS_AS(derive_private_matrix(Matrix::from_rows({{1, 2}, {3, 4}}, q31),
                                        Matrix::from_rows({{1}, {1}}, q31)),
                  std::invalid_argument);
  CHECK_THROWS_AS(derive_private_matrix(Matrix::identity(3, q31), pub), gf::DimensionError);
}

TEST_CASE("shared_key") {
  CHECK(shared_key(PrivateRow{2, {8, 5, 6, 12}, 1}, PublicColumn{3, {3, 1, 3, 9}}, q31).value == 0);
  CHECK(shared_key(PrivateRow{1, {25, 30, 23, 11}, 1}, PublicColumn{2, {2, 0, 1, 0}}, q31).value ==
        11);
  CHECK(shared_key(PrivateRow{1, {0, 0, 0}, 1}, PublicColumn{2, {5, 6, 7}}, q31).value == 0);
  const auto k = shared_key(PrivateRow{3, {22, 29, 18, 0}, 4}, PublicColumn{2, {2, 0, 1, 0}}, q31);
  CHECK(k.pair == std::pair<std::size_t, std::size_t>{2, 3});
  CHECK(k.epoch == 4);
  CHECK(k.weak());
  CHECK_THROWS_AS(shared_key(PrivateRow{1, {1, 2}, 1}, PublicColumn{2, {1, 2, 3}}, q31),
                  gf::DimensionError);
}

TEST_CASE("key_matrix") {
  const auto state = example_state();
  const auto k = key_matrix(state.priv, state.pub).to_rows();
  CHECK(k[0][1] == 11);
  CHECK(k[0][2] == 25);
  CHECK(k[0][3] == 22);
  CHECK(k[1][2] == 0);
  CHECK(k[1][3] == 10);
  CHECK(k[2][3] == 11);
  CHECK(k == oracle::transpose(k));

  const auto id = Matrix::identity(3, q31);
  const auto kid = key_matrix(derive_private_matrix(id, id), id);
  CHECK(kid == id);
  CHECK_THROWS_AS(key_matrix(state.priv, Matrix::identity(3, q31)), gf::DimensionError);
}

TEST_CASE("key agreement and independent key path") {
  Rng rng(2718);
  const std::uint64_t primes[] = {31, 101, 257};
  for (int trial = 0; trial < 300; ++trial) {
    const PrimeModulus q(primes[rng.below(3)]);
    const unsigned t = 1 + static_cast<unsigned>(rng.below(4));
    const std::size_t n = 2 + rng.below(5);
    const SchemeParams params{t, q, n, trial % 2 ? Variant::Original : Variant::Modified};
    const auto state = make_scheme(params, rng.next());
    const auto qi = static_cast<std::int64_t>(q.value());
    const auto p = state.pub.to_rows();
    const auto direct = oracle::mul(oracle::mul(oracle::transpose(p), state.secret.to_rows(), qi), p, qi);
    CHECK(key_matrix(state.priv, state.pub).to_rows() == direct);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const auto kij = shared_key(state.private_row(i), state.public_column(j), q);
        const auto kji = shared_key(state.private_row(j), state.public_column(i), q);
        CHECK(kij.value == kji.value);
        CHECK(kij.value == static_cast<Residue>(direct[i][j]));
      }
    }
  }
}

TEST_CASE("update_secret") {
  const auto s = Matrix::from_rows(kS, q31);
  SUBCASE("reversal product, checked without reduction") {
    const auto exact = oracle::mul(kS, {kS[3], kS[2], kS[1], kS[0]});
    CHECK(exact == oracle::Rows{{32, 37, 26, 76}, {37, 32, 31, 77}, {26, 31, 20, 58}, {76, 77, 58, 152}});
    CHECK(update_secret(s, rule::ReversalProduct{}).to_rows() == oracle::reduce(exact, 31));
    const PrimeModulus big(2147483647);
    CHECK(update_secret(Matrix::from_rows(kS, big), rule::ReversalProduct{}).to_rows() == exact);
    int differing = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) differing += exact[i][j] != kSNextPrinted[i][j];
    }
    CHECK(differing == 1);
    CHECK(kSNextPrinted[0][0] == 36);
  }
  SUBCASE("other rules") {
    const auto id = Matrix::identity(4, q31);
    CHECK(update_secret(id, rule::SelfTransposeProduct{}) == id);
    CHECK(update_secret(s, rule::AddSymmetric{Matrix(4, 4, q31)}) == s);
    CHECK(update_secret(s, rule::SelfTransposeProduct{}) == gf::mat_mul(s, s));
    CHECK_THROWS_AS(update_secret(s, rule::AddSymmetric{Matrix::from_rows({{0, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}, q31)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(update_secret(Matrix::from_rows({{0, 1}, {2, 0}}, q31), rule::ReversalProduct{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(update_secret(s, rule::FreshSecret{}), std::invalid_argument);
  }
  SUBCASE("every rule keeps symmetry") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
      const auto n = 1 + rng.below(7);
      const auto base = gf::symmetric_from_random(gf::random_matrix(n, n, q31, rng));
      const auto addend = gf::symmetric_from_random(gf::random_matrix(n, n, q31, rng));
      CHECK(gf::is_symmetric(update_secret(base, rule::SelfTransposeProduct{})));
      CHECK(gf::is_symmetric(update_secret(base, rule::AddSymmetric{addend})));
      CHECK(gf::is_symmetric(update_secret(base, rule::ReversalProduct{})));
    }
  }
}

TEST_CASE("rekey") {
  const auto state = example_state();
  SUBCASE("published next secret") {
    const auto next = rekey_with(state, Matrix::from_rows(kSNextPrinted, q31));
    CHECK(next.epoch == 2);
    CHECK(next.pub == state.pub);
    const auto bc = shared_key(next.private_row(1), next.public_column(2), q31);
    const auto cb = shared_key(next.private_row(2), next.public_column(1), q31);
    CHECK(bc.value == 25);
    CHECK(cb.value == 25);
    CHECK(bc.epoch == 2);
    const auto stale = shared_key(state.private_row(1), next.public_column(2), q31);
    CHECK(stale.value == 0);
    CHECK(stale.value != bc.value);
  }
  SUBCASE("epochs and consistency") {
    const UpdateRule rules[] = {rule::ReversalProduct{}, rule::SelfTransposeProduct{},
                                rule::FreshSecret{},
                                rule::AddSymmetric{Matrix::identity(4, q31)}};
    auto s = state;
    std::uint64_t epoch = s.epoch;
    for (int round = 0; round < 8; ++round) {
      s = rekey(s, rules[round % 4], 5);
      CHECK(s.epoch == ++epoch);
      CHECK(gf::is_symmetric(s.secret));
      CHECK(s.priv == derive_private_matrix(s.secret, s.pub));
      CHECK(s.pub == state.pub);
    }
    CHECK(rekey(rekey(state, rule::ReversalProduct{}, 1), rule::ReversalProduct{}, 1).epoch ==
          state.epoch + 2);
    CHECK(rekey(state, rule::FreshSecret{}, 3) == rekey(state, rule::FreshSecret{}, 3));
  }
  CHECK_THROWS_AS(rekey_with(state, Matrix::from_rows({{0, 1}, {2, 0}}, q31)), std::invalid_argument);
  CHECK(rule_name(rule::ReversalProduct{}) == "reversal");
}

TEST_CASE("op counts of setup") {
  OpCounter original;
  make_scheme(SchemeParams{3, q31, 4, Variant::Original}, 1, &original);
  CHECK(original.exps == 4 * 2);
  OpCounter modified;
  make_scheme(SchemeParams{3, q31, 4, Variant::Modified}, 1, &modified);
  CHECK(modified.exps == 0);
  // M M^T plus S P, both 4 x 4 x 4.
  CHECK(modified.mults == 64 + 64);
  CHECK(original.mults == modified.mults);
}

TEST_CASE("t-security structure") {
  const auto v = gf::vandermonde(gf::VandermondeSeeds({1, 2, 3, 4, 5, 6}, q31), 2, q31);
  const auto report = verify_t_security_structure(v, 2);
  CHECK(report.pass);
  CHECK(report.exhaustive);
  CHECK(report.subsets_checked == 20);
  for (const auto& s : oracle::subsets(6, 3)) {
    CHECK(oracle::columns_independent_brute(v.to_rows(), s, 31));
  }

  const auto zero_col = Matrix::from_rows({{1, 0, 3}, {2, 0, 5}}, q31);
  const auto zc = verify_t_security_structure(zero_col, 1);
  CHECK_FALSE(zc.pass);
  REQUIRE(zc.first_failure);
  CHECK(*zc.first_failure == std::vector<std::size_t>{0, 1});

  const auto twin = Matrix::from_rows({{1, 7, 1}, {2, 3, 2}}, q31);
  const auto tw = verify_t_security_structure(twin, 1);
  CHECK_FALSE(tw.pass);
  CHECK(*tw.first_failure == std::vector<std::size_t>{0, 2});

  Rng rng(3);
  const PrimeModulus q101(101);
  const auto big = gf::vandermonde(gf::VandermondeSeeds::draw(60, q101, rng), 5, q101);
  const auto sampled = verify_t_security_structure(big, 5, 1000, 300, 1);
  CHECK(sampled.pass);
  CHECK_FALSE(sampled.exhaustive);
  CHECK(sampled.subsets_checked == 300);
  CHECK(sampled.describe().find("sampled") != std::string::npos);

  CHECK_THROWS(verify_t_security_structure(Matrix::identity(2, q31), 2));
}

TEST_CASE("state export and import") {
  const auto state = make_scheme(SchemeParams{3, q31, 4, Variant::Modified}, 7);
  const auto doc = export_state(state, true);
  CHECK(export_state(import_state(doc), true) == doc);
  CHECK(import_state(doc) == state);
  const auto pub_only = export_state(state, false);
  CHECK(pub_only.find("\"secret\"") == std::string::npos);
  const auto back = import_state(pub_only);
  CHECK(back.priv == state.priv);
  CHECK(back.pub == state.pub);
  CHECK(doc.find("mt19937_64") != std::string::npos);

  auto corrupted = doc;
  const auto pos = corrupted.find("\"private\"");
  REQUIRE(pos != std::string::npos);
  corrupted.replace(corrupted.find_first_of("0123456789", pos), 1, "9");
  if (corrupted != doc) CHECK_THROWS(import_state(corrupted));
  CHECK_THROWS(import_state("{}"));
  CHECK_THROWS(import_state("not json"));
}
