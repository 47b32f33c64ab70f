#include "blomkit/example.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include "blomkit/blom.hpp"
#include "blomkit/mesharray.hpp"
#include "blomkit/rng.hpp"

namespace blomkit::example {

namespace {

#include "bundled_scenarios.inc"

ReferenceExample build_reference() {
  ReferenceExample ex;
  ex.names = {"Alice", "Bob", "Charlie", "David"};
  ex.public_matrix = {{1, 2, 3, 4}, {1, 0, 1, 1}, {2, 1, 3, 1}, {4, 0, 9, 5}};
  // The published second factor equals the transpose of this one.
  ex.random_factor = {{1, 0, 1, 1}, {1, 2, 0, 1}, {0, 0, 1, 1}, {0, 2, 3, 1}};
  ex.secret = {{3, 2, 2, 4}, {2, 6, 1, 5}, {2, 1, 2, 4}, {4, 5, 4, 14}};
  ex.secret_times_public = {{25, 8, 53, 36}, {30, 5, 60, 40}, {23, 6, 49, 31}, {73, 12, 155, 95}};
  ex.private_rows = {{25, 30, 23, 11}, {8, 5, 6, 12}, {22, 29, 18, 0}, {5, 9, 0, 2}};
  // The published row for K(1,4) shows the private key as [25 30 23 1]; the
  // listed key 22 needs the last entry to be 11, as in every other row.
  ex.keys = {{1, 2, 11}, {2, 1, 11}, {1, 3, 25}, {3, 1, 25}, {1, 4, 22}, {4, 1, 22},
             {2, 3, 0},  {3, 2, 0},  {2, 4, 10}, {4, 2, 10}, {3, 4, 11}, {4, 3, 11}};
  ex.next_secret_printed = {{36, 37, 26, 76}, {37, 32, 31, 77}, {26, 31, 20, 58}, {76, 77, 58, 152}};
  ex.next_secret_recomputed = {{32, 37, 26, 76}, {37, 32, 31, 77}, {26, 31, 20, 58}, {76, 77, 58, 152}};
  ex.next_private_rows = {{26, 5, 19, 9}, {5, 12, 10, 24}, {8, 30, 9, 18}, {29, 7, 11, 21}};
  ex.epoch1_bob_charlie = 0;
  ex.epoch2_bob_charlie = 25;
  return ex;
}

void print_rows(std::ostream& os, const Rows& rows) {
  for (const auto& r : rows) {
    for (auto v : r) os << std::setw(5) << v;
    os << '\n';
  }
}

std::string vec(const std::vector<std::int64_t>& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << std::setw(2) << v[i];
  os << ']';
  return os.str();
}

std::vector<gf::Residue> copy_of(std::span<const gf::Residue> v) { return {v.begin(), v.end()}; }

std::string first_diff(const Rows& got, const Rows& want) {
  if (got.size() != want.size()) return "row count differs";
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].size() != want[i].size()) return "row " + std::to_string(i) + " length differs";
    for (std::size_t j = 0; j < got[i].size(); ++j) {
      if (got[i][j] != want[i][j]) {
        return "cell (" + std::to_string(i) + "," + std::to_string(j) + ") = " +
               std::to_string(got[i][j]) + ", expected " + std::to_string(want[i][j]);
      }
    }
  }
  return {};
}

Check compare(const std::string& name, const Rows& got, const Rows& want) {
  auto diff = first_diff(got, want);
  return Check{name, diff.empty(), diff.empty() ? "match" : diff};
}

}  // namespace

const ReferenceExample& reference() {
  static const ReferenceExample ex = build_reference();
  return ex;
}

bool Report::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string Report::first_failure() const {
  for (const auto& c : checks) {
    if (!c.pass) return c.name + ": " + c.detail;
  }
  return {};
}

Report demo(const ReferenceExample& ex) {
  Report report;
  std::ostringstream os;
  const gf::PrimeModulus q(ex.q);
  const auto pub = gf::Matrix::from_rows(ex.public_matrix, q);
  const auto m = gf::Matrix::from_rows(ex.random_factor, q);
  const auto secret = gf::symmetric_from_random(m);

  os << "Worked example: q = " << ex.q << ", t = " << ex.t << ", nodes";
  for (std::size_t i = 0; i < ex.names.size(); ++i) os << ' ' << ex.names[i] << '=' << i + 1;
  os << "\n\nPublic matrix P\n";
  print_rows(os, pub.to_rows());
  os << "\nRandom factor M\n";
  print_rows(os, m.to_rows());
  os << "\nSecret matrix S = M M^T mod " << ex.q << '\n';
  print_rows(os, secret.to_rows());
  report.checks.push_back(compare("secret", secret.to_rows(), ex.secret));

  // S P over the integers, before reduction.
  const auto sp_exact = mesh::direct_product(mesh::IntMatrix::from_rows(ex.secret),
                                             mesh::IntMatrix::from_rows(ex.public_matrix));
  os << "\nS P (exact)\n";
  print_rows(os, sp_exact.to_rows());
  report.checks.push_back(compare("secret_times_public", sp_exact.to_rows(), ex.secret_times_public));

  const auto fixture_secret = gf::Matrix::from_rows(ex.secret, q);
  const auto priv = blom::derive_private_matrix(fixture_secret, pub);
  os << "\nPrivate matrix A = (S P)^T mod " << ex.q << '\n';
  print_rows(os, priv.to_rows());
  report.checks.push_back(compare("private_rows", priv.to_rows(), ex.private_rows));

  os << "\n" << std::left << std::setw(10) << "pair" << std::setw(16) << "public^T"
     << std::setw(16) << "private" << "key\n" << std::right;
  std::string key_diff;
  for (const auto& k : ex.keys) {
    const blom::PrivateRow row{k.i - 1, copy_of(priv.row(k.i - 1)), 1};
    const blom::PublicColumn col{k.j - 1, pub.column(k.j - 1)};
    const auto key = blom::shared_key(row, col, q);
    const std::string pair = "K(" + std::to_string(k.i) + "," + std::to_string(k.j) + ")";
    os << std::left << std::setw(10) << pair << std::setw(16)
       << vec({col.col.begin(), col.col.end()}) << std::setw(16)
       << vec({row.row.begin(), row.row.end()}) << std::right << key.value << '\n';
    if (key_diff.empty() && static_cast<std::int64_t>(key.value) != k.key) {
      key_diff = pair + " = " + std::to_string(key.value) + ", expected " + std::to_string(k.key);
    }
  }
  report.checks.push_back(Check{"key_table", key_diff.empty(), key_diff.empty() ? "12 keys match" : key_diff});

  const auto bob_charlie_1 = blom::shared_key({1, copy_of(priv.row(1)), 1},
                                              {2, pub.column(2)}, q);
  report.checks.push_back(Check{"epoch1_bob_charlie",
                                static_cast<std::int64_t>(bob_charlie_1.value) == ex.epoch1_bob_charlie,
                                std::to_string(bob_charlie_1.value)});

  // Epoch 2.
  const auto reversal = mesh::direct_product(
      mesh::IntMatrix::from_rows(ex.secret),
      mesh::IntMatrix::from_rows(Rows(ex.secret.rbegin(), ex.secret.rend())));
  os << "\nEpoch 2: S' = S J S (J reverses row order), exact\n";
  print_rows(os, reversal.to_rows());
  report.checks.push_back(compare("next_secret_recomputed", reversal.to_rows(), ex.next_secret_recomputed));
  for (std::size_t i = 0; i < ex.next_secret_printed.size(); ++i) {
    for (std::size_t j = 0; j < ex.next_secret_printed[i].size(); ++j) {
      if (ex.next_secret_printed[i][j] != reversal(i, j)) {
        os << "published S' has " << ex.next_secret_printed[i][j] << " at (" << i << "," << j
           << ") where S J S gives " << reversal(i, j) << '\n';
      }
    }
  }
  os << "The published S' is used below.\n";

  const auto next_secret = gf::Matrix::from_rows(ex.next_secret_printed, q);
  const auto next_priv = blom::derive_private_matrix(next_secret, pub);
  os << "\nA' = (S' P)^T mod " << ex.q << '\n';
  print_rows(os, next_priv.to_rows());
  report.checks.push_back(compare("next_private_rows", next_priv.to_rows(), ex.next_private_rows));

  const auto bc = blom::shared_key({1, copy_of(next_priv.row(1)), 2}, {2, pub.column(2)}, q);
  const auto cb = blom::shared_key({2, copy_of(next_priv.row(2)), 2}, {1, pub.column(1)}, q);
  os << "\nK(Bob,Charlie) = " << bc.value << "   K(Charlie,Bob) = " << cb.value << '\n';
  const bool epoch2_ok = static_cast<std::int64_t>(bc.value) == ex.epoch2_bob_charlie &&
                         static_cast<std::int64_t>(cb.value) == ex.epoch2_bob_charlie;
  report.checks.push_back(Check{"epoch2_bob_charlie", epoch2_ok,
                                std::to_string(bc.value) + "/" + std::to_string(cb.value)});

  os << '\n';
  for (const auto& c : report.checks) {
    os << (c.pass ? "ok   " : "FAIL ") << c.name << (c.pass ? "" : ": " + c.detail) << '\n';
  }
  report.text = os.str();
  return report;
}

Report verify(const ReferenceExample& ex, std::size_t agreement_trials, std::uint64_t seed) {
  Report report;
  Report d;
  try {
    d = demo(ex);
  } catch (const std::exception& e) {
    d.checks.push_back(Check{"private_rows", false, e.what()});
  }
  auto group = [&](const std::string& name, std::initializer_list<const char*> members) {
    Check c{name, true, "match"};
    for (const auto& sub : d.checks) {
      if (std::find_if(members.begin(), members.end(),
                       [&](const char* m) { return sub.name == m; }) == members.end()) {
        continue;
      }
      if (!sub.pass && c.pass) {
        c.pass = false;
        c.detail = sub.name + ": " + sub.detail;
      }
    }
    report.checks.push_back(c);
  };
  group("key_table_reproduction", {"secret_times_public", "private_rows", "key_table", "epoch1_bob_charlie"});
  group("next_epoch_reproduction", {"next_private_rows", "epoch2_bob_charlie"});
  group("secret_generation", {"secret", "next_secret_recomputed"});

  // Randomized key agreement across both variants.
  {
    Rng rng(seed);
    const std::uint64_t primes[] = {31, 101, 257};
    Check c{"key_agreement", true, std::to_string(agreement_trials) + " trials"};
    for (std::size_t trial = 0; trial < agreement_trials && c.pass; ++trial) {
      const unsigned t = 1 + static_cast<unsigned>(rng.below(8));
      const std::size_t n = 2 + rng.below(11);
      const auto variant = trial % 2 == 0 ? blom::Variant::Modified : blom::Variant::Original;
      const blom::SchemeParams params{t, gf::PrimeModulus(primes[rng.below(3)]), n, variant};
      const auto state = blom::make_scheme(params, rng.next());
      const auto k = blom::key_matrix(state.priv, state.pub);
      if (!gf::is_symmetric(k)) {
        c.pass = false;
        c.detail = "asymmetric key matrix at trial " + std::to_string(trial);
      }
    }
    report.checks.push_back(c);
  }

  {
    Check c{"mesh_schedules", true, "n = 1..6"};
    for (std::size_t n = 1; n <= 6 && c.pass; ++n) {
      const auto mr = mesh::validate_schedule(mesh::mesh_schedule(n));
      const auto sr = mesh::validate_schedule(mesh::standard_schedule(n));
      if (!mr.ok() || mr.makespan != 2 * n - 1 || !sr.coverage || !sr.contiguity ||
          sr.makespan != 3 * n - 2) {
        c.pass = false;
        c.detail = "schedule check failed at n = " + std::to_string(n);
      }
    }
    report.checks.push_back(c);
  }

  std::ostringstream os;
  for (const auto& c : report.checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
  }
  report.text = os.str();
  return report;
}

std::vector<std::string> bundled_scenario_names() {
  std::vector<std::string> names;
  for (const auto& s : kBundledScenarios) names.emplace_back(s.name);
  return names;
}

const std::string* bundled_scenario(const std::string& name) {
  static const std::map<std::string, std::string> table = [] {
    std::map<std::string, std::string> t;
    for (const auto& s : kBundledScenarios) t.emplace(s.name, s.text);
    return t;
  }();
  const auto it = table.find(name);
  return it == table.end() ? nullptr : &it->second;
}

}  // namespace blomkit::example
