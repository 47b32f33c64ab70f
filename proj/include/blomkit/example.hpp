#pragma once

// The published 4-node worked example (q = 31, t = 3) as embedded fixtures,
// plus the demo report and the quick self-check built on top of it.

#include <cstdint>
#include <string>
#include <vector>

#include "blomkit/gfmat.hpp"

namespace blomkit::example {

using Rows = std::vector<std::vector<std::int64_t>>;

struct DirectedKey {
  std::size_t i;  // holder of the private row (1-based)
  std::size_t j;  // owner of the public column (1-based)
  std::int64_t key;
};

struct ReferenceExample {
  std::uint64_t q = 31;
  unsigned t = 3;
  std::vector<std::string> names;
  Rows public_matrix;
  Rows random_factor;            // M, with S = M M^T
  Rows secret;                   // S
  Rows secret_times_public;      // S P before reduction
  Rows private_rows;             // A = (S P)^T mod q
  std::vector<DirectedKey> keys;  // all 12 directed pairs
  Rows next_secret_printed;      // S' as published (entry (0,0) printed as 36)
  Rows next_secret_recomputed;   // S J S computed exactly ((0,0) = 32)
  Rows next_private_rows;        // A' from the printed S'
  std::int64_t epoch1_bob_charlie = 0;
  std::int64_t epoch2_bob_charlie = 25;
};

const ReferenceExample& reference();

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::vector<Check> checks;
  std::string text;

  bool ok() const;
  /// Name and detail of the first failing check, empty if none.
  std::string first_failure() const;
};

/// Printable walk-through of the example; each section is checked against the
/// fixture values.
Report demo(const ReferenceExample& ex = reference());

/// Fast self-check: example reproduction, randomized key agreement and mesh
/// schedule validation for n <= 6.
Report verify(const ReferenceExample& ex = reference(), std::size_t agreement_trials = 200,
              std::uint64_t seed = 1);

/// Bundled scenario documents by name ("paper_demo", "intrusion", ...).
std::vector<std::string> bundled_scenario_names();
const std::string* bundled_scenario(const std::string& name);

}  // namespace blomkit::example
