#pragma once

// Operation-count comparison of the original and modified Blom setups, and
// the standard-vs-mesh array step counts.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blomkit/blom.hpp"
#include "blomkit/mesharray.hpp"

namespace blomkit::bench {

struct Weights {
  std::uint64_t mult = 1;
  std::uint64_t add = 1;
  std::uint64_t exp = 1;

  friend bool operator==(const Weights&, const Weights&) = default;
};

struct BenchRow {
  std::size_t n = 0;
  unsigned t = 0;
  std::uint64_t q = 0;
  blom::Variant scheme = blom::Variant::Modified;
  std::uint64_t field_mults = 0;
  std::uint64_t field_adds = 0;
  std::uint64_t exps = 0;
  std::uint64_t total_ops = 0;

  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

/// t as a function of network size. Default ties t = n - 1 (square P).
struct TRule {
  std::optional<unsigned> fixed;

  unsigned operator()(std::size_t n) const;
  std::string describe() const;
};

struct SweepConfig {
  std::vector<std::size_t> sizes{2, 4, 6, 8, 10, 20, 30, 40, 50, 100, 200};
  TRule t_rule;
  std::uint64_t q = 257;
  std::uint64_t seed = 1;
  Weights weights;
  bool parallel = true;

  void validate() const;
};

/// Counts setup_public + generate_secret + derive_private_matrix.
BenchRow cost_setup(blom::Variant scheme, std::size_t n, unsigned t, std::uint64_t q,
                    std::uint64_t seed, const Weights& weights = {});

struct SweepResult {
  std::vector<BenchRow> rows;  // ordered by size, original before modified
  std::string csv;
};

SweepResult run_sweep(const SweepConfig& config);

std::string sweep_csv(const SweepConfig& config, const std::vector<BenchRow>& rows);
/// Parses the data rows of a sweep CSV (metadata comment is skipped).
std::vector<BenchRow> parse_sweep_csv(const std::string& csv);

std::string mesh_comparison(const std::vector<std::size_t>& n_values);

}  // namespace blomkit::bench
