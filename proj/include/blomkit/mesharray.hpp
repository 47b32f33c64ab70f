#pragma once

// Step-accurate simulation of n x n processor arrays computing C = A B.
//
// Node (i, j) (1-indexed) owns c_ij. A schedule says, for every node and
// step, which term k it multiply-accumulates (a_ik * b_kj) or that it idles.
// Two schedules are built in:
//   standard: t = i + j + k - 2, the skewed systolic array, 3n-2 steps;
//   mesh:     node (i, j) runs steps max(i,j) .. max(i,j)+n-1 and takes
//             k = t - i - j + 2 (mod n); operands circulate on two planes,
//             a-values one column right per step and b-values one row down,
//             both with wraparound. Finishes in 2n-1 steps.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blomkit/gfmat.hpp"

namespace blomkit::mesh {

/// Exact integer n x n matrix used as simulator input and output.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  static IntMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);
  static IntMatrix from_gf(const gf::Matrix& m);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::int64_t& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::vector<std::vector<std::int64_t>> to_rows() const;

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> data_;
};

struct ArrayConfig {
  std::size_t n = 1;
  std::optional<gf::PrimeModulus> modulus;
};

/// One multiply-accumulate: node (i, j) uses term k at step t. All 1-indexed.
struct Assignment {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t step = 0;
  std::size_t k = 0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

class Schedule {
 public:
  /// Throws if an index is out of range or a node gets two terms in one step.
  Schedule(std::size_t n, std::vector<Assignment> assignments, std::string name = "custom");

  std::size_t n() const { return n_; }
  std::size_t makespan() const { return makespan_; }
  const std::string& name() const { return name_; }
  const std::vector<Assignment>& assignments() const { return assignments_; }

  /// Term used by node (i, j) at step t, or nullopt when idle.
  std::optional<std::size_t> term(std::size_t i, std::size_t j, std::size_t step) const;

  /// Copy without the assignment of node (i, j) at step t.
  Schedule without(std::size_t i, std::size_t j, std::size_t step) const;

 private:
  std::size_t index(std::size_t i, std::size_t j, std::size_t step) const;

  std::size_t n_;
  std::size_t makespan_ = 0;
  std::string name_;
  std::vector<Assignment> assignments_;
  std::vector<std::uint32_t> grid_;  // 0 = idle
};

Schedule standard_schedule(std::size_t n);
Schedule mesh_schedule(std::size_t n);

struct TraceRecord {
  std::size_t step;
  std::size_t i;
  std::size_t j;
  std::size_t k;
  std::int64_t partial_sum;
};

struct SimulationTrace {
  std::size_t n = 0;
  std::size_t steps_used = 0;
  /// accumulators[s] is the n x n accumulator state after step s+1.
  std::vector<IntMatrix> accumulators;
  /// terms[s](i, j) = number of terms node (i, j) has absorbed after step s+1.
  std::vector<IntMatrix> terms;
  std::vector<TraceRecord> records;
  IntMatrix result;

  /// Accumulator of node (i, j) (1-indexed) right after its count-th active step.
  std::int64_t accumulator_after_active_steps(std::size_t i, std::size_t j,
                                              std::size_t count) const;
};

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Runs every step of the schedule. Throws ScheduleError when some (i, j, k)
/// is never assigned, gf::DimensionError on shape mismatch.
SimulationTrace simulate(const IntMatrix& a, const IntMatrix& b,
                         const Schedule& schedule, const ArrayConfig& config);
SimulationTrace simulate(const gf::Matrix& a, const gf::Matrix& b,
                         const Schedule& schedule);

/// Plain triple-loop product used as the reference.
IntMatrix direct_product(const IntMatrix& a, const IntMatrix& b,
                         const std::optional<gf::PrimeModulus>& modulus = std::nullopt);

struct ScheduleReport {
  bool coverage = true;
  bool contiguity = true;
  bool movement = true;
  std::size_t makespan = 0;
  std::vector<std::string> problems;

  bool ok() const { return coverage && contiguity && movement; }
};

ScheduleReport validate_schedule(const Schedule& schedule);

struct SymmetryPair {
  std::size_t row;     // 1-indexed
  std::size_t mirror;  // equal to row for the self-symmetric middle row
  bool pass;
};

struct SymmetryReport {
  std::vector<SymmetryPair> pairs;
  bool pass() const;
};

/// Boundary feed order per array row; rows must all have the same length.
struct InputArrangement {
  std::vector<std::vector<std::int64_t>> rows;
};

SymmetryReport check_arrangement_symmetry(const InputArrangement& arr);

struct StepCountRow {
  std::size_t n;
  std::size_t standard_steps;
  std::size_t mesh_steps;

  friend bool operator==(const StepCountRow&, const StepCountRow&) = default;
};

std::vector<StepCountRow> step_count_table(const std::vector<std::size_t>& n_values);
std::string step_count_csv(const std::vector<StepCountRow>& rows);

/// One line per multiply-accumulate: "step i j k partial_sum".
std::string trace_text(const SimulationTrace& trace);

}  // namespace blomkit::mesh
