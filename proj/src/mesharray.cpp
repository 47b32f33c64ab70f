#include "blomkit/mesharray.hpp"

#include <algorithm>
#include <sstream>

namespace blomkit::mesh {

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  if (rows.empty()) return {};
  IntMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw gf::DimensionError("ragged matrix rows");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

IntMatrix IntMatrix::from_gf(const gf::Matrix& g) {
  IntMatrix m(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) m(i, j) = static_cast<std::int64_t>(g(i, j));
  }
  return m;
}

std::vector<std::vector<std::int64_t>> IntMatrix::to_rows() const {
  std::vector<std::vector<std::int64_t>> out(rows_, std::vector<std::int64_t>(cols_));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out[i][j] = (*this)(i, j);
  }
  return out;
}

// --- Schedule --------------------------------------------------------------

Schedule::Schedule(std::size_t n, std::vector<Assignment> assignments, std::string name)
    : n_(n), name_(std::move(name)), assignments_(std::move(assignments)) {
  if (n_ == 0) throw ScheduleError("schedule order must be at least 1");
  for (const auto& a : assignments_) {
    if (a.i < 1 || a.i > n_ || a.j < 1 || a.j > n_ || a.k < 1 || a.k > n_ || a.step < 1) {
      throw ScheduleError("assignment out of range: node (" + std::to_string(a.i) + "," +
                          std::to_string(a.j) + ") step " + std::to_string(a.step) +
                          " term " + std::to_string(a.k));
    }
    makespan_ = std::max(makespan_, a.step);
  }
  grid_.assign(n_ * n_ * makespan_, 0);
  for (const auto& a : assignments_) {
    auto& slot = grid_[index(a.i, a.j, a.step)];
    if (slot != 0) {
      throw ScheduleError("node (" + std::to_string(a.i) + "," + std::to_string(a.j) +
                          ") has two terms at step " + std::to_string(a.step));
    }
    slot = static_cast<std::uint32_t>(a.k);
  }
}

std::size_t Schedule::index(std::size_t i, std::size_t j, std::size_t step) const {
  return ((i - 1) * n_ + (j - 1)) * makespan_ + (step - 1);
}

std::optional<std::size_t> Schedule::term(std::size_t i, std::size_t j,
                                          std::size_t step) const {
  if (i < 1 || i > n_ || j < 1 || j > n_ || step < 1 || step > makespan_) return std::nullopt;
  const auto k = grid_[index(i, j, step)];
  if (k == 0) return std::nullopt;
  return k;
}

Schedule Schedule::without(std::size_t i, std::size_t j, std::size_t step) const {
  std::vector<Assignment> kept;
  kept.reserve(assignments_.size());
  for (const auto& a : assignments_) {
    if (!(a.i == i && a.j == j && a.step == step)) kept.push_back(a);
  }
  return Schedule(n_, std::move(kept), name_);
}

Schedule standard_schedule(std::size_t n) {
  std::vector<Assignment> out;
  out.reserve(n * n * n);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t k = 1; k <= n; ++k) out.push_back({i, j, i + j + k - 2, k});
    }
  }
  return Schedule(n, std::move(out), "standard");
}

Schedule mesh_schedule(std::size_t n) {
  std::vector<Assignment> out;
  out.reserve(n * n * n);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t start = std::max(i, j);
      for (std::size_t step = start; step < start + n; ++step) {
        // k = step - i - j + 2 (mod n), mapped into 1..n; offset keeps it unsigned.
        const std::size_t k = (step + 2 * n + 1 - i - j) % n + 1;
        out.push_back({i, j, step, k});
      }
    }
  }
  return Schedule(n, std::move(out), "mesh");
}

// --- simulation ------------------------------------------------------------

std::int64_t SimulationTrace::accumulator_after_active_steps(std::size_t i, std::size_t j,
                                                             std::size_t count) const {
  for (std::size_t s = 0; s < terms.size(); ++s) {
    if (static_cast<std::size_t>(terms[s](i - 1, j - 1)) == count) {
      return accumulators[s](i - 1, j - 1);
    }
  }
  throw std::out_of_range("node never completed " + std::to_string(count) + " steps");
}

IntMatrix direct_product(const IntMatrix& a, const IntMatrix& b,
                         const std::optional<gf::PrimeModulus>& modulus) {
  if (a.cols() != b.rows()) throw gf::DimensionError("direct_product: shape mismatch");
  IntMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::int64_t acc = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc += a(i, k) * b(k, j);
        if (modulus) acc = static_cast<std::int64_t>(modulus->reduce(acc));
      }
      c(i, j) = acc;
    }
  }
  return c;
}

SimulationTrace simulate(const IntMatrix& a, const IntMatrix& b, const Schedule& schedule,
                         const ArrayConfig& config) {
  const std::size_t n = config.n;
  if (a.rows() != n || a.cols() != n || b.rows() != n || b.cols() != n) {
    throw gf::DimensionError("simulate: operands must be " + std::to_string(n) + "x" +
                             std::to_string(n));
  }
  if (schedule.n() != n) {
    throw gf::DimensionError("simulate: schedule is for order " +
                             std::to_string(schedule.n()));
  }
  // Every (i, j, k) must appear somewhere, else the product is incomplete.
  std::vector<char> seen(n * n * n, 0);
  for (const auto& as : schedule.assignments()) {
    seen[((as.i - 1) * n + (as.j - 1)) * n + (as.k - 1)] = 1;
  }
  for (std::size_t idx = 0; idx < seen.size(); ++idx) {
    if (!seen[idx]) {
      const std::size_t k = idx % n + 1;
      const std::size_t j = (idx / n) % n + 1;
      const std::size_t i = idx / (n * n) + 1;
      throw ScheduleError("schedule incomplete: node (" + std::to_string(i) + "," +
                          std::to_string(j) + ") never processes term " + std::to_string(k));
    }
  }

  SimulationTrace trace;
  trace.n = n;
  IntMatrix acc(n, n);
  IntMatrix count(n, n);
  for (std::size_t step = 1; step <= schedule.makespan(); ++step) {
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 1; j <= n; ++j) {
        const auto k = schedule.term(i, j, step);
        if (!k) continue;
        std::int64_t v = acc(i - 1, j - 1) + a(i - 1, *k - 1) * b(*k - 1, j - 1);
        if (config.modulus) v = static_cast<std::int64_t>(config.modulus->reduce(v));
        acc(i - 1, j - 1) = v;
        count(i - 1, j - 1) += 1;
        trace.records.push_back({step, i, j, *k, v});
      }
    }
    trace.accumulators.push_back(acc);
    trace.terms.push_back(count);
  }
  trace.steps_used = schedule.makespan();
  trace.result = acc;
  return trace;
}

SimulationTrace simulate(const gf::Matrix& a, const gf::Matrix& b, const Schedule& schedule) {
  if (a.modulus() != b.modulus()) throw gf::ModulusError("simulate: moduli differ");
  return simulate(IntMatrix::from_gf(a), IntMatrix::from_gf(b), schedule,
                  ArrayConfig{a.rows(), a.modulus()});
}

// --- validation ------------------------------------------------------------

ScheduleReport validate_schedule(const Schedule& schedule) {
  const std::size_t n = schedule.n();
  ScheduleReport report;
  report.makespan = schedule.makespan();
  auto node = [](std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  };

  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      std::vector<int> uses(n + 1, 0);
      std::size_t first = 0;
      std::size_t last = 0;
      std::size_t active = 0;
      for (std::size_t step = 1; step <= schedule.makespan(); ++step) {
        const auto k = schedule.term(i, j, step);
        if (!k) continue;
        ++uses[*k];
        if (first == 0) first = step;
        last = step;
        ++active;
      }
      for (std::size_t k = 1; k <= n; ++k) {
        if (uses[k] != 1) {
          report.coverage = false;
          report.problems.push_back("coverage: node " + node(i, j) + " uses term " +
                                    std::to_string(k) + " " + std::to_string(uses[k]) +
                                    " times (i,j,k)=(" + std::to_string(i) + "," +
                                    std::to_string(j) + "," + std::to_string(k) + ")");
        }
      }
      if (active > 0 && last - first + 1 != active) {
        report.contiguity = false;
        report.problems.push_back("contiguity: node " + node(i, j) + " idles inside steps " +
                                  std::to_string(first) + ".." + std::to_string(last));
      }

      // a_ik travels right, b_kj travels down, one hop per step, with wraparound.
      const std::size_t right = j % n + 1;
      const std::size_t below = i % n + 1;
      for (std::size_t step = 1; step < schedule.makespan(); ++step) {
        const auto k = schedule.term(i, j, step);
        if (!k) continue;
        if (n > 1) {
          const auto kr = schedule.term(i, right, step + 1);
          if (kr && *kr != *k) {
            report.movement = false;
            report.problems.push_back("movement: a(" + std::to_string(i) + "," +
                                      std::to_string(*k) + ") at " + node(i, j) + " step " +
                                      std::to_string(step) + " but " + node(i, right) +
                                      " uses term " + std::to_string(*kr) + " next");
          }
          const auto kb = schedule.term(below, j, step + 1);
          if (kb && *kb != *k) {
            report.movement = false;
            report.problems.push_back("movement: b(" + std::to_string(*k) + "," +
                                      std::to_string(j) + ") at " + node(i, j) + " step " +
                                      std::to_string(step) + " but " + node(below, j) +
                                      " uses term " + std::to_string(*kb) + " next");
          }
        }
      }
    }
  }
  return report;
}

// --- arrangement symmetry --------------------------------------------------

bool SymmetryReport::pass() const {
  return std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.pass; });
}

SymmetryReport check_arrangement_symmetry(const InputArrangement& arr) {
  if (arr.rows.empty()) throw std::invalid_argument("arrangement has no rows");
  for (const auto& r : arr.rows) {
    if (r.size() != arr.rows.front().size()) {
      throw gf::DimensionError("arrangement rows are ragged");
    }
  }
  const std::size_t n = arr.rows.size();
  auto mirrors = [&](std::size_t r, std::size_t m) {
    const auto& a = arr.rows[r - 1];
    const auto& b = arr.rows[m - 1];
    return std::equal(a.begin(), a.end(), b.rbegin());
  };

  SymmetryReport report;
  const std::size_t upper = (n % 2 == 1) ? (n + 1) / 2 : n / 2;
  for (std::size_t r = 2; r <= upper; ++r) {
    const std::size_t m = n + 2 - r;
    report.pairs.push_back({r, m, mirrors(r, m)});
  }
  if (n % 2 == 0) {
    const std::size_t mid = n / 2 + 1;
    report.pairs.push_back({mid, mid, mirrors(mid, mid)});
  }
  return report;
}

// --- step counts -----------------------------------------------------------

std::vector<StepCountRow> step_count_table(const std::vector<std::size_t>& n_values) {
  if (n_values.empty()) throw std::invalid_argument("step_count_table: no sizes");
  std::vector<StepCountRow> rows;
  rows.reserve(n_values.size());
  for (std::size_t n : n_values) {
    if (n == 0) throw std::invalid_argument("step_count_table: n must be positive");
    rows.push_back({n, 3 * n - 2, 2 * n - 1});
  }
  return rows;
}

std::string step_count_csv(const std::vector<StepCountRow>& rows) {
  std::ostringstream os;
  os << "n,standard_steps,mesh_steps\n";
  for (const auto& r : rows) os << r.n << ',' << r.standard_steps << ',' << r.mesh_steps << '\n';
  return os.str();
}

std::string trace_text(const SimulationTrace& trace) {
  std::ostringstream os;
  os << "# step i j k partial_sum\n";
  for (const auto& r : trace.records) {
    os << r.step << ' ' << r.i << ' ' << r.j << ' ' << r.k << ' ' << r.partial_sum << '\n';
  }
  return os.str();
}

}  // namespace blomkit::mesh
