#include <doctest.h>

#include "blomkit/mesharray.hpp"
#include "oracles.hpp"

using namespace blomkit;
using namespace blomkit::mesh;

namespace {

IntMatrix random_int(Rng& rng, std::size_t n, std::int64_t bound) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = static_cast<std::int64_t>(rng.below(2 * bound)) - bound;
  }
  return m;
}

}  // namespace

TEST_CASE("standard schedule") {
  CHECK(standard_schedule(4).makespan() == 10);
  CHECK(standard_schedule(1).makespan() == 1);
  const auto s2 = standard_schedule(2);
  CHECK(s2.term(1, 1, 1) == 1);
  CHECK(s2.term(1, 1, 2) == 2);
  CHECK_FALSE(s2.term(1, 1, 3));
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto s = standard_schedule(n);
    CHECK(s.makespan() == 3 * n - 2);
    for (const auto& a : s.assignments()) CHECK(a.step == a.i + a.j + a.k - 2);
  }
}

TEST_CASE("mesh schedule") {
  CHECK(mesh_schedule(4).makespan() == 7);
  CHECK(mesh_schedule(1).makespan() == 1);
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto s = mesh_schedule(n);
    CHECK(s.makespan() == 2 * n - 1);
    CHECK(s.assignments().size() == n * n * n);
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 1; j <= n; ++j) {
        const auto start = std::max(i, j);
        for (std::size_t t = 1; t <= 2 * n - 1; ++t) {
          const auto k = s.term(i, j, t);
          const bool active = t >= start && t < start + n;
          REQUIRE(k.has_value() == active);
          if (active) {
            const auto expected = ((t + 2 * n - i - j + 2 - 1) % n) + 1;
            CHECK(*k == expected);
          }
        }
      }
    }
  }
}

TEST_CASE("schedule construction errors") {
  CHECK_THROWS_AS(Schedule(2, {{1, 1, 1, 1}, {1, 1, 1, 2}}), ScheduleError);
  CHECK_THROWS_AS(Schedule(2, {{3, 1, 1, 1}}), ScheduleError);
  CHECK_THROWS_AS(Schedule(2, {{1, 1, 0, 1}}), ScheduleError);
  CHECK_THROWS_AS(Schedule(2, {{1, 1, 1, 3}}), ScheduleError);
  CHECK_THROWS(standard_schedule(0));
}

TEST_CASE("simulate") {
  SUBCASE("published M times its transpose, mod 31") {
    const gf::PrimeModulus q(31);
    const auto m = gf::Matrix::from_rows({{1, 0, 1, 1}, {1, 2, 0, 1}, {0, 0, 1, 1}, {0, 2, 3, 1}}, q);
    const auto trace = simulate(m, gf::transpose(m), mesh_schedule(4));
    CHECK(trace.result.to_rows() ==
          oracle::Rows{{3, 2, 2, 4}, {2, 6, 1, 5}, {2, 1, 2, 4}, {4, 5, 4, 14}});
    CHECK(trace.steps_used == 7);
  }
  SUBCASE("identity") {
    IntMatrix id(5, 5);
    for (std::size_t i = 0; i < 5; ++i) id(i, i) = 1;
    CHECK(simulate(id, id, mesh_schedule(5), ArrayConfig{5, {}}).result == id);
    CHECK(simulate(id, id, standard_schedule(5), ArrayConfig{5, {}}).result == id);
  }
  SUBCASE("random operands against the direct product") {
    Rng rng(1);
    for (std::size_t n = 1; n <= 8; ++n) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_int(rng, n, 1000);
        const auto b = random_int(rng, n, 1000);
        const auto expected = oracle::mul(a.to_rows(), b.to_rows());
        const auto mesh = simulate(a, b, mesh_schedule(n), ArrayConfig{n, {}});
        const auto standard = simulate(a, b, standard_schedule(n), ArrayConfig{n, {}});
        CHECK(mesh.result.to_rows() == expected);
        CHECK(standard.result.to_rows() == expected);
        CHECK(mesh.steps_used == 2 * n - 1);
        CHECK(standard.steps_used == 3 * n - 2);
        CHECK(mesh.records.size() == n * n * n);
      }
    }
  }
  SUBCASE("modular arithmetic") {
    Rng rng(2);
    const gf::PrimeModulus q(101);
    const auto a = random_int(rng, 6, 500);
    const auto b = random_int(rng, 6, 500);
    const auto trace = simulate(a, b, mesh_schedule(6), ArrayConfig{6, q});
    CHECK(trace.result.to_rows() == oracle::reduce(oracle::mul(a.to_rows(), b.to_rows()), 101));
    CHECK(direct_product(a, b, q) == trace.result);
  }
  SUBCASE("term counts never decrease") {
    Rng rng(3);
    const auto trace = simulate(random_int(rng, 5, 9), random_int(rng, 5, 9), mesh_schedule(5),
                                ArrayConfig{5, {}});
    for (std::size_t s = 1; s < trace.terms.size(); ++s) {
      for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) CHECK(trace.terms[s](i, j) >= trace.terms[s - 1](i, j));
      }
    }
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) CHECK(trace.terms.back()(i, j) == 5);
    }
  }
  SUBCASE("errors") {
    IntMatrix a(3, 3);
    const auto broken = mesh_schedule(3).without(2, 3, 3);
    try {
      simulate(a, a, broken, ArrayConfig{3, {}});
      FAIL("expected ScheduleError");
    } catch (const ScheduleError& e) {
      const std::string what = e.what();
      CHECK(what.find("node (2,3)") != std::string::npos);
    }
    CHECK_THROWS_AS(simulate(a, IntMatrix(2, 2), mesh_schedule(3), ArrayConfig{3, {}}),
                    gf::DimensionError);
    CHECK_THROWS_AS(simulate(a, a, mesh_schedule(4), ArrayConfig{4, {}}), gf::DimensionError);
  }
}

TEST_CASE("partial sum at node (1,1)") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_int(rng, 4, 50);
    const auto b = random_int(rng, 4, 50);
    const auto trace = simulate(a, b, mesh_schedule(4), ArrayConfig{4, {}});
    CHECK(trace.accumulator_after_active_steps(1, 1, 2) == a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0));
  }
}

TEST_CASE("validate_schedule") {
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto mesh = validate_schedule(mesh_schedule(n));
    CHECK(mesh.ok());
    CHECK(mesh.makespan == 2 * n - 1);
    const auto standard = validate_schedule(standard_schedule(n));
    CHECK(standard.coverage);
    CHECK(standard.contiguity);
    CHECK(standard.makespan == 3 * n - 2);
  }
  const auto missing = validate_schedule(mesh_schedule(4).without(1, 2, 3));
  CHECK_FALSE(missing.coverage);
  REQUIRE_FALSE(missing.problems.empty());
  const auto k = mesh_schedule(4).term(1, 2, 3);
  REQUIRE(k);
  const auto named = "(i,j,k)=(1,2," + std::to_string(*k) + ")";
  bool found = false;
  for (const auto& p : missing.problems) found = found || p.find(named) != std::string::npos;
  CHECK(found);

  SUBCASE("idle gap breaks contiguity") {
    std::vector<Assignment> as;
    for (std::size_t i = 1; i <= 2; ++i) {
      for (std::size_t j = 1; j <= 2; ++j) {
        as.push_back({i, j, 1, 1});
        as.push_back({i, j, (i == 1 && j == 1) ? 3u : 2u, 2});
      }
    }
    const auto r = validate_schedule(Schedule(2, as));
    CHECK(r.coverage);
    CHECK_FALSE(r.contiguity);
  }
  SUBCASE("operands that do not travel break movement") {
    // Every node takes k = 1 then k = 2: a_i1 never hops to the right neighbour.
    std::vector<Assignment> as;
    for (std::size_t i = 1; i <= 2; ++i) {
      for (std::size_t j = 1; j <= 2; ++j) {
        as.push_back({i, j, 1, 1});
        as.push_back({i, j, 2, 2});
      }
    }
    const auto r = validate_schedule(Schedule(2, as));
    CHECK(r.coverage);
    CHECK_FALSE(r.movement);
  }
}

TEST_CASE("arrangement symmetry") {
  CHECK(check_arrangement_symmetry({{{1, 2, 3}, {4, 5, 6}, {6, 5, 4}}}).pass());
  const auto four = check_arrangement_symmetry({{{1, 2, 3}, {4, 5, 6}, {7, 8, 7}, {6, 5, 4}}});
  CHECK(four.pass());
  bool middle = false;
  for (const auto& p : four.pairs) middle = middle || (p.row == 3 && p.mirror == 3 && p.pass);
  CHECK(middle);
  const auto bad = check_arrangement_symmetry({{{1, 2}, {3, 4}, {5, 6}}});
  CHECK_FALSE(bad.pass());
  REQUIRE(bad.pairs.size() == 1);
  CHECK(bad.pairs[0].row == 2);
  CHECK(bad.pairs[0].mirror == 3);
  CHECK_FALSE(bad.pairs[0].pass);
  CHECK_THROWS(check_arrangement_symmetry({{{1, 2, 3}, {4, 5}, {6, 5, 4}}}));
  CHECK_THROWS(check_arrangement_symmetry({}));
}

TEST_CASE("step counts") {
  const auto rows = step_count_table({1, 4, 200});
  CHECK(rows[0] == StepCountRow{1, 1, 1});
  CHECK(rows[1] == StepCountRow{4, 10, 7});
  CHECK(rows[2] == StepCountRow{200, 598, 399});
  CHECK(step_count_csv(step_count_table({2, 4})) == "n,standard_steps,mesh_steps\n2,4,3\n4,10,7\n");
  CHECK_THROWS(step_count_table({}));
  for (std::size_t n = 2; n <= 300; ++n) CHECK(2 * n - 1 < 3 * n - 2);
}

TEST_CASE("trace text") {
  IntMatrix a = IntMatrix::from_rows({{1, 2}, {3, 4}});
  const auto trace = simulate(a, a, mesh_schedule(2), ArrayConfig{2, {}});
  const auto text = trace_text(trace);
  CHECK(text.rfind("# step i j k partial_sum\n", 0) == 0);
  CHECK(text.find("\n1 1 1 1 1\n") != std::string::npos);
  CHECK(text == trace_text(simulate(a, a, mesh_schedule(2), ArrayConfig{2, {}})));
}
