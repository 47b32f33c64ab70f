#include <doctest.h>

#include "blomkit/example.hpp"

using namespace blomkit;

TEST_CASE("demo report") {
  const auto report = example::demo();
  CHECK(report.ok());
  CHECK(report.text == example::demo().text);
  CHECK(report.text.find("K(Bob,Charlie) = 25") != std::string::npos);
  CHECK(report.text.find("K(1,4)    [ 4  1  1  5]   [25 30 23 11]   22") != std::string::npos);
}

TEST_CASE("verify") {
  const auto report = example::verify();
  CHECK(report.ok());
  CHECK(report.checks.size() >= 3);

  auto broken = example::reference();
  broken.secret[0][0] = 4;
  const auto bad = example::verify(broken);
  CHECK_FALSE(bad.ok());
  CHECK(bad.first_failure().find("key_table_reproduction") != std::string::npos);

  auto shifted = example::reference();
  shifted.secret[1][2] = 9;
  shifted.secret[2][1] = 9;
  const auto mismatch = example::demo(shifted);
  CHECK_FALSE(mismatch.ok());
}

TEST_CASE("bundled scenarios") {
  const auto names = example::bundled_scenario_names();
  CHECK(std::find(names.begin(), names.end(), "paper_demo") != names.end());
  CHECK(std::find(names.begin(), names.end(), "intrusion") != names.end());
  CHECK(example::bundled_scenario("nope") == nullptr);
}
