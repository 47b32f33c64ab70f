// blomkit command-line front end.
//
// Exit status: 0 success, 1 failed verification or in-run invariant,
// 2 usage or input error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "blomkit/bench.hpp"
#include "blomkit/blom.hpp"
#include "blomkit/example.hpp"
#include "blomkit/mesharray.hpp"
#include "blomkit/netsim.hpp"

namespace {

using namespace blomkit;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
  if (!out.flush()) throw UsageError("cannot write " + path);
}

// --- demo ------------------------------------------------------------------

int run_demo() {
  const auto report = example::demo();
  std::cout << report.text;
  if (!report.ok()) {
    std::cerr << "demo mismatch: " << report.first_failure() << '\n';
    return kFailed;
  }
  return kOk;
}

// --- keygen ----------------------------------------------------------------

struct KeygenOptions {
  unsigned t = 3;
  std::uint64_t q = 31;
  std::size_t nodes = 4;
  std::string variant = "modified";
  std::uint64_t seed = 1;
  std::string out;
};

int run_keygen(const KeygenOptions& o) {
  blom::SchemeParams params;
  try {
    params = blom::SchemeParams{o.t, gf::PrimeModulus(o.q), o.nodes, blom::parse_variant(o.variant)};
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto state = blom::make_scheme(params, o.seed);
  const auto doc = blom::export_state(state, true);
  if (o.out.empty()) {
    std::cout << doc;
  } else {
    write_file(o.out, doc);
  }
  const auto report = blom::verify_t_security_structure(state.pub, params.t, 200000, 20000, o.seed);
  std::cout << "t-security structure: " << report.describe() << '\n';
  return kOk;
}

// --- simulate --------------------------------------------------------------

struct SimulateOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string log;
  std::string metrics;
};

int run_simulate(const SimulateOptions& o) {
  const std::string* bundled = example::bundled_scenario(o.scenario);
  const std::string text = bundled ? *bundled : read_file(o.scenario);
  net::ScenarioResult result;
  try {
    auto config = net::parse_scenario(text);
    if (o.seed) config.seed = *o.seed;
    result = net::run_scenario(config);
  } catch (const net::ConfigError& e) {
    throw UsageError(std::string("scenario: ") + e.what());
  }
  if (!o.log.empty()) write_file(o.log, result.log.text());
  if (!o.metrics.empty()) write_file(o.metrics, result.metrics.csv());

  for (const auto& r : result.log.records()) {
    if (r.kind == "Session" || r.kind == "SessionFail" || r.kind == "Mark" || r.kind == "Rekey") {
      std::cout << r.line() << '\n';
    }
  }
  std::cout << result.metrics.csv();
  if (!result.intrusion_table.empty()) {
    std::cout << "intrusion table:\n";
    for (const auto& [label, count] : result.intrusion_table) {
      std::cout << "  " << label << ' ' << count << '\n';
    }
  }
  for (const auto& v : result.violations) std::cerr << "invariant violated: " << v << '\n';
  return result.violations.empty() ? kOk : kFailed;
}

// --- bench -----------------------------------------------------------------

struct BenchOptions {
  bool sweep = false;
  bool mesh = false;
  std::string out;
  std::uint64_t seed = 1;
  std::uint64_t q = 257;
  std::optional<unsigned> fixed_t;
  std::vector<std::size_t> sizes;
  bool serial = false;
};

int run_bench(const BenchOptions& o) {
  if (o.sweep == o.mesh) throw UsageError("bench: pass exactly one of --sweep or --mesh");
  std::string csv;
  if (o.sweep) {
    bench::SweepConfig config;
    if (!o.sizes.empty()) config.sizes = o.sizes;
    config.q = o.q;
    config.seed = o.seed;
    config.t_rule.fixed = o.fixed_t;
    config.parallel = !o.serial;
    try {
      csv = bench::run_sweep(config).csv;
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    const std::vector<std::size_t> default_sizes{1, 2, 4, 6, 8, 10, 20, 30, 40, 50, 100, 200};
    try {
      csv = bench::mesh_comparison(o.sizes.empty() ? default_sizes : o.sizes);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_file(o.out, csv);
  }
  return kOk;
}

// --- mesh ------------------------------------------------------------------

struct MeshOptions {
  std::size_t n = 4;
  std::string schedule = "mesh";
  std::string trace;
  std::string a;
  std::string b;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> q;
};

int run_mesh(const MeshOptions& o) {
  if (o.a.empty() != o.b.empty()) throw UsageError("mesh: --a and --b go together");
  std::optional<gf::PrimeModulus> modulus;
  mesh::IntMatrix a;
  mesh::IntMatrix b;
  std::size_t n = o.n;
  try {
    if (o.q) modulus = gf::PrimeModulus(*o.q);
    if (!o.a.empty()) {
      const auto ga = gf::from_text(read_file(o.a));
      const auto gb = gf::from_text(read_file(o.b));
      if (ga.rows() != ga.cols() || gb.rows() != gb.cols() || ga.rows() != gb.rows()) {
        throw UsageError("mesh: --a and --b must both be n x n with the same n");
      }
      if (ga.modulus() != gb.modulus()) throw UsageError("mesh: --a and --b use different q");
      n = ga.rows();
      modulus = ga.modulus();
      a = mesh::IntMatrix::from_gf(ga);
      b = mesh::IntMatrix::from_gf(gb);
    } else {
      if (n < 1) throw UsageError("mesh: --n must be at least 1");
      const std::uint64_t bound = modulus ? modulus->value() : 10;
      Rng rng(o.seed);
      a = mesh::IntMatrix(n, n);
      b = mesh::IntMatrix(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, j) = static_cast<std::int64_t>(rng.below(bound));
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) b(i, j) = static_cast<std::int64_t>(rng.below(bound));
      }
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto schedule = o.schedule == "standard" ? mesh::standard_schedule(n) : mesh::mesh_schedule(n);
  const auto trace = mesh::simulate(a, b, schedule, mesh::ArrayConfig{n, modulus});
  if (!o.trace.empty()) write_file(o.trace, mesh::trace_text(trace));
  const bool correct = trace.result == mesh::direct_product(a, b, modulus);
  const auto report = mesh::validate_schedule(schedule);
  std::cout << "schedule " << schedule.name() << " n=" << n << '\n'
            << "steps_used " << trace.steps_used << '\n'
            << "product " << (correct ? "correct" : "WRONG") << '\n'
            << "coverage " << (report.coverage ? "pass" : "fail") << " contiguity "
            << (report.contiguity ? "pass" : "fail") << " movement "
            << (report.movement ? "pass" : "fail") << '\n';
  return correct ? kOk : kFailed;
}

int run_verify(std::uint64_t seed) {
  const auto report = example::verify(example::reference(), 200, seed);
  std::cout << report.text;
  return report.ok() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blom key predistribution toolkit and simulator"};
  app.require_subcommand(1);

  auto* demo = app.add_subcommand("demo", "Reproduce the 4-node q=31 worked example");

  KeygenOptions keygen;
  auto* kg = app.add_subcommand("keygen", "Generate a scheme state (CA export)");
  kg->add_option("--t", keygen.t, "Security parameter")->capture_default_str();
  kg->add_option("--q", keygen.q, "Prime modulus")->capture_default_str();
  kg->add_option("--nodes", keygen.nodes, "Network size")->capture_default_str();
  kg->add_option("--variant", keygen.variant, "original|modified")
      ->check(CLI::IsMember({"original", "modified"}))
      ->capture_default_str();
  kg->add_option("--seed", keygen.seed, "PRNG seed")->capture_default_str();
  kg->add_option("--out", keygen.out, "Output file (stdout if omitted)");

  SimulateOptions sim;
  auto* sm = app.add_subcommand("simulate", "Run a protocol scenario");
  sm->add_option("--scenario", sim.scenario, "Scenario file or bundled name")->required();
  sm->add_option("--seed", sim.seed, "Override the scenario seed");
  sm->add_option("--log", sim.log, "Event log output file");
  sm->add_option("--metrics", sim.metrics, "Metrics CSV output file");

  BenchOptions bo;
  auto* bn = app.add_subcommand("bench", "Operation-count and step-count comparisons");
  bn->add_flag("--sweep", bo.sweep, "Original vs modified setup cost sweep");
  bn->add_flag("--mesh", bo.mesh, "Standard vs mesh array step counts");
  bn->add_option("--out", bo.out, "CSV output file (stdout if omitted)");
  bn->add_option("--seed", bo.seed, "PRNG seed")->capture_default_str();
  bn->add_option("--q", bo.q, "Prime modulus for the sweep")->capture_default_str();
  bn->add_option("--fixed-t", bo.fixed_t, "Use this t at every size instead of t = n-1");
  bn->add_option("--sizes", bo.sizes, "Sizes to evaluate")->delimiter(',');
  bn->add_flag("--serial", bo.serial, "Evaluate sweep points one at a time");

  MeshOptions mo;
  auto* ms = app.add_subcommand("mesh", "Simulate a processor-array matrix product");
  ms->add_option("--n", mo.n, "Matrix order")->capture_default_str();
  ms->add_option("--schedule", mo.schedule, "standard|mesh")
      ->check(CLI::IsMember({"standard", "mesh"}))
      ->capture_default_str();
  ms->add_option("--trace", mo.trace, "Trace output file");
  ms->add_option("--a", mo.a, "Left operand (matrix text file)");
  ms->add_option("--b", mo.b, "Right operand (matrix text file)");
  ms->add_option("--seed", mo.seed, "Seed for random operands")->capture_default_str();
  ms->add_option("--q", mo.q, "Reduce modulo this prime");

  std::uint64_t verify_seed = 1;
  auto* vf = app.add_subcommand("verify", "Run the fast self-check");
  vf->add_option("--seed", verify_seed, "Seed for the randomized checks")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*demo) return run_demo();
    if (*kg) return run_keygen(keygen);
    if (*sm) return run_simulate(sim);
    if (*bn) return run_bench(bo);
    if (*ms) return run_mesh(mo);
    if (*vf) return run_verify(verify_seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
