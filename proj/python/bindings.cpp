#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blomkit/bench.hpp"
#include "blomkit/blom.hpp"
#include "blomkit/example.hpp"
#include "blomkit/mesharray.hpp"
#include "blomkit/netsim.hpp"

namespace py = pybind11;
using namespace blomkit;

namespace {

using Rows = std::vector<std::vector<std::int64_t>>;

gf::Matrix to_matrix(const Rows& rows, std::uint64_t q) {
  return gf::Matrix::from_rows(rows, gf::PrimeModulus(q));
}

blom::UpdateRule parse_rule(const std::string& name, const std::optional<Rows>& addend,
                            std::uint64_t q) {
  if (name == "reversal") return blom::rule::ReversalProduct{};
  if (name == "self_transpose") return blom::rule::SelfTransposeProduct{};
  if (name == "fresh") return blom::rule::FreshSecret{};
  if (name == "add_symmetric") {
    if (!addend) throw std::invalid_argument("add_symmetric needs an addend matrix");
    return blom::rule::AddSymmetric{to_matrix(*addend, q)};
  }
  throw std::invalid_argument("unknown rule '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_blomkit, m) {
  m.doc() = "Blom key predistribution, mesh-array simulation and protocol simulator";

  py::register_exception<gf::DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<gf::ModulusError>(m, "ModulusError", PyExc_ValueError);
  py::register_exception<net::ConfigError>(m, "ConfigError", PyExc_ValueError);

  // gfmat, on nested lists of residues.
  m.def("is_prime", &gf::PrimeModulus::is_prime);
  m.def(
      "mat_mul",
      [](const Rows& a, const Rows& b, std::uint64_t q) {
        gf::OpCounter c;
        const auto r = gf::mat_mul(to_matrix(a, q), to_matrix(b, q), &c);
        return py::make_tuple(r.to_rows(), c.mults, c.adds);
      },
      py::arg("a"), py::arg("b"), py::arg("q"),
      "Product mod q; returns (rows, mults, adds).");
  m.def("mat_add", [](const Rows& a, const Rows& b, std::uint64_t q) {
    return gf::mat_add(to_matrix(a, q), to_matrix(b, q)).to_rows();
  });
  m.def("transpose", [](const Rows& a, std::uint64_t q) { return gf::transpose(to_matrix(a, q)).to_rows(); });
  m.def("reverse_rows", [](const Rows& a, std::uint64_t q) { return gf::reverse_rows(to_matrix(a, q)).to_rows(); });
  m.def("rank", [](const Rows& a, std::uint64_t q) { return gf::rank(to_matrix(a, q)); });
  m.def("is_symmetric", [](const Rows& a, std::uint64_t q) { return gf::is_symmetric(to_matrix(a, q)); });
  m.def("vandermonde", [](const std::vector<gf::Residue>& seeds, unsigned t, std::uint64_t q) {
    const gf::PrimeModulus pm(q);
    return gf::vandermonde(gf::VandermondeSeeds(seeds, pm), t, pm).to_rows();
  });
  m.def("random_matrix", [](std::size_t rows, std::size_t cols, std::uint64_t q, std::uint64_t seed) {
    return gf::random_matrix(rows, cols, gf::PrimeModulus(q), seed).to_rows();
  });
  m.def("symmetric_from_random", [](const Rows& a, std::uint64_t q) {
    return gf::symmetric_from_random(to_matrix(a, q)).to_rows();
  });
  m.def("columns_independent", [](const Rows& a, std::uint64_t q, const std::vector<std::size_t>& subset) {
    return gf::columns_independent(to_matrix(a, q), subset);
  });

  // blom
  py::class_<blom::SchemeState>(m, "SchemeState")
      .def_property_readonly("t", [](const blom::SchemeState& s) { return s.params.t; })
      .def_property_readonly("q", [](const blom::SchemeState& s) { return s.params.q.value(); })
      .def_property_readonly("nodes", [](const blom::SchemeState& s) { return s.params.nodes; })
      .def_property_readonly("variant", [](const blom::SchemeState& s) { return blom::to_string(s.params.variant); })
      .def_property_readonly("public", [](const blom::SchemeState& s) { return s.pub.to_rows(); })
      .def_property_readonly("secret", [](const blom::SchemeState& s) { return s.secret.to_rows(); })
      .def_property_readonly("private", [](const blom::SchemeState& s) { return s.priv.to_rows(); })
      .def_readonly("epoch", &blom::SchemeState::epoch)
      .def_readonly("seed", &blom::SchemeState::seed)
      .def("shared_key",
           [](const blom::SchemeState& s, std::size_t i, std::size_t j) {
             return blom::shared_key(s.private_row(i), s.public_column(j), s.params.q).value;
           },
           py::arg("i"), py::arg("j"), "Key from node i's private row and node j's column (0-based).")
      .def("key_matrix", [](const blom::SchemeState& s) { return blom::key_matrix(s.priv, s.pub).to_rows(); })
      .def("export", &blom::export_state, py::arg("include_secret") = true)
      .def("__eq__", [](const blom::SchemeState& a, const blom::SchemeState& b) { return a == b; });

  m.def(
      "make_scheme",
      [](unsigned t, std::uint64_t q, std::size_t nodes, const std::string& variant, std::uint64_t seed) {
        return blom::make_scheme(blom::SchemeParams{t, gf::PrimeModulus(q), nodes, blom::parse_variant(variant)}, seed);
      },
      py::arg("t"), py::arg("q"), py::arg("nodes"), py::arg("variant") = "modified", py::arg("seed") = 1);
  m.def(
      "scheme_from_matrices",
      [](const Rows& pub, const Rows& secret, std::uint64_t q, std::size_t nodes) {
        const auto p = to_matrix(pub, q);
        const blom::SchemeParams params{static_cast<unsigned>(p.rows() - 1), gf::PrimeModulus(q), nodes,
                                        blom::Variant::Modified};
        return blom::make_scheme(params, p, to_matrix(secret, q));
      },
      py::arg("public"), py::arg("secret"), py::arg("q"), py::arg("nodes"));
  m.def(
      "rekey",
      [](const blom::SchemeState& s, const std::string& rule, std::uint64_t seed, const std::optional<Rows>& addend) {
        return blom::rekey(s, parse_rule(rule, addend, s.params.q.value()), seed);
      },
      py::arg("state"), py::arg("rule") = "reversal", py::arg("seed") = 0, py::arg("addend") = py::none());
  m.def("rekey_with", [](const blom::SchemeState& s, const Rows& secret) {
    return blom::rekey_with(s, to_matrix(secret, s.params.q.value()));
  });
  m.def(
      "update_secret",
      [](const Rows& secret, std::uint64_t q, const std::string& rule, const std::optional<Rows>& addend) {
        return blom::update_secret(to_matrix(secret, q), parse_rule(rule, addend, q)).to_rows();
      },
      py::arg("secret"), py::arg("q"), py::arg("rule") = "reversal", py::arg("addend") = py::none());
  m.def("import_state", &blom::import_state);
  m.def(
      "verify_t_security",
      [](const Rows& pub, std::uint64_t q, unsigned t) {
        const auto r = blom::verify_t_security_structure(to_matrix(pub, q), t);
        py::dict d;
        d["pass"] = r.pass;
        d["exhaustive"] = r.exhaustive;
        d["subsets_checked"] = r.subsets_checked;
        d["first_failure"] = r.first_failure;
        return d;
      },
      py::arg("public"), py::arg("q"), py::arg("t"));

  // mesharray
  m.def(
      "mesh_simulate",
      [](const Rows& a, const Rows& b, const std::string& schedule, std::optional<std::uint64_t> q) {
        const auto ia = mesh::IntMatrix::from_rows(a);
        const auto ib = mesh::IntMatrix::from_rows(b);
        const auto n = ia.rows();
        const auto s = schedule == "standard" ? mesh::standard_schedule(n) : mesh::mesh_schedule(n);
        std::optional<gf::PrimeModulus> mod;
        if (q) mod = gf::PrimeModulus(*q);
        const auto trace = mesh::simulate(ia, ib, s, mesh::ArrayConfig{n, mod});
        py::dict d;
        d["result"] = trace.result.to_rows();
        d["steps_used"] = trace.steps_used;
        d["trace"] = mesh::trace_text(trace);
        d["c11_after_two_steps"] = n >= 2 ? py::cast(trace.accumulator_after_active_steps(1, 1, 2)) : py::none();
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("schedule") = "mesh", py::arg("q") = py::none());
  m.def("validate_schedule", [](const std::string& schedule, std::size_t n) {
    const auto r = mesh::validate_schedule(schedule == "standard" ? mesh::standard_schedule(n) : mesh::mesh_schedule(n));
    py::dict d;
    d["coverage"] = r.coverage;
    d["contiguity"] = r.contiguity;
    d["movement"] = r.movement;
    d["makespan"] = r.makespan;
    return d;
  });
  m.def("step_count_csv", [](const std::vector<std::size_t>& ns) {
    return mesh::step_count_csv(mesh::step_count_table(ns));
  });

  // netsim
  m.def(
      "run_scenario",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        auto config = net::parse_scenario(text);
        if (seed) config.seed = *seed;
        const auto r = net::run_scenario(config);
        py::dict d;
        d["log"] = r.log.text();
        d["metrics"] = r.metrics.csv();
        d["intrusion_table"] = r.intrusion_table;
        d["violations"] = r.violations;
        return d;
      },
      py::arg("scenario"), py::arg("seed") = py::none(),
      "Runs a scenario given as JSON text.");
  m.def("bundled_scenario", [](const std::string& name) -> std::optional<std::string> {
    const auto* s = example::bundled_scenario(name);
    if (!s) return std::nullopt;
    return *s;
  });
  m.def("bundled_scenario_names", &example::bundled_scenario_names);
  m.def("check_log", [](const std::string& text) { return net::check_log_invariants(net::EventLog::parse(text)); });

  // bench
  m.def(
      "run_sweep",
      [](const std::vector<std::size_t>& sizes, std::uint64_t q, std::uint64_t seed, std::optional<unsigned> fixed_t) {
        bench::SweepConfig c;
        if (!sizes.empty()) c.sizes = sizes;
        c.q = q;
        c.seed = seed;
        c.t_rule.fixed = fixed_t;
        return bench::run_sweep(c).csv;
      },
      py::arg("sizes") = std::vector<std::size_t>{}, py::arg("q") = 257, py::arg("seed") = 1,
      py::arg("fixed_t") = py::none());

  // worked example
  m.def("demo", [] {
    const auto r = example::demo();
    return py::make_tuple(r.ok(), r.text);
  });
  m.def("verify", [] {
    const auto r = example::verify();
    return py::make_tuple(r.ok(), r.text);
  });
}
