#include "blomkit/bench.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include "blomkit/rng.hpp"

namespace blomkit::bench {

unsigned TRule::operator()(std::size_t n) const {
  if (fixed) return *fixed;
  return n > 1 ? static_cast<unsigned>(n - 1) : 1U;
}

std::string TRule::describe() const {
  return fixed ? "fixed:" + std::to_string(*fixed) : std::string("n-1");
}

void SweepConfig::validate() const {
  if (sizes.empty()) throw std::invalid_argument("sweep: no sizes given");
  if (!std::is_sorted(sizes.begin(), sizes.end()) ||
      std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end()) {
    throw std::invalid_argument("sweep: sizes must be strictly increasing");
  }
  for (auto n : sizes) {
    if (t_rule(n) < 1) throw std::invalid_argument("sweep: t_rule must give t >= 1");
  }
}

BenchRow cost_setup(blom::Variant scheme, std::size_t n, unsigned t, std::uint64_t q,
                    std::uint64_t seed, const Weights& weights) {
  const blom::SchemeParams params{t, gf::PrimeModulus(q), n, scheme};
  gf::OpCounter counter;
  blom::make_scheme(params, seed, &counter);
  BenchRow row{n, t, q, scheme, counter.mults, counter.adds, counter.exps, 0};
  row.total_ops = weights.mult * row.field_mults + weights.add * row.field_adds +
                  weights.exp * row.exps;
  return row;
}

std::string sweep_csv(const SweepConfig& config, const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "# seed=" << config.seed << " generator=" << Rng::kGeneratorId
     << " weights=mult:" << config.weights.mult << ",add:" << config.weights.add
     << ",exp:" << config.weights.exp << " t_rule=" << config.t_rule.describe()
     << " cost_model=vandermonde_exps:N*(t-1),random:0\n";
  os << "n,t,q,scheme,field_mults,field_adds,exps,total_ops\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.t << ',' << r.q << ',' << blom::to_string(r.scheme) << ','
       << r.field_mults << ',' << r.field_adds << ',' << r.exps << ',' << r.total_ops << '\n';
  }
  return os.str();
}

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  struct Point {
    std::size_t n;
    blom::Variant scheme;
  };
  std::vector<Point> points;
  for (auto n : config.sizes) {
    points.push_back({n, blom::Variant::Original});
    points.push_back({n, blom::Variant::Modified});
  }
  auto run_point = [&config](const Point& p) {
    const auto sub_seed = derive_seed(config.seed, p.n, static_cast<std::uint64_t>(p.scheme));
    return cost_setup(p.scheme, p.n, config.t_rule(p.n), config.q, sub_seed, config.weights);
  };

  SweepResult result;
  if (config.parallel) {
    std::vector<std::future<BenchRow>> pending;
    pending.reserve(points.size());
    for (const auto& p : points) pending.push_back(std::async(std::launch::async, run_point, p));
    for (auto& f : pending) result.rows.push_back(f.get());
  } else {
    for (const auto& p : points) result.rows.push_back(run_point(p));
  }
  result.csv = sweep_csv(config, result.rows);
  return result;
}

std::vector<BenchRow> parse_sweep_csv(const std::string& csv) {
  std::vector<BenchRow> rows;
  std::istringstream in(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "n,t,q,scheme,field_mults,field_adds,exps,total_ops") {
        throw std::invalid_argument("sweep csv: unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw std::invalid_argument("sweep csv: bad row '" + line + "'");
    BenchRow r;
    r.n = std::stoull(cells[0]);
    r.t = static_cast<unsigned>(std::stoul(cells[1]));
    r.q = std::stoull(cells[2]);
    r.scheme = blom::parse_variant(cells[3]);
    r.field_mults = std::stoull(cells[4]);
    r.field_adds = std::stoull(cells[5]);
    r.exps = std::stoull(cells[6]);
    r.total_ops = std::stoull(cells[7]);
    rows.push_back(r);
  }
  return rows;
}

std::string mesh_comparison(const std::vector<std::size_t>& n_values) {
  return mesh::step_count_csv(mesh::step_count_table(n_values));
}

}  // namespace blomkit::bench
