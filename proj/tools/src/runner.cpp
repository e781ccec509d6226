#include "skewlab/experiment/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "skewlab/acim.hpp"
#include "skewlab/branch.hpp"
#include "skewlab/expansion.hpp"
#include "skewlab/hyperbolic_times.hpp"
#include "skewlab/markov.hpp"
#include "skewlab/parallel.hpp"
#include "skewlab/rng.hpp"

namespace skewlab::experiment {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::size_t kBatchSize = 4096;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Collects data files in memory; they are written once the run is done.
class Outputs {
 public:
  std::ostringstream& csv(const std::string& name) {
    files_.emplace_back(name, std::make_unique<std::ostringstream>());
    auto& os = *files_.back().second;
    os.precision(17);
    return os;
  }
  void json_file(const std::string& name, const json& j) { csv(name) << j.dump(2) << '\n'; }

  std::vector<OutputFile> write(const fs::path& dir) const {
    std::vector<OutputFile> out;
    for (const auto& [name, os] : files_) {
      const std::string data = os->str();
      std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
      f.write(data.data(), static_cast<std::streamsize>(data.size()));
      f.close();
      if (!f) throw Error(ErrorCode::kIOFailure, "cannot write " + (dir / name).string());
      out.push_back({name, sha256_hex(data), data.size()});
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> files_;
};

struct Context {
  const ExperimentConfig& cfg;
  Outputs& out;
  json& summary;

  BatchPlan plan(std::size_t total) const {
    return {total, kBatchSize, static_cast<unsigned>(cfg.threads)};
  }
  std::size_t samples() const { return static_cast<std::size_t>(cfg.samples); }
};

bool is_skew(const ExperimentConfig& cfg) { return cfg.system.family == "viana"; }

SkewProduct make_skew(const SystemConfig& s) {
  families::VianaParams p;
  p.a0 = s.a;
  p.alpha = s.coupling;
  p.d = static_cast<int>(s.degree);
  return families::viana(p);
}

IntervalMap make_map(const SystemConfig& s) {
  if (s.family == "logistic") return families::logistic();
  if (s.family == "quadratic") return families::quadratic(s.a);
  if (s.family == "two_well") return families::two_well();
  if (s.family == "smooth_diffeo") return families::smooth_diffeo();
  throw Error(ErrorCode::kInvalidArgument, "'" + s.family + "' is not an interval map");
}

System make_system(const ExperimentConfig& cfg) {
  return is_skew(cfg) ? System::skew(make_skew(cfg.system)) : System::interval(make_map(cfg.system));
}

// Interval maps iterate themselves; skew-products use the fiber over cfg.theta.
MapSequence make_sequence(const ExperimentConfig& cfg) {
  return is_skew(cfg) ? fiber_sequence(make_skew(cfg.system), cfg.theta)
                      : MapSequence::constant(make_map(cfg.system));
}

double uniform_interior(CounterRng& rng, const IntervalDomain& d) {
  double x = rng.uniform(d.lo, d.hi);
  while (!d.interior(x)) x = rng.uniform(d.lo, d.hi);
  return x;
}

// ------------------------------------------------------------ experiments

void run_ftle(Context& c) {
  const auto n = static_cast<std::size_t>(c.cfg.n);
  struct Row {
    double theta, x, value;
    bool critical;
  };
  std::vector<Row> rows(c.samples());
  if (is_skew(c.cfg)) {
    const SkewProduct skew = make_skew(c.cfg.system);
    run_batches<int>(c.plan(rows.size()), [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        CounterRng rng(c.cfg.seed, i);
        const double theta = rng.uniform();
        const double x = uniform_interior(rng, skew.fiber_domain());
        rows[i] = {theta, x, ftle_full(skew, {theta, x}, n), false};
      }
      return 0;
    });
  } else {
    const MapSequence seq = make_sequence(c.cfg);
    run_batches<int>(c.plan(rows.size()), [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        CounterRng rng(c.cfg.seed, i);
        const double x = uniform_interior(rng, seq.domain());
        try {
          rows[i] = {0.0, x, ftle_fiber(seq, x, n), false};
        } catch (const Error& err) {
          if (err.code() != ErrorCode::kHitCritical) throw;
          rows[i] = {0.0, x, std::nan(""), true};
        }
      }
      return 0;
    });
  }
  auto& os = c.out.csv("ftle.csv");
  os << "sample,theta,x,ftle\n";
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << i << ',' << real(rows[i].theta) << ',' << real(rows[i].x) << ',' << real(rows[i].value) << '\n';
    if (!rows[i].critical) values.push_back(rows[i].value);
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  if (!values.empty()) mean /= static_cast<double>(values.size());
  c.summary["mean_ftle"] = number(values.empty() ? std::nan("") : mean);
  c.summary["critical_hits"] = rows.size() - values.size();
  if (c.cfg.system.family == "logistic") {
    const std::size_t close = static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](double v) { return std::fabs(v - std::log(2.0)) <= 0.01; }));
    c.summary["within_0.01_of_log2"] = close;
  }
}

void run_branch(Context& c) {
  const MapSequence seq = make_sequence(c.cfg);
  const int n = static_cast<int>(c.cfg.n);
  std::vector<MonotoneBranch> rows(c.samples());
  run_batches<int>(c.plan(rows.size()), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng(c.cfg.seed, i);
      rows[i] = track_branch(seq, uniform_interior(rng, seq.domain()), n, {true, false});
    }
    return 0;
  });
  auto& os = c.out.csv("branches.csv");
  os << "sample,x,n,t_lo,t_hi,img_lo,img_hi,r_last,log_derivative,terminated\n";
  std::size_t terminated = 0, hyperbolic_like = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    terminated += r.terminated;
    hyperbolic_like += !r.terminated && r.r_last() >= c.cfg.delta_tilde;
    os << i << ',' << real(r.x) << ',' << r.n << ',' << real(r.t_lo) << ',' << real(r.t_hi) << ','
       << real(r.img_lo) << ',' << real(r.img_hi) << ',' << real(r.r_last()) << ','
       << real(r.log_derivative) << ',' << (r.terminated ? 1 : 0) << '\n';
  }
  c.summary["terminated"] = terminated;
  c.summary["r_last_at_least_delta_tilde"] = hyperbolic_like;
}

void run_census(Context& c) {
  const MapSequence seq = make_sequence(c.cfg);
  const Census census = component_census(seq, static_cast<int>(c.cfg.n), c.cfg.delta);
  write_census_csv(c.out.csv("census.csv"), census);
  const ClaimReport claims = check_component_claims(census, seq.max_critical_count());
  json j;
  j["depth"] = census.depth;
  j["delta"] = census.delta;
  j["realized_words"] = census.entries.size();
  j["claim1_instances"] = claims.claim1_instances;
  j["claim1_violations"] = claims.claim1_violations;
  j["claim1_worst_ratio"] = number(claims.claim1_worst_ratio);
  j["claim2_instances"] = claims.claim2_instances;
  j["claim2_violations"] = claims.claim2_violations;
  c.out.json_file("claims.json", j);
  c.summary = j;
}

void run_ay_decay(Context& c) {
  const MapSequence seq = make_sequence(c.cfg);
  std::vector<int> n_list(c.cfg.n_list.begin(), c.cfg.n_list.end());
  const auto deltas = c.cfg.deltas.empty() ? default_delta_grid() : c.cfg.deltas;
  const auto rows = measure_AY_decay(seq, n_list, deltas, c.cfg.lambda, c.samples(), c.cfg.seed,
                                     static_cast<unsigned>(c.cfg.threads));
  write_decay_csv(c.out.csv("decay.csv"), rows);
  json within = json::array();
  for (double d : deltas) {
    bool all = true;
    for (const auto& r : rows)
      if (r.delta == d) all = all && r.within_bound(seq.domain().length());
    if (all) within.push_back(d);
  }
  c.summary["deltas_within_bound"] = within;
}

void run_pliss(Context& c) {
  const MapSequence seq = make_sequence(c.cfg);
  const auto n = static_cast<std::size_t>(c.cfg.n);
  struct Row {
    double x, mean;
    PlissResult res;
  };
  std::vector<Row> rows(c.samples());
  run_batches<int>(c.plan(rows.size()), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng(c.cfg.seed, i);
      double x = uniform_interior(rng, seq.domain());
      const double x0 = x;
      auto next = seq.stream();
      PlissQuery q;
      q.c1 = c.cfg.c1;
      q.c2 = c.cfg.c2;
      for (std::size_t j = 0; j < n; ++j) {
        const IntervalMap f = next();
        q.values.push_back(std::log(std::max(std::fabs(f.derivative(x)), 1e-300)));
        x = f(x);
      }
      q.A = std::max(c.cfg.c2, *std::max_element(q.values.begin(), q.values.end()));
      double sum = 0.0;
      for (double v : q.values) sum += v;
      rows[i] = {x0, sum / static_cast<double>(n), pliss_times(q)};
    }
    return 0;
  });
  auto& os = c.out.csv("pliss.csv");
  os << "sample,x,mean_log_derivative,count,density,zeta,guaranteed,first_index\n";
  std::size_t guaranteed = 0, meeting = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    guaranteed += r.res.guaranteed;
    meeting += r.res.guaranteed && r.res.density >= r.res.zeta;
    os << i << ',' << real(r.x) << ',' << real(r.mean) << ',' << r.res.indices.size() << ','
       << real(r.res.density) << ',' << real(r.res.zeta) << ',' << (r.res.guaranteed ? 1 : 0) << ','
       << (r.res.indices.empty() ? 0 : r.res.indices.front()) << '\n';
  }
  c.summary["guaranteed"] = guaranteed;
  c.summary["density_at_least_zeta"] = meeting;
}

CurveGraph random_curve(CounterRng& rng, double alpha, const IntervalDomain& fiber) {
  const double lo = rng.uniform(0.0, 0.5);
  const double hi = lo + rng.uniform(0.01, 0.5);
  const double mid = 0.5 * (fiber.lo + fiber.hi), half = 0.25 * fiber.length();
  const double x0 = rng.uniform(mid - half, mid + half);
  const double m = 1 + std::floor(rng.uniform(0.0, 4.0));
  const double phase = rng.uniform(0.0, 2 * std::numbers::pi);
  const double amp = alpha / (2 * std::numbers::pi * m);
  return CurveGraph::sample(
      lo, hi, [&](double t) { return x0 + amp * std::sin(2 * std::numbers::pi * m * t + phase); }, 257);
}

void run_curve(Context& c) {
  const SkewProduct skew = make_skew(c.cfg.system);
  const CurveConstants cc = curve_constants(skew, c.cfg.alpha);
  auto& os = c.out.csv("curve.csv");
  os << "curve,k,pieces,max_slope\n";
  double worst_slope = 0.0, worst_ratio = 0.0;
  std::size_t checked = 0, violations = 0;
  for (std::size_t i = 0; i < c.samples(); ++i) {
    CounterRng rng(c.cfg.seed, i);
    const CurveGraph curve = random_curve(rng, c.cfg.alpha, skew.fiber_domain());
    const auto its = propagate_curve(skew, curve, static_cast<int>(c.cfg.n));
    for (const auto& it : its) {
      os << i << ',' << it.k << ',' << it.pieces.size() << ',' << real(it.max_slope) << '\n';
      if (it.k >= 1) worst_slope = std::max(worst_slope, it.max_slope);
    }
    const auto rep = check_contraction(skew, its, cc.C2);
    checked += rep.checked;
    violations += rep.violations;
    worst_ratio = std::max(worst_ratio, rep.worst_ratio);
  }
  json j;
  j["alpha"] = c.cfg.alpha;
  j["L"] = number(cc.L);
  j["C"] = number(cc.C);
  j["sigma_hat"] = number(cc.sigma_hat);
  j["A"] = number(cc.A);
  j["C1"] = number(cc.C1);
  j["C2"] = number(cc.C2);
  j["max_slope"] = number(worst_slope);
  j["slope_within_1.1_C1"] = worst_slope <= 1.1 * cc.C1;
  j["contraction_checked"] = checked;
  j["contraction_violations"] = violations;
  j["contraction_worst_ratio"] = number(worst_ratio);
  c.out.json_file("curve.json", j);
  c.summary = j;
}

void run_probe(Context& c) {
  const SkewProduct skew = make_skew(c.cfg.system);
  const int n = static_cast<int>(c.cfg.n);
  json records = json::array();
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < c.samples(); ++i) {
    CounterRng rng(c.cfg.seed, i);
    const double theta = rng.uniform();
    const double x = uniform_interior(rng, skew.fiber_domain());
    const auto b = track_branch(fiber_sequence(skew, theta), x, n, {true, false});
    const auto times = b.terminated ? std::vector<int>{} : hyperbolic_like_times(b, c.cfg.delta_tilde);
    const int k = times.empty() ? -1 : times.back();
    if (k < 0) {
      ++skipped;
      continue;
    }
    const auto p = probe_neighborhood(skew, {theta, x}, k, c.cfg.delta_tilde, static_cast<int>(c.cfg.grid));
    json r;
    r["theta"] = p.theta;
    r["x"] = p.x;
    r["k"] = p.k;
    r["delta_tilde"] = p.delta_tilde;
    r["injective"] = p.injective;
    r["K_hat"] = number(p.K_hat);
    r["delta1_hat"] = number(p.delta1_hat);
    r["grid"] = p.grid;
    records.push_back(std::move(r));
  }
  c.out.json_file("probes.json", records);
  std::size_t injective = 0;
  for (const auto& r : records) injective += r["injective"].get<bool>();
  c.summary["probes"] = records.size();
  c.summary["injective"] = injective;
  c.summary["without_hyperbolic_like_time"] = skipped;
}

double arcsine_cdf(double x) {
  return 2.0 / std::numbers::pi * std::asin(std::sqrt(std::clamp(x, 0.0, 1.0)));
}

void run_acim(Context& c) {
  const System sys = make_system(c.cfg);
  const auto grid = BinGrid::for_system(sys, static_cast<std::size_t>(c.cfg.grid),
                                        static_cast<std::size_t>(c.cfg.theta_grid));
  const auto m = empirical_measure(sys, c.samples(), static_cast<std::size_t>(c.cfg.n), grid, c.cfg.seed,
                                   static_cast<unsigned>(c.cfg.threads));
  write_measure_csv(c.out.csv("measure.csv"), m);
  json j;
  j["label"] = m.label;
  j["samples"] = m.samples;
  j["iterations"] = m.iterations;
  j["seed"] = m.seed;
  j["x_lo"] = grid.x.lo;
  j["x_hi"] = grid.x.hi;
  j["nx"] = grid.nx;
  j["ntheta"] = grid.ntheta;
  j["total_count"] = m.total();
  if (c.cfg.system.family == "logistic")
    j["l1_to_arcsine"] = density_compare(m, bin_masses_cdf(grid, arcsine_cdf));
  c.out.json_file("measure.json", j);
  c.summary = j;
}

void run_components(Context& c) {
  const System sys = make_system(c.cfg);
  const auto grid = BinGrid::for_system(sys, static_cast<std::size_t>(c.cfg.grid),
                                        static_cast<std::size_t>(c.cfg.theta_grid));
  const auto rep = ergodic_components(sys, static_cast<std::size_t>(c.cfg.probes),
                                      static_cast<std::size_t>(c.cfg.n), grid, c.cfg.seed, c.cfg.threshold);
  json j;
  j["components"] = rep.components;
  j["threshold"] = rep.threshold;
  j["burn_in"] = rep.burn_in;
  j["collapsed"] = rep.collapsed;
  json sens = json::array();
  for (const auto& [t, k] : rep.sensitivity) sens.push_back({{"threshold", t}, {"components", k}});
  j["sensitivity"] = sens;
  json assign = json::array();
  for (std::size_t a : rep.assignment) assign.push_back(a == SIZE_MAX ? json(nullptr) : json(a));
  j["assignment"] = assign;
  c.out.json_file("components.json", j);
  c.summary["components"] = rep.components;
  c.summary["collapsed"] = rep.collapsed;
}

void run_markov(Context& c) {
  const IntervalMap f = make_map(c.cfg.system);
  const auto part = build_partition(f, static_cast<int>(c.cfg.depth));
  const int N = markov_start_depth(f, part);
  const auto rep = assemble_markov(f, part, static_cast<std::size_t>(c.cfg.seeds), N,
                                   static_cast<int>(c.cfg.k_max), c.cfg.seed);
  write_branch_csv(c.out.csv("markov_branches.csv"), rep.branches);
  json j;
  j["endpoints"] = part.endpoints;
  j["min_len"] = part.min_len;
  j["forward_defect"] = part.forward_defect(f);
  j["N"] = N;
  j["branches"] = rep.branches.size();
  j["seeds"] = rep.seeds;
  j["seed_failures"] = rep.seed_failures;
  j["overlaps"] = rep.overlaps;
  j["image_failures"] = rep.image_failures;
  j["m2_failures"] = rep.m2_failures;
  j["m3_failures"] = rep.m3_failures;
  j["m2_ok"] = rep.m2_ok();
  j["m3_ok"] = rep.m3_ok();
  j["constancy_checks"] = rep.constancy_checks;
  j["constancy_failures"] = rep.constancy_failures;
  j["K_branch"] = number(rep.K_branch);
  j["K_chain"] = number(rep.K_chain);
  j["K_hat"] = number(rep.K_hat);
  j["coverage"] = rep.coverage;
  if (rep.coverage >= 0.95) {
    const auto st = summability_stat(rep.branches, f, 100, c.samples(), c.cfg.seed);
    j["summability"] = {{"mean", number(st.mean)},
                        {"dispersion", number(st.dispersion)},
                        {"probes", st.probes},
                        {"escapes", st.escapes}};
  }
  c.out.json_file("markov.json", j);
  c.summary = j;
  c.summary.erase("endpoints");
}

void dispatch(Context& c) {
  const std::string& e = c.cfg.name;
  if (e == "ftle") return run_ftle(c);
  if (e == "branch") return run_branch(c);
  if (e == "census") return run_census(c);
  if (e == "ay_decay") return run_ay_decay(c);
  if (e == "pliss") return run_pliss(c);
  if (e == "curve") return run_curve(c);
  if (e == "probe") return run_probe(c);
  if (e == "acim") return run_acim(c);
  if (e == "components") return run_components(c);
  if (e == "markov") return run_markov(c);
  throw Error(ErrorCode::kInvalidArgument, "unknown experiment '" + e + "'");
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::kIOFailure, "SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIOFailure, "cannot create " + dir.string());

  RunResult result;
  Outputs outputs;
  json summary = json::object();
  Context ctx{cfg, outputs, summary};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    dispatch(ctx);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIOFailure) throw;
    result.exit_code = 1;
    result.error = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // A failed run keeps no partial data files.
  if (result.exit_code == 0) result.outputs = outputs.write(dir);

  json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["experiment"] = cfg.name;
  m["seed"] = cfg.seed;
  m["rng"] = {{"name", CounterRng::kName}, {"version", CounterRng::kVersion}};
  m["batch_plan"] = {{"batch_size", kBatchSize}, {"threads", cfg.threads}};
  m["config"] = serialize(cfg);
  m["status"] = result.exit_code == 0 ? "ok" : "failed";
  if (result.exit_code != 0) m["error"] = result.error;
  m["wall_time_s"] = wall;
  m["summary"] = summary;
  json files = json::array();
  for (const auto& o : result.outputs) files.push_back({{"file", o.name}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  m["outputs"] = files;

  result.manifest = dir / "manifest.json";
  std::ofstream f(result.manifest, std::ios::trunc);
  f << m.dump(2) << '\n';
  f.close();
  if (!f) throw Error(ErrorCode::kIOFailure, "cannot write " + result.manifest.string());
  result.summary = summary.dump();
  return result;
}

}  // namespace skewlab::experiment
