// Copyright 2026 The qvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qvlab: batch runner for quickselect process experiments.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qvlab/acceptance.hpp"
#include "qvlab/algorithms.hpp"
#include "qvlab/cadlag.hpp"
#include "qvlab/config.hpp"
#include "qvlab/core_model.hpp"
#include "qvlab/coupling.hpp"
#include "qvlab/limit_sampler.hpp"
#include "qvlab/numeric.hpp"
#include "qvlab/parallel.hpp"
#include "qvlab/path_metrics.hpp"
#include "qvlab/stats.hpp"

namespace fs = std::filesystem;
using namespace qvlab;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value
  bool serial = false;
};

// File defaults, then --set pairs, then dedicated flags (applied by the caller).
ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config_file.empty() ? ExperimentConfig{} : ExperimentConfig::load(c.config_file);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

class Output {
 public:
  explicit Output(const ExperimentConfig& cfg) : cfg_(cfg), dir_(cfg.out) {
    fs::create_directories(dir_);
    std::ofstream(dir_ / "config.txt") << "# config_hash=" << cfg.hash() << '\n' << cfg.to_text();
  }

  std::ofstream csv(const std::string& name, const std::string& header) const {
    std::ofstream f(dir_ / name);
    f << "# config_hash=" << cfg_.hash() << '\n' << header << '\n';
    return f;
  }

  void json(const std::string& name, nlohmann::json j) const {
    j["config"] = cfg_.to_json();
    std::ofstream(dir_ / name) << j.dump(2) << '\n';
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  ExperimentConfig cfg_;
  fs::path dir_;
};

Execution mode(const Common& c) { return c.serial ? Execution::serial : Execution::parallel; }

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_file, "flat key=value config file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "config override key=value (repeatable)");
  sub->add_flag("--serial", c.serial, "run on one thread");
}

CostModel cost_of(const ExperimentConfig& cfg) { return *CostModel::from_name(cfg.cost); }

// ---------------------------------------------------------------------------

int cmd_run(const ExperimentConfig& cfg, const Common& c, double alpha) {
  const Output out(cfg);
  const auto cost = cost_of(cfg);
  const auto scheme = *scheme_from_name(cfg.scheme);
  auto f = out.csv("run.csv", "n,replicate,level,comparisons,swaps,beta_cost");
  for (std::size_t n : cfg.n) {
    std::vector<CostProfile> prof(cfg.reps);
    for_each_replicate(
        cfg.reps,
        [&](std::size_t r) {
          Rng rng(cfg.seed, stream_id(n, r));
          std::vector<double> keys(n);
          for (double& k : keys) k = rng.uniform();
          prof[r] = quickval(keys, alpha, cost, {scheme});
        },
        mode(c));
    for (std::size_t r = 0; r < cfg.reps; ++r) {
      for (std::size_t k = 0; k < prof[r].per_level.size(); ++k) {
        const auto& l = prof[r].per_level[k];
        f << n << ',' << r << ',' << k << ',' << l.comparisons << ',' << l.swaps << ',' << format_double(l.beta_cost)
          << '\n';
      }
    }
  }
  std::cout << "wrote " << out.path("run.csv").string() << '\n';
  return 0;
}

// Empirical covariance of G^{<=K}_n on the grid against sigma_inf.
int cmd_simulate(const ExperimentConfig& cfg, const Common& c) {
  const Output out(cfg);
  Rng setup(cfg.seed, stream_id(1000, 0));
  const auto tree = IntervalTree::sample(cfg.K, setup);
  const auto& grid = cfg.grid;
  auto f = out.csv("covariance.csv", "n,alpha,beta,cov,se,sigma_inf,se_distance");
  std::size_t outside = 0, cells = 0;
  for (std::size_t n : cfg.n) {
    std::vector<std::vector<double>> g(grid.size(), std::vector<double>(cfg.reps));
    for_each_replicate(
        cfg.reps,
        [&](std::size_t r) {
          Rng rng(cfg.seed, stream_id(n, r));
          const auto counts = sample_counts_given_tree(tree, n, rng, true);
          const auto res = residual_process(tree, counts);
          for (std::size_t a = 0; a < grid.size(); ++a) g[a][r] = res.G_le(grid[a]);
        },
        mode(c));
    for (std::size_t a = 0; a < grid.size(); ++a) {
      for (std::size_t b = 0; b < grid.size(); ++b) {
        const auto e = cov_with_se(g[a], g[b]);
        const double s = sigma_inf(tree, grid[a], grid[b], cfg.K);
        const double z = se_distance(e.value, s, e.standard_error);
        outside += z > 3.0;
        ++cells;
        f << n << ',' << format_double(grid[a]) << ',' << format_double(grid[b]) << ',' << format_double(e.value)
          << ',' << format_double(e.standard_error) << ',' << format_double(s) << ',' << format_double(z) << '\n';
      }
    }
  }
  out.json("tree.json", {{"tree", tree.to_json()}, {"hash", tree.hash()}});
  std::cout << cells << " covariance cells, " << outside << " beyond 3 SE; wrote " << out.path("covariance.csv").string()
            << '\n';
  return 0;
}

// sigma_inf on the grid for a sampled tree; with a non-unit cost also the
// Monte Carlo covariance of the beta process.
int cmd_covariance(const ExperimentConfig& cfg, const Common&, std::size_t samples) {
  const Output out(cfg);
  Rng rng(cfg.seed, stream_id(1001, 0));
  const auto tree = IntervalTree::sample(cfg.K, rng);
  const auto& grid = cfg.grid;
  const auto cost = cost_of(cfg);
  const auto bc = beta_cov_matrix(tree, grid, cost, samples, rng);
  auto f = out.csv("sigma.csv", "alpha,beta,sigma_inf,beta_cov,beta_se");
  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t b = 0; b < grid.size(); ++b) {
      f << format_double(grid[a]) << ',' << format_double(grid[b]) << ','
        << format_double(sigma_inf(tree, grid[a], grid[b], cfg.K)) << ',' << format_double(bc.cov(a, b)) << ','
        << format_double(bc.se(a, b)) << '\n';
    }
  }
  out.json("tree.json", {{"tree", tree.to_json()}, {"hash", tree.hash()}, {"clipped_eigenvalues", bc.clipped},
                         {"min_eigenvalue", bc.min_eigenvalue}});
  std::cout << "wrote " << out.path("sigma.csv").string() << '\n';
  return 0;
}

std::optional<Metric> metric_of(const std::string& s) {
  if (s == "d2") return Metric::d2;
  if (s == "dG") return Metric::dG;
  return std::nullopt;
}

// Samples G_inf paths; optionally runs the Holder violation test.
int cmd_limit(const ExperimentConfig& cfg, const Common& c, const std::string& holder, std::size_t pairs, int fit_J) {
  const Output out(cfg);
  std::optional<Metric> metric;
  if (!holder.empty()) {
    metric = metric_of(holder);
    if (!metric) throw std::invalid_argument("--holder expects d2 or dG");
  }
  const double exponent = metric == Metric::d2 ? 0.9 * kD2HolderBound : 0.9 * kDGHolderBound;
  std::vector<std::vector<double>> values(cfg.reps);
  std::vector<HolderReport> reports(cfg.reps);
  for_each_replicate(
      cfg.reps,
      [&](std::size_t r) {
        Rng rng(cfg.seed, stream_id(1002, r));
        const auto tree = IntervalTree::sample(cfg.K, rng);
        const auto g = sample_G_inf(sample_family(tree, rng));
        for (double a : cfg.grid) values[r].push_back(g(a));
        if (metric) reports[r] = holder_violations(g, tree, sample_pairs(tree, pairs, rng), *metric, exponent, fit_J);
      },
      mode(c));
  auto f = out.csv("paths.csv", "replicate,alpha,value");
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    for (std::size_t a = 0; a < cfg.grid.size(); ++a) {
      f << r << ',' << format_double(cfg.grid[a]) << ',' << format_double(values[r][a]) << '\n';
    }
  }
  if (!metric) {
    std::cout << "wrote " << out.path("paths.csv").string() << '\n';
    return 0;
  }
  std::size_t violations = 0, bad_paths = 0;
  nlohmann::json per_path = nlohmann::json::array();
  for (const auto& h : reports) {
    violations += h.violations;
    bad_paths += h.violations > 0;
    per_path.push_back(h.to_json());
  }
  out.json("holder.json", {{"metric", holder}, {"exponent", exponent}, {"pairs_per_path", pairs},
                           {"fit_max_J", fit_J}, {"violations", violations}, {"paths", per_path}});
  std::cout << "Holder test " << holder << " at exponent " << format_double(exponent) << ": " << violations
            << " violations on " << bad_paths << "/" << cfg.reps << " paths\n";
  return violations == 0 ? 0 : 1;
}

// Least-squares Holder slope with a bootstrap band, per sampled path.
int cmd_holder(const ExperimentConfig& cfg, const Common& c, const std::string& metric_name, std::size_t pairs,
               std::size_t bootstrap) {
  const Output out(cfg);
  const auto metric = metric_of(metric_name);
  if (!metric) throw std::invalid_argument("--metric expects d2 or dG");
  std::vector<SlopeEstimate> est(cfg.reps);
  for_each_replicate(
      cfg.reps,
      [&](std::size_t r) {
        Rng rng(cfg.seed, stream_id(1003, r));
        const auto tree = IntervalTree::sample(cfg.K, rng);
        const auto g = sample_G_inf(sample_family(tree, rng));
        est[r] = holder_slope(g, tree, sample_pairs(tree, pairs, rng), *metric, bootstrap, rng);
      },
      mode(c));
  auto f = out.csv("holder_slope.csv", "replicate,slope,lo,hi,pairs,degenerate");
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    const auto& e = est[r];
    f << r << ',' << format_double(e.slope) << ',' << format_double(e.lo) << ',' << format_double(e.hi) << ','
      << e.pairs << ',' << e.degenerate << '\n';
  }
  std::cout << "wrote " << out.path("holder_slope.csv").string() << '\n';
  return 0;
}

// "v0;t1:v1;t2:v2" -> step function with value v0 on [0,t1), v1 on [t1,t2), ...
StepFunction parse_step(const std::string& spec) {
  std::stringstream ss(spec);
  std::string item;
  if (!std::getline(ss, item, ';')) throw std::invalid_argument("empty step function");
  const double v0 = std::stod(item);
  std::vector<double> jumps, values;
  while (std::getline(ss, item, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("step piece '" + item + "' needs t:v");
    jumps.push_back(std::stod(item.substr(0, colon)));
    values.push_back(std::stod(item.substr(colon + 1)));
  }
  return StepFunction(v0, jumps, values);
}

int cmd_skorokhod(const std::string& f_spec, const std::string& g_spec, double tol, double delta) {
  const auto f = parse_step(f_spec), g = parse_step(g_spec);
  nlohmann::json j = {{"skorokhod", skorokhod_dist(f, g, tol)}, {"sup_dist", sup_dist(f, g)}, {"tol", tol}};
  if (delta > 0.0) {
    j["modulus_f"] = modulus(f, delta);
    j["modulus_g"] = modulus(g, delta);
    j["delta"] = delta;
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_validate(const ExperimentConfig& cfg, const Common& c, double scale) {
  const Output out(cfg);
  AcceptanceOptions opt;
  opt.seed = cfg.seed;
  opt.scale = scale;
  opt.execution = mode(c);
  opt.only = suite_criteria(cfg.suite);
  auto summary = out.csv("summary.csv", "criterion,title,pass,seconds");
  int failed = 0, total = 0;
  run_acceptance(opt, [&](const CriterionResult& r) {
    std::cout << r.line() << std::endl;
    const std::string tag = r.id > 0 ? "C" + std::to_string(r.id) : std::string("aux");
    out.json("criterion_" + tag + ".json", {{"id", r.id}, {"title", r.title}, {"pass", r.pass},
                                            {"detail", r.detail}, {"data", r.data}});
    summary << tag << ",\"" << r.title << "\"," << r.pass << ',' << format_double(r.seconds) << '\n';
    if (r.id > 0) {
      ++total;
      failed += !r.pass;
    }
  });
  std::cout << (total - failed) << "/" << total << " criteria passed; reports in " << out.path("").string() << '\n';
  return failed == 0 ? 0 : 1;
}

// Hand-checkable fixtures plus fast structural criteria.
int cmd_selftest() {
  int bad = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << '\n';
    bad += !ok;
  };
  const std::vector<double> fix1 = {0.5, 0.25, 0.75};
  const auto tree = IntervalTree::build(fix1, 2);
  check(tree.path_of(0.3, 2).to_string() == "01", "path of 0.3 in (0.5, 0.25, 0.75) is 01");
  check(std::abs(sigma_inf(tree, 0.3, 0.6, 2) + 0.5625) < 1e-12, "sigma_inf(0.3, 0.6) = -0.5625");
  check(quickval(fix1, 0.3, CostModel::unit()).comparisons == 2, "quickval comparisons at 0.3 = 2");
  check(bit_cost(0.5, 0.25) == 1, "bit cost of (0.5, 0.25) = 1");
  check(std::abs(skorokhod_dist(StepFunction::indicator(0.3), StepFunction::indicator(0.35)) - 0.05) < 1e-9,
        "shifted indicator distance 0.05");
  AcceptanceOptions opt;
  opt.scale = 0.01;
  opt.only = {1, 6, 7, 9, 14};
  for (const auto& r : run_acceptance(opt)) {
    if (r.id == 1) {
      // The k-1 form fails at the root by construction; the k form is exact.
      check(r.data.at("violations_k").get<std::size_t>() == 0, "sandwich S <= (S~-1)+ <= S + k on every node");
    } else {
      check(r.pass, r.line());
    }
  }
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qvlab: simulation and validation of quickselect processes"};
  app.require_subcommand(1);
  app.footer("Set QVLAB_THREADS to cap worker threads.");

  Common common;
  std::optional<std::uint64_t> seed;
  std::optional<int> K;
  std::optional<std::size_t> reps;
  std::vector<std::size_t> ns;
  std::string out_dir, cost, scheme, suite;
  auto flags = [&](CLI::App* sub) {
    add_common(sub, common);
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory");
  };

  double alpha = 0.5;
  auto* run = app.add_subcommand("run", "per-level costs of QuickVal on uniform keys");
  flags(run);
  run->add_option("--n", ns, "list sizes");
  run->add_option("--reps", reps, "replicates");
  run->add_option("--alpha", alpha, "quantile")->check(CLI::Range(0.0, 1.0));
  run->add_option("--cost", cost, "unit | bit");
  run->add_option("--scheme", scheme, "hoare | lomuto | none");

  auto* simulate = app.add_subcommand("simulate", "finite-n covariance of the level process vs sigma_inf");
  flags(simulate);
  simulate->add_option("--n", ns, "list sizes");
  simulate->add_option("--K", K, "tree depth");
  simulate->add_option("--reps", reps, "replicates");

  std::size_t samples = 100000;
  auto* covariance = app.add_subcommand("covariance", "sigma_inf and beta-cost covariance on the grid");
  flags(covariance);
  covariance->add_option("--K", K, "tree depth");
  covariance->add_option("--cost", cost, "unit | bit");
  covariance->add_option("--samples", samples, "V-samples for the beta covariance");

  std::string holder;
  std::size_t pairs = 100000;
  int fit_J = 2;
  auto* limit = app.add_subcommand("limit", "sample limit paths; optional Holder violation test");
  flags(limit);
  limit->add_option("--K", K, "tree depth");
  limit->add_option("--reps", reps, "paths");
  limit->add_option("--holder", holder, "d2 | dG");
  limit->add_option("--pairs", pairs, "pairs per path");
  limit->add_option("--fit-depth", fit_J, "fit C on pairs with junction depth <= this");

  std::string metric = "dG";
  std::size_t bootstrap = 200;
  auto* holder_cmd = app.add_subcommand("holder", "regression Holder slope with bootstrap band");
  flags(holder_cmd);
  holder_cmd->add_option("--K", K, "tree depth");
  holder_cmd->add_option("--reps", reps, "paths");
  holder_cmd->add_option("--metric", metric, "d2 | dG");
  holder_cmd->add_option("--pairs", pairs, "pairs per path");
  holder_cmd->add_option("--bootstrap", bootstrap, "bootstrap resamples");

  std::string f_spec, g_spec;
  double tol = 1e-9, delta = 0.0;
  auto* sk = app.add_subcommand("skorokhod", "Skorokhod distance between two step functions");
  sk->add_option("f", f_spec, "v0;t1:v1;...")->required();
  sk->add_option("g", g_spec, "v0;t1:v1;...")->required();
  sk->add_option("--tol", tol, "bisection tolerance");
  sk->add_option("--delta", delta, "also report the modulus w'(delta)");

  double scale = 1.0;
  auto* validate = app.add_subcommand("validate", "run acceptance criteria and write reports");
  flags(validate);
  validate->add_option("--suite", suite, "suite name or criterion ids");
  validate->add_option("--scale", scale, "replicate multiplier")->check(CLI::PositiveNumber);

  auto* selftest = app.add_subcommand("selftest", "fixtures and fast structural checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (selftest->parsed()) return cmd_selftest();
    if (sk->parsed()) return cmd_skorokhod(f_spec, g_spec, tol, delta);

    ExperimentConfig cfg = resolve(common);
    if (seed) cfg.seed = *seed;
    if (K) cfg.K = *K;
    if (reps) cfg.reps = *reps;
    if (!ns.empty()) cfg.n = ns;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!cost.empty()) cfg.cost = cost;
    if (!scheme.empty()) cfg.scheme = scheme;
    if (!suite.empty()) cfg.suite = suite;
    cfg.validate();

    if (run->parsed()) return cmd_run(cfg, common, alpha);
    if (simulate->parsed()) return cmd_simulate(cfg, common);
    if (covariance->parsed()) return cmd_covariance(cfg, common, samples);
    if (limit->parsed()) return cmd_limit(cfg, common, holder, pairs, fit_J);
    if (holder_cmd->parsed()) return cmd_holder(cfg, common, metric, pairs, bootstrap);
    if (validate->parsed()) return cmd_validate(cfg, common, scale);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
