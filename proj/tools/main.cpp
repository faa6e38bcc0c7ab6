// invset: command-line driver for dataset generation, fitting, evaluation
// and the sample-bound calculators.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "invset/complexity.hpp"
#include "invset/errors.hpp"
#include "invset/kernels.hpp"
#include "invset/metrics.hpp"
#include "run_config.hpp"

using namespace invset;
using invset::cli::RunConfig;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kDegenerate = 4 };

struct Globals {
  int threads = 0;
  bool no_timestamp = false;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void stamp(json& j, const Globals& g) {
  if (!g.no_timestamp) j["created_at"] = utc_now();
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  cli::check_writable(path);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

RunConfig load_config(const std::string& path) {
  return path.empty() ? cli::parse_run_config(json::object()) : cli::load_run_config(path);
}

// gen ----------------------------------------------------------------------

struct GenArgs {
  std::string config, out;
  std::optional<int> count;
  std::optional<std::uint64_t> seed;
};

int run_gen(const GenArgs& a) {
  RunConfig c = load_config(a.config);
  if (a.count) c.k = *a.count;
  if (a.seed) c.seeds.data = *a.seed;
  if (c.k < 1) throw ConfigError("K must be positive");
  const std::string out = a.out.empty() ? c.outputs.dataset : a.out;
  cli::check_writable(out);
  const SystemSpec sys = c.system();
  const TransitionDataset d =
      generate_dataset(sys, c.state_set(), c.control_set(), c.k, c.seeds.data);
  write_dataset_csv(d, out);
  std::fprintf(stderr, "wrote %d transitions of %s to %s\n", d.size(), sys.name().c_str(),
               out.c_str());
  return kOk;
}

// fit ----------------------------------------------------------------------

struct FitArgs {
  std::string config, data, out;
  std::optional<double> alpha, split;
  bool verbose = false;
};

int run_fit(const FitArgs& a, const Globals& g) {
  RunConfig c = load_config(a.config);
  if (a.alpha) c.alpha = *a.alpha;
  if (a.split) c.split_fraction = *a.split;
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const std::string out = a.out.empty() ? c.outputs.model : a.out;
  cli::check_writable(out);
  FitConfig fc = c.fit_config();
  fc.solver_options.verbose = a.verbose;
  const ConstraintSet set = c.state_set();
  std::string data_path = a.data.empty() ? c.outputs.dataset : a.data;
  if (data_path.empty()) throw ConfigError("fit needs a dataset (--data)");
  TransitionDataset d = read_dataset_csv(data_path);
  const ValueModel model = fit(d, set, fc);
  json j = to_json(model);
  stamp(j, g);
  write_json(j, out);
  std::fprintf(stderr, "fit N=%d status=%s iterations=%d objective=%.6g\n", model.basis.size(),
               model.metadata.solver_status.c_str(), model.metadata.solver_iterations,
               model.metadata.objective);
  return kOk;
}

// eval / certify -----------------------------------------------------------

struct EvalArgs {
  std::string config, model, mode = "standard", report, grid, data;
  std::optional<double> lipschitz_f, epsilon;
  int lipschitz_samples = 10000;
  int dispersion_resolution = 200;
  std::optional<int> samples, horizon;
};

int run_eval(const EvalArgs& a, const Globals& g) {
  RunConfig c = load_config(a.config);
  if (a.samples) c.metric_samples = *a.samples;
  if (a.horizon) c.oracle_horizon = *a.horizon;
  if (c.metric_samples < 1000) throw ConfigError("metric samples must be at least 1000");
  const std::string report_path = a.report.empty() ? c.outputs.report : a.report;
  const std::string grid_path = a.grid.empty() ? c.outputs.grid : a.grid;
  if (!report_path.empty() && report_path != "-") cli::check_writable(report_path);
  if (!grid_path.empty()) cli::check_writable(grid_path);
  if (a.model.empty() && c.outputs.model.empty()) throw ConfigError("eval needs --model");
  const ValueModel model = load_model(a.model.empty() ? c.outputs.model : a.model);

  json report = {{"mode", a.mode}};
  double threshold = 0.0;
  if (a.mode == "conservative") {
    if (!model.metadata.conservative_threshold)
      throw ConfigError("model has no stored validation slack; refit with a split");
    threshold = *model.metadata.conservative_threshold;
    report["e_bar"] = *model.metadata.e_bar;
  } else if (a.mode == "guaranteed") {
    if (!a.lipschitz_f) throw ConfigError("guaranteed mode needs --lipschitz-f");
    double eps = 0.0;
    if (a.epsilon) {
      eps = *a.epsilon;
    } else {
      if (a.data.empty()) throw ConfigError("guaranteed mode needs --epsilon or --data");
      const TransitionDataset d = read_dataset_csv(a.data);
      eps = dispersion_upper_bound(model.set, d.x, a.dispersion_resolution);
    }
    const double lip_v = lipschitz_estimate(model, a.lipschitz_samples, c.seeds.mc);
    threshold = guaranteed_threshold(model, *a.lipschitz_f, eps, lip_v);
    report["epsilon"] = eps;
    report["lipschitz_f"] = *a.lipschitz_f;
    report["lipschitz_v"] = lip_v;
  } else if (a.mode != "standard") {
    throw ConfigError("mode must be standard, conservative or guaranteed");
  }
  report["threshold"] = threshold;

  const SystemSpec sys = c.system();
  if (sys.control_dimension() == 0) {
    const Oracle oracle = make_mpi_oracle(sys, model.set, c.oracle_horizon);
    MetricsReport r = estimate_metrics(model, threshold, oracle, c.metric_samples, c.seeds.mc);
    r.horizon = c.oracle_horizon;
    report["metrics"] = to_json(r);
  } else {
    report["metrics"] = nullptr;  // no ground truth for controlled systems
  }
  if (!grid_path.empty()) {
    GridOptions go;
    go.resolution = c.grid_resolution;
    go.seed = c.seeds.mc;
    write_grid_csv(classify_grid(model, threshold, go), grid_path);
  }
  stamp(report, g);
  write_json(report, report_path);
  return kOk;
}

// bound --------------------------------------------------------------------

struct BoundArgs {
  double epsilon = 0.0, delta = 0.0, diameter = 0.0;
  int n = 1;
  std::optional<double> alpha, lipschitz_f, lipschitz_residual;
  std::string formula = "proof";
};

int run_bound(const BoundArgs& a, const Globals& g) {
  const NetFormula formula = a.formula == "printed" ? NetFormula::printed : NetFormula::proof;
  json out;
  const bool sample_bound = a.alpha || a.lipschitz_f || a.lipschitz_residual;
  if (sample_bound) {
    if (!a.alpha || !a.lipschitz_f || !a.lipschitz_residual)
      throw ConfigError("the sample bound needs --alpha, --lipschitz-f and --lipschitz-residual");
    BoundInputs in;
    in.epsilon = a.epsilon;
    in.delta = a.delta;
    in.n = a.n;
    in.diameter = a.diameter;
    in.alpha = *a.alpha;
    in.lipschitz_f = *a.lipschitz_f;
    in.lipschitz_residual = *a.lipschitz_residual;
    const SampleBound b = lp_samples(in);
    out = {{"zeta", b.zeta}, {"K", b.samples}, {"formula_variant", "proof"}};
  } else {
    const std::int64_t k = epsilon_net_samples(a.epsilon, a.delta, a.diameter, a.n, formula);
    out = {{"zeta", a.epsilon / (2.0 * a.diameter)},
           {"K", k},
           {"formula_variant", to_string(formula)}};
  }
  stamp(out, g);
  std::cout << out.dump(2) << '\n';
  return kOk;
}

// bench --------------------------------------------------------------------

struct BenchArgs {
  std::string suite = "monomial", out;
  double scale = 1.0;
  std::optional<int> samples;
};

int run_bench(const BenchArgs& a, const Globals& g) {
  if (!(a.scale > 0.0)) throw ConfigError("scale must be positive");
  RunConfig c = load_config("");
  c.seeds = {11, 1, 5, 3, 99};
  if (a.samples) c.metric_samples = *a.samples;
  if (c.metric_samples < 1000) throw ConfigError("metric samples must be at least 1000");
  c.k = std::max(1, static_cast<int>(std::lround(30000 * a.scale)));
  std::vector<json> bases;
  if (a.suite == "monomial") {
    for (int d : {10, 14, 18}) bases.push_back({{"kind", "monomial"}, {"degree", d}});
  } else if (a.suite == "rbf") {
    for (int n : {200, 600, 1000}) bases.push_back({{"kind", "rbf_thin_plate"}, {"count", n}});
  } else {
    throw ConfigError("suite must be monomial or rbf");
  }
  if (!a.out.empty()) cli::check_writable(a.out);

  const SystemSpec sys = c.system();
  const ConstraintSet set = c.state_set();
  const TransitionDataset data = generate_dataset(sys, set, std::nullopt, c.k, c.seeds.data);
  const Oracle oracle = make_mpi_oracle(sys, set, c.oracle_horizon);
  json rows = json::array();
  for (const json& b : bases) {
    c.basis_json = b;
    const auto t0 = std::chrono::steady_clock::now();
    const ValueModel m = fit(data, set, c.fit_config());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const MetricsReport r = estimate_metrics(m, 0.0, oracle, c.metric_samples, c.seeds.mc);
    json row = {{"basis", b.at("kind")},
                {"N", m.basis.size()},
                {"K", c.k},
                {"volume_error_pct", r.volume_error_pct},
                {"misclassification_pct", r.misclassification_pct},
                {"volume_error_se", r.volume_error_se},
                {"iterations", m.metadata.solver_iterations}};
    if (!g.no_timestamp) row["fit_seconds"] = secs;
    std::fprintf(stderr, "N=%4d vol %.2f%% mis %.4f%%\n", m.basis.size(), r.volume_error_pct,
                 r.misclassification_pct);
    rows.push_back(row);
  }
  json out = {{"suite", a.suite},
              {"scale", a.scale},
              {"alpha", c.alpha},
              {"M", c.metric_samples},
              {"T", c.oracle_horizon},
              {"rows", rows}};
  stamp(out, g);
  write_json(out, a.out);
  return kOk;
}

int exit_for(LpStatus s) {
  return s == LpStatus::numerical_failure ? kNumerical : kDegenerate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant-set approximation from transition data"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0 = all available)");
  app.add_flag("--no-timestamp", g.no_timestamp, "Omit created_at fields");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Sample a transition dataset");
  gen_cmd->add_option("-c,--config", gen.config, "Run config JSON");
  gen_cmd->add_option("-o,--out", gen.out, "Dataset CSV");
  gen_cmd->add_option("-K,--count", gen.count, "Number of transitions");
  gen_cmd->add_option("--seed", gen.seed, "Data seed");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Solve the sampled LP for a value function");
  fit_cmd->add_option("-c,--config", fa.config, "Run config JSON");
  fit_cmd->add_option("-d,--data", fa.data, "Dataset CSV");
  fit_cmd->add_option("-o,--out", fa.out, "Model JSON");
  fit_cmd->add_option("--alpha", fa.alpha, "Discount factor");
  fit_cmd->add_option("--split", fa.split, "Training fraction; the rest is validation");
  fit_cmd->add_flag("-v,--verbose", fa.verbose, "Trace solver iterations");

  EvalArgs ea, ca;
  ca.mode = "conservative";
  auto add_eval = [](CLI::App* cmd, EvalArgs& e) {
    cmd->add_option("-c,--config", e.config, "Run config JSON (system, metrics, seeds)");
    cmd->add_option("-m,--model", e.model, "Model JSON");
    cmd->add_option("--mode", e.mode, "standard | conservative | guaranteed");
    cmd->add_option("-r,--report", e.report, "Report JSON (- for stdout)");
    cmd->add_option("-g,--grid", e.grid, "Grid CSV");
    cmd->add_option("-d,--data", e.data, "Dataset CSV used for the dispersion estimate");
    cmd->add_option("--lipschitz-f", e.lipschitz_f, "Lipschitz constant of the dynamics");
    cmd->add_option("--epsilon", e.epsilon, "Data dispersion");
    cmd->add_option("--lipschitz-samples", e.lipschitz_samples, "Gradient samples for L_v");
    cmd->add_option("--dispersion-resolution", e.dispersion_resolution, "Grid per axis");
    cmd->add_option("-M,--samples", e.samples, "Monte-Carlo samples");
    cmd->add_option("-T,--horizon", e.horizon, "Oracle horizon");
  };
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model against the oracle");
  add_eval(eval_cmd, ea);
  auto* cert_cmd = app.add_subcommand("certify", "eval in conservative or guaranteed mode");
  add_eval(cert_cmd, ca);

  BoundArgs ba;
  auto* bound_cmd = app.add_subcommand("bound", "Sample-count calculators");
  bound_cmd->add_option("--epsilon", ba.epsilon, "Accuracy")->required();
  bound_cmd->add_option("--delta", ba.delta, "Failure probability")->required();
  bound_cmd->add_option("--diameter", ba.diameter, "Set diameter")->required();
  bound_cmd->add_option("-n,--dimension", ba.n, "State dimension")->required();
  bound_cmd->add_option("--alpha", ba.alpha, "Discount factor");
  bound_cmd->add_option("--lipschitz-f", ba.lipschitz_f, "Lipschitz constant of f");
  bound_cmd->add_option("--lipschitz-residual", ba.lipschitz_residual,
                        "Lipschitz surrogate for the Bellman residual");
  bound_cmd->add_option("--formula", ba.formula, "proof | printed")
      ->check(CLI::IsMember({"proof", "printed"}));

  BenchArgs be;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark rows on the Julia system");
  bench_cmd->add_option("suite", be.suite, "monomial (d = 10, 14, 18) | rbf (N = 200, 600, 1000)");
  bench_cmd->add_option("--scale", be.scale, "Multiplier on K = 30000");
  bench_cmd->add_option("-M,--samples", be.samples, "Monte-Carlo samples");
  bench_cmd->add_option("-o,--out", be.out, "Table JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (g.threads < 0) throw ConfigError("--threads must be >= 0");
    kernels::set_threads(g.threads);
    if (*gen_cmd) return run_gen(gen);
    if (*fit_cmd) return run_fit(fa, g);
    if (*eval_cmd) return run_eval(ea, g);
    if (*cert_cmd) {
      if (ca.mode == "standard") throw ConfigError("certify needs conservative or guaranteed mode");
      return run_eval(ca, g);
    }
    if (*bound_cmd) return run_bound(ba, g);
    if (*bench_cmd) return run_bench(be, g);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kConfig;
  } catch (const SolverStatusError& e) {
    std::fprintf(stderr, "solver: %s\n", e.what());
    return exit_for(e.status());
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const DegenerateError& e) {
    std::fprintf(stderr, "degenerate: %s\n", e.what());
    return kDegenerate;
  }
  return kOk;
}
