#include "run_config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "invset/errors.hpp"

namespace invset::cli {

namespace {

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <typename T>
T get_number(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    if constexpr (std::is_unsigned_v<T>)
      if (v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError(where + "." + key + " must be non-negative");
  }
  return v.get<T>();
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  only_keys(j, "config",
            {"system", "state_set", "control_set", "basis", "alpha", "K", "K_prime",
             "split_fraction", "seeds", "solver", "quadrature", "metrics", "outputs"});
  RunConfig c;
  if (j.contains("system")) c.system_json = j.at("system");
  if (j.contains("state_set")) c.state_set_json = j.at("state_set");
  if (j.contains("control_set")) c.control_set_json = j.at("control_set");
  if (j.contains("basis")) c.basis_json = j.at("basis");
  if (j.contains("alpha")) c.alpha = get_number<double>(j, "alpha", "config");
  if (j.contains("K")) c.k = get_number<int>(j, "K", "config");
  if (j.contains("K_prime")) c.k_prime = get_number<int>(j, "K_prime", "config");
  if (j.contains("split_fraction"))
    c.split_fraction = get_number<double>(j, "split_fraction", "config");

  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    only_keys(s, "seeds", {"data", "artificial", "centers", "quadrature", "mc"});
    if (s.contains("data")) c.seeds.data = get_number<std::uint64_t>(s, "data", "seeds");
    if (s.contains("artificial"))
      c.seeds.artificial = get_number<std::uint64_t>(s, "artificial", "seeds");
    if (s.contains("centers")) c.seeds.centers = get_number<std::uint64_t>(s, "centers", "seeds");
    if (s.contains("quadrature"))
      c.seeds.quadrature = get_number<std::uint64_t>(s, "quadrature", "seeds");
    if (s.contains("mc")) c.seeds.mc = get_number<std::uint64_t>(s, "mc", "seeds");
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    only_keys(s, "solver", {"name", "feasibility_tol", "gap_tol", "max_iterations"});
    if (s.contains("name")) c.solver = get_string(s, "name", "solver");
    if (s.contains("feasibility_tol"))
      c.solver_options.feasibility_tol = get_number<double>(s, "feasibility_tol", "solver");
    if (s.contains("gap_tol")) c.solver_options.gap_tol = get_number<double>(s, "gap_tol", "solver");
    if (s.contains("max_iterations"))
      c.solver_options.max_iterations = get_number<int>(s, "max_iterations", "solver");
  }
  if (j.contains("quadrature")) {
    const json& q = j.at("quadrature");
    only_keys(q, "quadrature", {"method", "samples"});
    if (q.contains("method")) {
      const std::string m = get_string(q, "method", "quadrature");
      if (m == "automatic") c.quadrature_method = Quadrature::Method::automatic;
      else if (m == "analytic") c.quadrature_method = Quadrature::Method::analytic;
      else if (m == "monte_carlo") c.quadrature_method = Quadrature::Method::monte_carlo;
      else throw ConfigError("quadrature.method must be automatic, analytic or monte_carlo");
    }
    if (q.contains("samples")) c.quadrature_samples = get_number<int>(q, "samples", "quadrature");
  }
  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    only_keys(m, "metrics", {"M", "T", "grid_resolution"});
    if (m.contains("M")) c.metric_samples = get_number<int>(m, "M", "metrics");
    if (m.contains("T")) c.oracle_horizon = get_number<int>(m, "T", "metrics");
    if (m.contains("grid_resolution"))
      c.grid_resolution = get_number<int>(m, "grid_resolution", "metrics");
  }
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    only_keys(o, "outputs", {"dataset", "model", "report", "grid"});
    if (o.contains("dataset")) c.outputs.dataset = get_string(o, "dataset", "outputs");
    if (o.contains("model")) c.outputs.model = get_string(o, "model", "outputs");
    if (o.contains("report")) c.outputs.report = get_string(o, "report", "outputs");
    if (o.contains("grid")) c.outputs.grid = get_string(o, "grid", "outputs");
  }

  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (c.k < 1) throw ConfigError("K must be positive");
  if (c.k_prime && *c.k_prime < 1) throw ConfigError("K_prime must be positive");
  if (c.split_fraction && !(*c.split_fraction > 0.0 && *c.split_fraction < 1.0))
    throw ConfigError("split_fraction must lie in (0, 1)");
  if (c.quadrature_samples < 1) throw ConfigError("quadrature.samples must be positive");
  if (c.solver_options.max_iterations < 1)
    throw ConfigError("solver.max_iterations must be positive");
  if (c.metric_samples < 1000) throw ConfigError("metrics.M must be at least 1000");
  if (c.oracle_horizon < 1) throw ConfigError("metrics.T must be positive");
  if (c.grid_resolution < 2) throw ConfigError("metrics.grid_resolution must be >= 2");

  // Resolve the structured parts now so that errors surface before any work.
  const SystemSpec sys = c.system();
  const ConstraintSet x = c.state_set();
  if (x.dimension() != sys.state_dimension())
    throw ConfigError("state_set dimension does not match the system");
  const auto u = c.control_set();
  if (sys.control_dimension() > 0 && !u)
    throw ConfigError("controlled systems need a control_set");
  if (u && u->dimension() != sys.control_dimension())
    throw ConfigError("control_set dimension does not match the system");
  const json& b = c.basis_json;
  if (!b.is_object() || !b.contains("kind")) throw ConfigError("basis needs a 'kind'");
  if (b.contains("count") || b.contains("degree")) {
    only_keys(b, "basis", {"kind", "degree", "count"});
    if (b.contains("degree") && b.contains("count"))
      throw ConfigError("basis takes either 'degree' or 'count'");
  }
  c.basis();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_run_config(j);
}

SystemSpec RunConfig::system() const { return system_from_json(system_json); }

ConstraintSet RunConfig::state_set() const {
  return state_set_json ? set_from_json(*state_set_json) : system().default_state_set();
}

std::optional<ConstraintSet> RunConfig::control_set() const {
  if (control_set_json) return set_from_json(*control_set_json);
  return system().default_control_set();
}

BasisSpec RunConfig::basis() const {
  const json& b = basis_json;
  if (!b.is_object() || !b.contains("kind") || !b.at("kind").is_string())
    throw ConfigError("basis needs a string 'kind'");
  const std::string kind = b.at("kind").get<std::string>();
  const int n = system().state_dimension();
  try {
    if (kind == "monomial" && b.contains("degree") && !b.contains("n"))
      return BasisSpec::monomial(n, get_number<int>(b, "degree", "basis"));
    if (kind == "rbf_thin_plate" && b.contains("count"))
      return BasisSpec::thin_plate(
          generate_rbf_centers(state_set(), get_number<int>(b, "count", "basis"), seeds.centers));
  } catch (const InputError& e) {
    throw ConfigError(std::string("basis: ") + e.what());
  }
  BasisSpec full = basis_from_json(b);
  if (full.state_dimension() != n) throw ConfigError("basis dimension does not match the system");
  return full;
}

FitConfig RunConfig::fit_config() const {
  FitConfig f(basis());
  f.alpha = alpha;
  f.artificial_points = k_prime;
  f.artificial_seed = seeds.artificial;
  f.split_fraction = split_fraction;
  if (basis_json.contains("count")) f.centers_seed = seeds.centers;
  f.quadrature.method = quadrature_method;
  f.quadrature.samples = quadrature_samples;
  f.quadrature.seed = seeds.quadrature;
  f.solver_options = solver_options;
  f.solver = solver;
  return f;
}

void check_writable(const std::string& path) {
  if (path.empty()) throw ConfigError("no output path given");
  const auto parent = std::filesystem::absolute(path).parent_path();
  if (!std::filesystem::is_directory(parent))
    throw ConfigError("output directory does not exist: " + parent.string());
}

}  // namespace invset::cli
