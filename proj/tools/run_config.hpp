#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "invset/basis.hpp"
#include "invset/dynamics.hpp"
#include "invset/geometry.hpp"
#include "invset/invariant.hpp"
#include "invset/serialization.hpp"

namespace invset::cli {

struct Seeds {
  std::uint64_t data = 1;
  std::uint64_t artificial = 1;
  std::uint64_t centers = 1;
  std::uint64_t quadrature = 1;
  std::uint64_t mc = 1;
};

struct Outputs {
  std::string dataset;
  std::string model;
  std::string report;
  std::string grid;
};

/// Declarative description of one experiment. Every field has a fixed
/// default; nothing depends on the clock.
struct RunConfig {
  json system_json = {{"kind", "julia"}};
  std::optional<json> state_set_json;
  std::optional<json> control_set_json;
  json basis_json = {{"kind", "monomial"}, {"degree", 10}};

  double alpha = 0.6;
  int k = 30000;
  std::optional<int> k_prime;
  std::optional<double> split_fraction;
  Seeds seeds;

  std::string solver = kDefaultSolver;
  SolverOptions solver_options;
  Quadrature::Method quadrature_method = Quadrature::Method::automatic;
  int quadrature_samples = 1'000'000;

  int metric_samples = 100000;
  int oracle_horizon = 1000;
  int grid_resolution = 200;
  Outputs outputs;

  SystemSpec system() const;
  ConstraintSet state_set() const;
  std::optional<ConstraintSet> control_set() const;
  /// Monomial degree or RBF center count resolved against the state set.
  BasisSpec basis() const;
  FitConfig fit_config() const;
};

/// Parses and validates a config document. Unknown keys, wrong types and
/// out-of-range values raise ConfigError before any computation starts.
RunConfig parse_run_config(const json& j);
RunConfig load_run_config(const std::string& path);

/// Fails with ConfigError when the parent directory of `path` is missing.
void check_writable(const std::string& path);

}  // namespace invset::cli
