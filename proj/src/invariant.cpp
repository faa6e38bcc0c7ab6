#include "invset/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "invset/errors.hpp"
#include "invset/kernels.hpp"
#include "invset/serialization.hpp"

namespace invset {

int default_artificial_points(int basis_size) {
  return std::max(2 * basis_size, 200);
}

ValueModel fit(const TransitionDataset& data, const ConstraintSet& set,
               const FitConfig& config, const SolverRegistry& registry) {
  if (data.size() < 1) throw InputError("cannot fit on an empty dataset");
  if (data.dimension() != set.dimension() ||
      config.basis.state_dimension() != set.dimension())
    throw InputError("dataset, basis and set dimensions differ");
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw InputError("alpha must lie in (0, 1)");

  const LpSolver& solver = registry.get(config.solver);

  TransitionDataset training = data;
  std::optional<TransitionDataset> validation;
  if (config.split_fraction) {
    auto parts = data.split(*config.split_fraction);
    training = std::move(parts.first);
    validation = std::move(parts.second);
  }

  const int n_basis = config.basis.size();
  const int kp = config.artificial_points.value_or(default_artificial_points(n_basis));
  if (kp < 1) throw InputError("artificial point count must be positive");
  const Eigen::MatrixXd artificial = set.sample_uniform(kp, config.artificial_seed);
  const Unisolvency uni = unisolvency_check(config.basis, artificial);
  if (!uni.unisolvent)
    throw ConfigError("artificial points are not unisolvent (rank " +
                      std::to_string(uni.rank) + " < N = " +
                      std::to_string(n_basis) + "); increase K'");

  const Integral integral = integrate_basis(config.basis, set, config.quadrature);
  LpProblem problem =
      assemble_constraints(training, artificial, config.basis, set, config.alpha);
  problem.objective = integral.z;

  const LpSolution sol = solver(problem, config.solver_options);
  if (sol.status != LpStatus::optimal)
    throw SolverStatusError(sol.status, "LP solver '" + config.solver +
                                            "' returned " + to_string(sol.status));

  ModelMetadata meta;
  meta.training_pairs = training.size();
  meta.validation_pairs = validation ? validation->size() : 0;
  meta.artificial_points = kp;
  meta.data_seed = data.seed;
  meta.artificial_seed = config.artificial_seed;
  meta.centers_seed = config.centers_seed;
  meta.integration_method = integral.analytic ? "analytic" : "monte_carlo";
  meta.integration_samples = integral.samples;
  meta.integration_seed = integral.analytic ? 0 : config.quadrature.seed;
  meta.integration_error = integral.standard_error;
  meta.artificial_condition = uni.condition_estimate;
  meta.solver = config.solver;
  meta.solver_status = to_string(sol.status);
  meta.solver_iterations = sol.iterations;
  meta.objective = sol.primal_objective;
  meta.max_constraint_violation = sol.max_constraint_violation;
  meta.duality_gap = sol.duality_gap;

  ValueModel model{config.basis, sol.coefficients, config.alpha, set, meta};
  if (validation) {
    const ConservativeThreshold ct = conservative_threshold(model, *validation);
    model.metadata.e_bar = ct.e_bar;
    model.metadata.conservative_threshold = ct.threshold;
  }
  return model;
}

double evaluate_value(const ValueModel& model, const Eigen::VectorXd& x) {
  return model.basis.eval(x).dot(model.coefficients);
}

Eigen::VectorXd evaluate_values(const ValueModel& model,
                                const Eigen::MatrixXd& points) {
  return kernels::basis_values(model.basis, model.coefficients, points);
}

bool member(const ValueModel& model, const Eigen::VectorXd& x,
            double threshold) {
  return model.set.contains(x) && evaluate_value(model, x) <= threshold;
}

double bellman_residual(const ValueModel& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x_plus) {
  return evaluate_value(model, x) - model.set.saturated_distance(x_plus) -
         model.alpha * evaluate_value(model, model.set.project(x_plus));
}

ConservativeThreshold conservative_threshold(
    const ValueModel& model, const TransitionDataset& validation) {
  if (validation.size() < 1) throw InputError("validation set is empty");
  if (validation.dimension() != model.set.dimension())
    throw InputError("validation dimension does not match the model");
  const int k = validation.size();
  Eigen::MatrixXd projected(validation.dimension(), k);
  Eigen::VectorXd dist(k);
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd xp = validation.x_plus.col(i);
    projected.col(i) = model.set.project(xp);
    dist(i) = model.set.saturated_distance(xp);
  }
  const Eigen::VectorXd v = evaluate_values(model, validation.x);
  const Eigen::VectorXd v_next = evaluate_values(model, projected);
  ConservativeThreshold out;
  out.e_bar = (v - dist - model.alpha * v_next).maxCoeff();
  out.threshold = out.e_bar / (1.0 - model.alpha);
  return out;
}

double guaranteed_threshold(const ValueModel& model, double lipschitz_f,
                            double epsilon_net, double lipschitz_v) {
  for (double v : {lipschitz_f, epsilon_net, lipschitz_v})
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InputError("Lipschitz constants and epsilon must be finite and >= 0");
  const double a = model.alpha;
  return epsilon_net * (lipschitz_v * (1.0 + a * lipschitz_f) + lipschitz_f) /
         (1.0 - a);
}

double lipschitz_estimate(const ValueModel& model, int samples,
                          std::uint64_t seed, double safety) {
  if (samples < 1) throw InputError("Lipschitz estimate needs samples >= 1");
  if (!(safety >= 1.0)) throw InputError("safety factor must be >= 1");
  const Eigen::MatrixXd points = model.set.sample_uniform(samples, seed);
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd g =
        model.basis.gradient(points.col(i)).transpose() * model.coefficients;
    worst = std::max(worst, g.norm());
  }
  return safety * worst;
}

void save_model(const ValueModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << to_json(model).dump(2) << '\n';
  if (!out) throw InputError("failed writing " + path);
}

ValueModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace invset
