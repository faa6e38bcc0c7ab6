#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "invset/basis.hpp"
#include "invset/dynamics.hpp"
#include "invset/geometry.hpp"
#include "invset/lp.hpp"

namespace invset {

struct ModelMetadata {
  int training_pairs = 0;
  int validation_pairs = 0;
  int artificial_points = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t artificial_seed = 0;
  std::optional<std::uint64_t> centers_seed;

  std::string integration_method;  // "analytic" | "monte_carlo"
  int integration_samples = 0;
  std::uint64_t integration_seed = 0;
  double integration_error = 0.0;
  double artificial_condition = 0.0;

  std::string solver;
  std::string solver_status;
  int solver_iterations = 0;
  double objective = 0.0;
  double max_constraint_violation = 0.0;
  double duality_gap = 0.0;

  std::optional<double> e_bar;
  std::optional<double> conservative_threshold;
  std::optional<double> lipschitz_estimate;
};

/// Fitted value function v(x) = basis(x)^T c; its zero sublevel set within
/// the constraint set approximates the maximum (controlled) invariant set.
struct ValueModel {
  BasisSpec basis;
  Eigen::VectorXd coefficients;
  double alpha = 0.0;
  ConstraintSet set;
  ModelMetadata metadata;
};

struct FitConfig {
  explicit FitConfig(BasisSpec b) : basis(std::move(b)) {}

  BasisSpec basis;
  double alpha = 0.6;
  std::optional<int> artificial_points;  // default max(2N, 200)
  std::uint64_t artificial_seed = 1;
  std::optional<double> split_fraction;
  std::optional<std::uint64_t> centers_seed;  // recorded only
  Quadrature quadrature;
  SolverOptions solver_options;
  std::string solver = kDefaultSolver;
};

/// Raised when the LP backend returns a non-optimal status.
class SolverStatusError : public std::runtime_error {
 public:
  SolverStatusError(LpStatus status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  LpStatus status() const { return status_; }

 private:
  LpStatus status_;
};

int default_artificial_points(int basis_size);

ValueModel fit(const TransitionDataset& data, const ConstraintSet& set,
               const FitConfig& config,
               const SolverRegistry& registry = SolverRegistry::with_defaults());

double evaluate_value(const ValueModel& model, const Eigen::VectorXd& x);
/// Values at every column of `points`.
Eigen::VectorXd evaluate_values(const ValueModel& model,
                                const Eigen::MatrixXd& points);

/// x in the set and v(x) <= threshold.
bool member(const ValueModel& model, const Eigen::VectorXd& x,
            double threshold = 0.0);

/// Slack of the Bellman inequality on one transition:
/// v(x) - dist(x+) - alpha * v(proj(x+)).
double bellman_residual(const ValueModel& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x_plus);

struct ConservativeThreshold {
  double e_bar = 0.0;
  double threshold = 0.0;  // e_bar / (1 - alpha); not floored at zero
};

ConservativeThreshold conservative_threshold(
    const ValueModel& model, const TransitionDataset& validation);

/// (1 - alpha)^-1 * eps * (lip_v * (1 + alpha L_f) + L_f). The sublevel set
/// contains the true invariant set only if lip_v and L_f are valid upper
/// bounds and eps covers the training states.
double guaranteed_threshold(const ValueModel& model, double lipschitz_f,
                            double epsilon_net, double lipschitz_v);

/// Largest gradient norm of v over `samples` uniform points, times
/// `safety`. An estimate, not a certificate.
double lipschitz_estimate(const ValueModel& model, int samples,
                          std::uint64_t seed, double safety = 1.2);

void save_model(const ValueModel& model, const std::string& path);
ValueModel load_model(const std::string& path);

}  // namespace invset
