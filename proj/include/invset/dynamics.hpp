#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "invset/geometry.hpp"

namespace invset {

/// Benchmark discrete-time systems x+ = f(x[, u]).
class SystemSpec {
 public:
  enum class Kind { julia, julia_product, henon3_controlled, flower_switched };
  enum class FlowerVariant { affine, nonlinear };

  /// x+ = (x1^2 - x2^2 + a1, 2 x1 x2 + a2).
  static SystemSpec julia(Eigen::Vector2d a = {-0.7, 0.2});
  /// n/2 stacked Julia maps conjugated by a seeded random orthogonal Q:
  /// f = Q o (f_julia, ..., f_julia) o Q^T.
  static SystemSpec julia_product(int n, std::uint64_t unitary_seed,
                                  Eigen::Vector2d a = {-0.7, 0.2});
  /// Three-dimensional Henon map with one scalar input.
  static SystemSpec henon3_controlled();
  /// One RK4 step of the piecewise "flower" field with the branch chosen at
  /// the step start by x1^2 <= x2^2.
  static SystemSpec flower_switched(FlowerVariant variant, double h = 0.05);

  Kind kind() const { return kind_; }
  int state_dimension() const { return n_; }
  int control_dimension() const { return m_; }
  const Eigen::Vector2d& julia_parameter() const { return a_; }
  std::uint64_t unitary_seed() const { return unitary_seed_; }
  const Eigen::MatrixXd& rotation() const { return q_; }
  FlowerVariant flower_variant() const { return variant_; }
  double step_size() const { return h_; }
  std::string name() const;

  /// The constraint set used by the benchmark: unit ball (Julia),
  /// Q[-1,1]^n (Julia product), [-1,1]^3 (Henon), [-1,1]^2 (flower).
  ConstraintSet default_state_set() const;
  /// [-1,1] for Henon; nullopt for autonomous systems.
  std::optional<ConstraintSet> default_control_set() const;

 private:
  SystemSpec() = default;

  Kind kind_ = Kind::julia;
  int n_ = 2;
  int m_ = 0;
  Eigen::Vector2d a_{-0.7, 0.2};
  std::uint64_t unitary_seed_ = 0;
  Eigen::MatrixXd q_;
  FlowerVariant variant_ = FlowerVariant::affine;
  double h_ = 0.05;
};

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd step(const SystemSpec& system, const Eigen::VectorXd& x,
                     const std::optional<Eigen::VectorXd>& u = std::nullopt);

/// Classical fixed-step fourth-order Runge-Kutta.
Eigen::VectorXd rk4_step(const VectorField& field, const Eigen::VectorXd& x,
                         double h);

/// Q from the QR factorization of a seeded standard Gaussian matrix with the
/// signs of R's diagonal normalized to be positive.
Eigen::MatrixXd random_unitary(int n, std::uint64_t seed);

/// One-step transition data (x_i, x_i+). Controls used to produce the data
/// are never stored.
struct TransitionDataset {
  Eigen::MatrixXd x;       // n x K
  Eigen::MatrixXd x_plus;  // n x K
  std::string system;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(x.cols()); }
  int dimension() const { return static_cast<int>(x.rows()); }

  /// First floor(fraction * K) pairs and the remainder.
  std::pair<TransitionDataset, TransitionDataset> split(double fraction) const;
};

TransitionDataset generate_dataset(
    const SystemSpec& system, const ConstraintSet& state_set,
    const std::optional<ConstraintSet>& control_set, int count,
    std::uint64_t seed);

/// CSV with header x1..xn,xp1..xpn and 17 significant digits.
void write_dataset_csv(const TransitionDataset& data, const std::string& path);
TransitionDataset read_dataset_csv(const std::string& path);

struct RolloutValue {
  double value = 0.0;
  /// alpha^T / (1 - alpha), the neglected tail.
  double truncation_bound = 0.0;
};

/// Truncated discounted sum of dist(f(xbar_k)) along xbar_{k+1} =
/// proj(f(xbar_k)), xbar_0 = x.
RolloutValue rollout_value(const SystemSpec& system, const ConstraintSet& set,
                           const Eigen::VectorXd& x, double alpha, int horizon);

/// True iff the raw orbit f^(k)(x) stays in the set for every k <= horizon.
/// Orbits leaving 10 * diameter in the sup norm are rejected early.
bool mpi_oracle(const SystemSpec& system, const ConstraintSet& set,
                const Eigen::VectorXd& x, int horizon = 1000);

using Oracle = std::function<bool(const Eigen::VectorXd&)>;
Oracle make_mpi_oracle(const SystemSpec& system, const ConstraintSet& set,
                       int horizon = 1000);

}  // namespace invset
