#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "invset/basis.hpp"
#include "invset/dynamics.hpp"
#include "invset/geometry.hpp"

namespace invset {

enum class RowKind { bellman, upper_bound, lower_bound };

struct RowTag {
  RowKind kind;
  int index;  // position within its block
};

/// maximize objective^T c  subject to  A c <= b.
///
/// Problems built by assemble_problem stack three blocks: K Bellman rows,
/// K' upper-bound rows (rhs 1/(1 - alpha)) and K' lower-bound rows (rhs 1).
struct LpProblem {
  Eigen::VectorXd objective;
  RowMatrix a;
  Eigen::VectorXd b;
  std::vector<RowTag> provenance;

  int rows() const { return static_cast<int>(a.rows()); }
  int cols() const { return static_cast<int>(a.cols()); }
  bool has_bound_rows() const;
};

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };
std::string to_string(LpStatus status);

struct LpSolution {
  Eigen::VectorXd coefficients;
  LpStatus status = LpStatus::numerical_failure;
  double primal_objective = 0.0;
  double max_constraint_violation = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double feasibility_tol = 1e-8;  // relative
  double gap_tol = 1e-8;          // relative
  int max_iterations = 200;
  double step_fraction = 0.995;
  bool verbose = false;  // per-iteration trace on stderr
};

LpProblem assemble_problem(const TransitionDataset& data,
                           const Eigen::MatrixXd& artificial_points,
                           const BasisSpec& basis, const ConstraintSet& set,
                           double alpha, const Quadrature& quadrature = {});

/// The constraint blocks of assemble_problem with an empty objective and no
/// unisolvency check; callers own both.
LpProblem assemble_constraints(const TransitionDataset& data,
                               const Eigen::MatrixXd& artificial_points,
                               const BasisSpec& basis, const ConstraintSet& set,
                               double alpha);

/// Mehrotra predictor-corrector interior-point method on the inequality
/// form, one N x N normal-equation factorization per iteration.
LpSolution solve_lp(const LpProblem& problem, const SolverOptions& options = {});

/// max(A c - b)^+ over all rows.
double max_violation(const LpProblem& problem, const Eigen::VectorXd& c);

using LpSolver =
    std::function<LpSolution(const LpProblem&, const SolverOptions&)>;

/// Named LP backends. Every entry must honour the solve_lp contract.
class SolverRegistry {
 public:
  /// Registry holding only the built-in "interior_point" solver.
  static SolverRegistry with_defaults();

  void add(const std::string& name, LpSolver solver);
  /// Throws ConfigError for unknown names.
  const LpSolver& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, LpSolver> solvers_;
};

inline constexpr const char* kDefaultSolver = "interior_point";

/// Plain-text dump: "N rows", the objective, then "a_1 ... a_N | b" rows.
void write_problem(const LpProblem& problem, std::ostream& out);
LpProblem read_problem(std::istream& in);

}  // namespace invset
