#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "invset/geometry.hpp"

namespace invset {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Finite function space V_N: monomials up to a total degree, or thin-plate
/// spline radial functions r^2 log r around fixed centers.
///
/// Monomials are enumerated in graded-lexicographic order: by total degree,
/// then lexicographically decreasing exponent tuples (x1 before x2). For
/// n = 2, d = 2 this gives 1, x1, x2, x1^2, x1 x2, x2^2.
class BasisSpec {
 public:
  enum class Kind { monomial, rbf_thin_plate };

  static BasisSpec monomial(int n, int degree);
  /// Centers are columns of an n x N matrix; must be finite and pairwise
  /// separated by more than 1e-9.
  static BasisSpec thin_plate(Eigen::MatrixXd centers);

  Kind kind() const { return kind_; }
  int state_dimension() const { return n_; }
  int size() const { return size_; }
  int degree() const { return degree_; }
  const std::vector<std::vector<int>>& exponents() const { return exponents_; }
  const Eigen::MatrixXd& centers() const { return centers_; }

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
  /// Writes the N basis values at x into out (no allocation).
  void eval_into(const Eigen::Ref<const Eigen::VectorXd>& x,
                 Eigen::Ref<Eigen::VectorXd> out) const;
  /// N x n Jacobian of the basis vector.
  Eigen::MatrixXd gradient(const Eigen::VectorXd& x) const;

 private:
  BasisSpec() = default;
  void check_dim(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Kind kind_ = Kind::monomial;
  int n_ = 0;
  int degree_ = 0;
  int size_ = 0;
  std::vector<std::vector<int>> exponents_;
  Eigen::MatrixXd centers_;
};

/// C(n + d, n), the number of monomials of total degree at most d.
int monomial_count(int n, int degree);

/// Graded-lexicographic exponent list.
std::vector<std::vector<int>> graded_lex_exponents(int n, int degree);

struct Quadrature {
  enum class Method { automatic, analytic, monte_carlo };
  Method method = Method::automatic;
  int samples = 1'000'000;
  std::uint64_t seed = 0;
};

struct Integral {
  Eigen::VectorXd z;
  bool analytic = false;
  int samples = 0;
  /// Largest per-entry Monte-Carlo standard error (0 when analytic).
  double standard_error = 0.0;
};

/// Mean of the basis under the uniform probability measure on `set`.
/// Automatic selects exact moments for monomials on axis-aligned boxes and
/// seeded Monte Carlo otherwise.
Integral integrate_basis(const BasisSpec& basis, const ConstraintSet& set,
                         const Quadrature& quadrature = {});

struct Unisolvency {
  bool unisolvent = false;
  double condition_estimate = 0.0;
  int rank = 0;
};

Unisolvency unisolvency_check(const BasisSpec& basis,
                              const Eigen::MatrixXd& points);

/// N distinct uniform centers over the set.
Eigen::MatrixXd generate_rbf_centers(const ConstraintSet& set, int count,
                                     std::uint64_t seed);

}  // namespace invset
