#pragma once

// Data-parallel inner loops. Every kernel in invset::kernels is OpenMP
// parallel and produces results independent of the thread count; the
// matching kernel in invset::kernels::reference is a plain serial loop kept
// as a test oracle and benchmark baseline.

#include <Eigen/Dense>

#include "invset/basis.hpp"
#include "invset/geometry.hpp"

namespace invset::kernels {

/// out.row(i) = basis(points.col(i)).
void basis_rows(const BasisSpec& basis, const Eigen::MatrixXd& points,
                RowMatrix& out);

/// Bellman rows: a_i = basis(x_i) - alpha * basis(proj(x_i+)),
/// b_i = dist(x_i+).
void bellman_rows(const BasisSpec& basis, const ConstraintSet& set,
                  const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_plus,
                  double alpha, RowMatrix& a, Eigen::VectorXd& b);

/// Lower triangle (and mirrored upper) of A^T diag(w) A.
void weighted_gram(const RowMatrix& a, const Eigen::VectorXd& w,
                   Eigen::MatrixXd& gram);

/// values(i) = basis(points.col(i))^T c.
Eigen::VectorXd basis_values(const BasisSpec& basis, const Eigen::VectorXd& c,
                             const Eigen::MatrixXd& points);

/// N x 2 matrix: column sums and column sums of squares of the basis
/// matrix over the points.
Eigen::MatrixXd basis_moments(const BasisSpec& basis,
                              const Eigen::MatrixXd& points);

/// max_j min_i |queries.col(j) - points.col(i)|.
double max_min_distance(const Eigen::MatrixXd& queries,
                        const Eigen::MatrixXd& points);

namespace reference {

void basis_rows(const BasisSpec& basis, const Eigen::MatrixXd& points,
                RowMatrix& out);
void bellman_rows(const BasisSpec& basis, const ConstraintSet& set,
                  const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_plus,
                  double alpha, RowMatrix& a, Eigen::VectorXd& b);
void weighted_gram(const RowMatrix& a, const Eigen::VectorXd& w,
                   Eigen::MatrixXd& gram);
Eigen::VectorXd basis_values(const BasisSpec& basis, const Eigen::VectorXd& c,
                             const Eigen::MatrixXd& points);
Eigen::MatrixXd basis_moments(const BasisSpec& basis,
                              const Eigen::MatrixXd& points);
double max_min_distance(const Eigen::MatrixXd& queries,
                        const Eigen::MatrixXd& points);

}  // namespace reference

/// Sets the OpenMP thread count (<= 0 restores the runtime default).
void set_threads(int threads);
int max_threads();

}  // namespace invset::kernels
