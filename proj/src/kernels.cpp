#include "invset/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "invset/errors.hpp"

namespace invset::kernels {

namespace {

// Fixed blocking: results never depend on the number of threads.
constexpr Eigen::Index kRowChunk = 2048;
constexpr Eigen::Index kColBlock = 64;
constexpr Eigen::Index kPointChunk = 4096;

void check_points(const BasisSpec& basis, const Eigen::MatrixXd& points) {
  if (points.rows() != basis.state_dimension())
    throw InputError("point dimension does not match the basis");
}

}  // namespace

void basis_rows(const BasisSpec& basis, const Eigen::MatrixXd& points,
                RowMatrix& out) {
  check_points(basis, points);
  const Eigen::Index count = points.cols();
  const int n_basis = basis.size();
  out.resize(count, n_basis);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < count; ++i) {
    Eigen::Map<Eigen::VectorXd> row(out.row(i).data(), n_basis);
    basis.eval_into(points.col(i), row);
  }
}

void bellman_rows(const BasisSpec& basis, const ConstraintSet& set,
                  const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_plus,
                  double alpha, RowMatrix& a, Eigen::VectorXd& b) {
  check_points(basis, x);
  if (x.cols() != x_plus.cols() || x.rows() != x_plus.rows())
    throw InputError("x and x+ have different shapes");
  const Eigen::Index count = x.cols();
  const int n_basis = basis.size();
  a.resize(count, n_basis);
  b.resize(count);
#pragma omp parallel
  {
    Eigen::VectorXd next(n_basis);
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::VectorXd xp = x_plus.col(i);
      Eigen::Map<Eigen::VectorXd> row(a.row(i).data(), n_basis);
      basis.eval_into(x.col(i), row);
      basis.eval_into(set.project(xp), next);
      row -= alpha * next;
      b(i) = set.saturated_distance(xp);
    }
  }
}

void weighted_gram(const RowMatrix& a, const Eigen::VectorXd& w,
                   Eigen::MatrixXd& gram) {
  if (w.size() != a.rows()) throw InputError("weight length != row count");
  const Eigen::Index rows = a.rows();
  const Eigen::Index n = a.cols();
  gram.setZero(n, n);
  const Eigen::Index blocks = (n + kColBlock - 1) / kColBlock;
  Eigen::MatrixXd scaled;
  for (Eigen::Index r0 = 0; r0 < rows; r0 += kRowChunk) {
    const Eigen::Index len = std::min(kRowChunk, rows - r0);
    scaled = w.segment(r0, len).cwiseSqrt().asDiagonal() * a.middleRows(r0, len);
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index jb = 0; jb < blocks; ++jb) {
      const Eigen::Index j0 = jb * kColBlock;
      const Eigen::Index jw = std::min(kColBlock, n - j0);
      gram.block(j0, j0, n - j0, jw).noalias() +=
          scaled.rightCols(n - j0).transpose() * scaled.middleCols(j0, jw);
    }
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
}

Eigen::VectorXd basis_values(const BasisSpec& basis, const Eigen::VectorXd& c,
                             const Eigen::MatrixXd& points) {
  check_points(basis, points);
  if (c.size() != basis.size()) throw InputError("coefficient length != N");
  const Eigen::Index count = points.cols();
  Eigen::VectorXd values(count);
#pragma omp parallel
  {
    Eigen::VectorXd beta(basis.size());
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < count; ++i) {
      basis.eval_into(points.col(i), beta);
      values(i) = beta.dot(c);
    }
  }
  return values;
}

Eigen::MatrixXd basis_moments(const BasisSpec& basis,
                              const Eigen::MatrixXd& points) {
  check_points(basis, points);
  const Eigen::Index count = points.cols();
  const int n_basis = basis.size();
  const Eigen::Index chunks = (count + kPointChunk - 1) / kPointChunk;
  Eigen::MatrixXd partial = Eigen::MatrixXd::Zero(n_basis, 2 * chunks);
#pragma omp parallel
  {
    Eigen::VectorXd beta(n_basis);
#pragma omp for schedule(dynamic, 1)
    for (Eigen::Index k = 0; k < chunks; ++k) {
      const Eigen::Index end = std::min(count, (k + 1) * kPointChunk);
      for (Eigen::Index i = k * kPointChunk; i < end; ++i) {
        basis.eval_into(points.col(i), beta);
        partial.col(2 * k) += beta;
        partial.col(2 * k + 1) += beta.cwiseAbs2();
      }
    }
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_basis, 2);
  for (Eigen::Index k = 0; k < chunks; ++k) {
    out.col(0) += partial.col(2 * k);
    out.col(1) += partial.col(2 * k + 1);
  }
  return out;
}

double max_min_distance(const Eigen::MatrixXd& queries,
                        const Eigen::MatrixXd& points) {
  if (queries.rows() != points.rows())
    throw InputError("query and point dimensions differ");
  if (points.cols() == 0) throw InputError("empty point cloud");
  const Eigen::Index count = queries.cols();
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (Eigen::Index j = 0; j < count; ++j) {
    const double d2 =
        (points.colwise() - queries.col(j)).colwise().squaredNorm().minCoeff();
    worst = std::max(worst, d2);
  }
  return std::sqrt(worst);
}

void set_threads(int threads) {
  omp_set_num_threads(threads > 0 ? threads : omp_get_num_procs());
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace invset::kernels
