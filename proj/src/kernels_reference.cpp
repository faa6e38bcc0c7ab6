// Serial reference versions of the kernels in kernels.cpp. Straight loops,
// row-streamed accumulation, no blocking.

#include <algorithm>
#include <cmath>
#include <limits>

#include "invset/errors.hpp"
#include "invset/kernels.hpp"

namespace invset::kernels::reference {

void basis_rows(const BasisSpec& basis, const Eigen::MatrixXd& points,
                RowMatrix& out) {
  if (points.rows() != basis.state_dimension())
    throw InputError("point dimension does not match the basis");
  out.resize(points.cols(), basis.size());
  for (Eigen::Index i = 0; i < points.cols(); ++i)
    out.row(i) = basis.eval(points.col(i)).transpose();
}

void bellman_rows(const BasisSpec& basis, const ConstraintSet& set,
                  const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_plus,
                  double alpha, RowMatrix& a, Eigen::VectorXd& b) {
  if (x.cols() != x_plus.cols() || x.rows() != x_plus.rows())
    throw InputError("x and x+ have different shapes");
  a.resize(x.cols(), basis.size());
  b.resize(x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const Eigen::VectorXd xp = x_plus.col(i);
    a.row(i) = (basis.eval(x.col(i)) - alpha * basis.eval(set.project(xp)))
                   .transpose();
    b(i) = set.saturated_distance(xp);
  }
}

void weighted_gram(const RowMatrix& a, const Eigen::VectorXd& w,
                   Eigen::MatrixXd& gram) {
  if (w.size() != a.rows()) throw InputError("weight length != row count");
  const Eigen::Index n = a.cols();
  gram.setZero(n, n);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double wk = w(r) * a(r, k);
      for (Eigen::Index j = k; j < n; ++j) gram(j, k) += wk * a(r, j);
    }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = k + 1; j < n; ++j) gram(k, j) = gram(j, k);
}

Eigen::VectorXd basis_values(const BasisSpec& basis, const Eigen::VectorXd& c,
                             const Eigen::MatrixXd& points) {
  if (c.size() != basis.size()) throw InputError("coefficient length != N");
  Eigen::VectorXd values(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i)
    values(i) = basis.eval(points.col(i)).dot(c);
  return values;
}

Eigen::MatrixXd basis_moments(const BasisSpec& basis,
                              const Eigen::MatrixXd& points) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(basis.size(), 2);
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const Eigen::VectorXd beta = basis.eval(points.col(i));
    out.col(0) += beta;
    out.col(1) += beta.cwiseAbs2();
  }
  return out;
}

double max_min_distance(const Eigen::MatrixXd& queries,
                        const Eigen::MatrixXd& points) {
  if (points.cols() == 0) throw InputError("empty point cloud");
  double worst = 0.0;
  for (Eigen::Index j = 0; j < queries.cols(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < points.cols(); ++i)
      best = std::min(best, (points.col(i) - queries.col(j)).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace invset::kernels::reference
