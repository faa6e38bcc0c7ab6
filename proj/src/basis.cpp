#include "invset/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "invset/errors.hpp"
#include "invset/kernels.hpp"
#include "invset/rng.hpp"

namespace invset {

namespace {

void append_degree(int n, int remaining, std::vector<int>& prefix,
                   std::vector<std::vector<int>>& out) {
  const int i = static_cast<int>(prefix.size());
  if (i == n - 1) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    prefix.push_back(e);
    append_degree(n, remaining - e, prefix, out);
    prefix.pop_back();
  }
}

constexpr double kMinCenterSeparation = 1e-9;

double min_separation_to(const Eigen::MatrixXd& centers, int j, int upto) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < upto; ++i)
    best = std::min(best, (centers.col(i) - centers.col(j)).norm());
  return best;
}

}  // namespace

int monomial_count(int n, int degree) {
  if (n < 1 || degree < 0) throw InputError("monomial basis needs n >= 1, d >= 0");
  // C(n + d, n) computed incrementally; exact while it fits.
  long long c = 1;
  for (int k = 1; k <= n; ++k) c = c * (degree + k) / k;
  if (c > std::numeric_limits<int>::max()) throw InputError("basis too large");
  return static_cast<int>(c);
}

std::vector<std::vector<int>> graded_lex_exponents(int n, int degree) {
  std::vector<std::vector<int>> out;
  out.reserve(monomial_count(n, degree));
  std::vector<int> prefix;
  for (int d = 0; d <= degree; ++d) append_degree(n, d, prefix, out);
  return out;
}

BasisSpec BasisSpec::monomial(int n, int degree) {
  BasisSpec b;
  b.kind_ = Kind::monomial;
  b.n_ = n;
  b.degree_ = degree;
  b.size_ = monomial_count(n, degree);
  b.exponents_ = graded_lex_exponents(n, degree);
  return b;
}

BasisSpec BasisSpec::thin_plate(Eigen::MatrixXd centers) {
  if (centers.rows() < 1 || centers.cols() < 1)
    throw InputError("thin-plate basis needs at least one center");
  if (!centers.allFinite()) throw InputError("RBF centers must be finite");
  for (int j = 1; j < centers.cols(); ++j)
    if (min_separation_to(centers, j, j) <= kMinCenterSeparation)
      throw InputError("RBF centers must be pairwise distinct (> 1e-9 apart)");
  BasisSpec b;
  b.kind_ = Kind::rbf_thin_plate;
  b.n_ = static_cast<int>(centers.rows());
  b.size_ = static_cast<int>(centers.cols());
  b.centers_ = std::move(centers);
  return b;
}

void BasisSpec::check_dim(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != n_)
    throw InputError("point has dimension " + std::to_string(x.size()) +
                     ", basis expects " + std::to_string(n_));
}

Eigen::VectorXd BasisSpec::eval(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(size_);
  eval_into(x, out);
  return out;
}

void BasisSpec::eval_into(const Eigen::Ref<const Eigen::VectorXd>& x,
                          Eigen::Ref<Eigen::VectorXd> out) const {
  check_dim(x);
  if (kind_ == Kind::monomial) {
    // powers(i, k) = x_i^k
    Eigen::MatrixXd powers(n_, degree_ + 1);
    for (int i = 0; i < n_; ++i) {
      powers(i, 0) = 1.0;
      for (int k = 1; k <= degree_; ++k) powers(i, k) = powers(i, k - 1) * x(i);
    }
    for (int j = 0; j < size_; ++j) {
      double v = 1.0;
      const auto& e = exponents_[j];
      for (int i = 0; i < n_; ++i) v *= powers(i, e[i]);
      out(j) = v;
    }
    return;
  }
  for (int j = 0; j < size_; ++j) {
    const double r2 = (x - centers_.col(j)).squaredNorm();
    // r^2 log r = r^2 log(r^2) / 2, continuously extended by 0 at r = 0.
    out(j) = r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0;
  }
}

Eigen::MatrixXd BasisSpec::gradient(const Eigen::VectorXd& x) const {
  check_dim(x);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(size_, n_);
  if (kind_ == Kind::monomial) {
    Eigen::MatrixXd powers(n_, degree_ + 1);
    for (int i = 0; i < n_; ++i) {
      powers(i, 0) = 1.0;
      for (int k = 1; k <= degree_; ++k) powers(i, k) = powers(i, k - 1) * x(i);
    }
    for (int j = 0; j < size_; ++j) {
      const auto& e = exponents_[j];
      for (int d = 0; d < n_; ++d) {
        if (e[d] == 0) continue;
        double v = e[d];
        for (int i = 0; i < n_; ++i) v *= powers(i, i == d ? e[i] - 1 : e[i]);
        g(j, d) = v;
      }
    }
    return g;
  }
  for (int j = 0; j < size_; ++j) {
    const Eigen::VectorXd d = x - centers_.col(j);
    const double r2 = d.squaredNorm();
    // (2 log r + 1)(x - c); zero at the center by continuity.
    if (r2 > 0.0) g.row(j) = ((std::log(r2) + 1.0) * d).transpose();
  }
  return g;
}

Integral integrate_basis(const BasisSpec& basis, const ConstraintSet& set,
                         const Quadrature& quadrature) {
  if (basis.state_dimension() != set.dimension())
    throw InputError("basis and set dimensions differ");
  const bool box_like = set.kind() == ConstraintSet::Kind::box ||
                        set.is_axis_aligned();
  const bool analytic_ok =
      basis.kind() == BasisSpec::Kind::monomial && box_like;

  using Method = Quadrature::Method;
  if (quadrature.method == Method::analytic && !analytic_ok)
    throw ConfigError(
        "analytic integration is only available for monomials on boxes");
  const bool analytic = quadrature.method == Method::analytic ||
                        (quadrature.method == Method::automatic && analytic_ok);

  Integral result;
  if (analytic) {
    const int n = basis.state_dimension();
    result.z.resize(basis.size());
    for (int j = 0; j < basis.size(); ++j) {
      double m = 1.0;
      for (int i = 0; i < n; ++i) {
        const int e = basis.exponents()[j][i];
        const double lo = set.lower()(i), hi = set.upper()(i);
        // Mean of t^e over [lo, hi].
        m *= (std::pow(hi, e + 1) - std::pow(lo, e + 1)) / ((e + 1) * (hi - lo));
      }
      result.z(j) = m;
    }
    result.analytic = true;
    return result;
  }

  if (quadrature.samples < 1) throw InputError("Monte-Carlo needs samples >= 1");
  const Eigen::MatrixXd points =
      set.sample_uniform(quadrature.samples, quadrature.seed);
  const Eigen::MatrixXd moments = kernels::basis_moments(basis, points);
  const double m = quadrature.samples;
  result.z = moments.col(0) / m;
  const Eigen::VectorXd var =
      (moments.col(1) / m - result.z.cwiseAbs2()).cwiseMax(0.0);
  result.standard_error = std::sqrt(var.maxCoeff() / m);
  result.samples = quadrature.samples;
  return result;
}

Unisolvency unisolvency_check(const BasisSpec& basis,
                              const Eigen::MatrixXd& points) {
  if (points.cols() == 0) throw InputError("unisolvency check needs points");
  if (points.rows() != basis.state_dimension())
    throw InputError("point dimension does not match the basis");
  Unisolvency u;
  const int n_basis = basis.size();
  if (points.cols() < n_basis) {
    u.condition_estimate = std::numeric_limits<double>::infinity();
    u.rank = -1;
    return u;
  }
  RowMatrix rows;
  kernels::basis_rows(basis, points, rows);
  const Eigen::MatrixXd dense = rows;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  // Standard numerical-rank tolerance.
  const double cutoff = static_cast<double>(std::max<Eigen::Index>(dense.rows(), dense.cols())) *
                        std::numeric_limits<double>::epsilon() * smax;
  u.rank = static_cast<int>((sv.array() > cutoff).count());
  u.unisolvent = u.rank == n_basis;
  const double smin = sv(sv.size() - 1);
  u.condition_estimate =
      smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  return u;
}

Eigen::MatrixXd generate_rbf_centers(const ConstraintSet& set, int count,
                                     std::uint64_t seed) {
  Eigen::MatrixXd centers = set.sample_uniform(count, seed);
  std::uint64_t redraw = 0;
  for (int j = 1; j < count; ++j) {
    while (min_separation_to(centers, j, j) <= kMinCenterSeparation)
      centers.col(j) = set.sample_uniform(1, derive_seed(seed, ++redraw));
  }
  return centers;
}

}  // namespace invset
