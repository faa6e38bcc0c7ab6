#include "invset/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "invset/errors.hpp"
#include "invset/kernels.hpp"
#include "invset/rng.hpp"

namespace invset {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + " must be finite");
}

void check_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() == 0) throw InputError("set dimension must be positive");
  if (lower.size() != upper.size())
    throw InputError("box bounds have different dimensions");
  require_finite(lower, "box lower bound");
  require_finite(upper, "box upper bound");
  if ((lower.array() >= upper.array()).any())
    throw InputError("box requires lower < upper componentwise");
}

Eigen::VectorXd clamp(const Eigen::VectorXd& y, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
  return y.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

ConstraintSet ConstraintSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  check_bounds(lower, upper);
  ConstraintSet s;
  s.kind_ = Kind::box;
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  s.center_ = 0.5 * (s.lower_ + s.upper_);
  return s;
}

ConstraintSet ConstraintSet::ball(Eigen::VectorXd center, double radius) {
  if (center.size() == 0) throw InputError("set dimension must be positive");
  require_finite(center, "ball center");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InputError("ball radius must be positive");
  ConstraintSet s;
  s.kind_ = Kind::ball;
  s.center_ = std::move(center);
  s.radius_ = radius;
  s.lower_ = s.center_.array() - radius;
  s.upper_ = s.center_.array() + radius;
  return s;
}

ConstraintSet ConstraintSet::transformed_box(Eigen::MatrixXd q,
                                             Eigen::VectorXd lower,
                                             Eigen::VectorXd upper) {
  check_bounds(lower, upper);
  if (q.rows() != lower.size() || q.cols() != lower.size())
    throw InputError("rotation must be n x n");
  const Eigen::MatrixXd gram = q * q.transpose();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(q.rows(), q.cols());
  if ((gram - eye).cwiseAbs().maxCoeff() > 1e-10)
    throw InputError("rotation must be orthogonal (Q Q^T = I within 1e-10)");
  ConstraintSet s;
  s.kind_ = Kind::transformed_box;
  s.q_ = std::move(q);
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  s.center_ = s.q_ * (0.5 * (s.lower_ + s.upper_));
  return s;
}

void ConstraintSet::check_dim(const Eigen::VectorXd& x) const {
  if (x.size() != dimension())
    throw InputError("point has dimension " + std::to_string(x.size()) +
                     ", set has dimension " + std::to_string(dimension()));
}

Eigen::VectorXd ConstraintSet::project(const Eigen::VectorXd& x) const {
  check_dim(x);
  switch (kind_) {
    case Kind::box:
      return clamp(x, lower_, upper_);
    case Kind::ball: {
      const Eigen::VectorXd d = x - center_;
      const double r = d.norm();
      if (r <= radius_) return x;
      return center_ + (radius_ / r) * d;
    }
    case Kind::transformed_box: {
      const Eigen::VectorXd y = q_.transpose() * x;
      if (((y.array() >= lower_.array()) && (y.array() <= upper_.array())).all())
        return x;
      return q_ * clamp(y, lower_, upper_);
    }
  }
  return x;
}

double ConstraintSet::saturated_distance(const Eigen::VectorXd& x) const {
  check_dim(x);
  double d = 0.0;
  switch (kind_) {
    case Kind::box:
      d = (x - clamp(x, lower_, upper_)).norm();
      break;
    case Kind::ball:
      d = std::max(0.0, (x - center_).norm() - radius_);
      break;
    case Kind::transformed_box: {
      // Distances are invariant under the rotation.
      const Eigen::VectorXd y = q_.transpose() * x;
      d = (y - clamp(y, lower_, upper_)).norm();
      break;
    }
  }
  return std::min(d, 1.0);
}

bool ConstraintSet::contains(const Eigen::VectorXd& x) const {
  check_dim(x);
  switch (kind_) {
    case Kind::box:
      return ((x.array() >= lower_.array()) && (x.array() <= upper_.array())).all();
    case Kind::ball:
      return (x - center_).norm() <= radius_;
    case Kind::transformed_box: {
      const Eigen::VectorXd y = q_.transpose() * x;
      return ((y.array() >= lower_.array()) && (y.array() <= upper_.array())).all();
    }
  }
  return false;
}

Eigen::MatrixXd ConstraintSet::sample_uniform(int count,
                                              std::uint64_t seed) const {
  if (count < 1) throw InputError("sample count must be positive");
  const int n = dimension();
  Rng rng(seed);
  Eigen::MatrixXd out(n, count);
  const Eigen::VectorXd width = upper_ - lower_;
  Eigen::VectorXd y(n);
  for (int k = 0; k < count; ++k) {
    while (true) {
      for (int i = 0; i < n; ++i) y(i) = lower_(i) + width(i) * uniform01(rng);
      // Rejection from the enclosing box for balls.
      if (kind_ != Kind::ball || (y - center_).norm() <= radius_) break;
    }
    out.col(k) = (kind_ == Kind::transformed_box) ? Eigen::VectorXd(q_ * y) : y;
  }
  return out;
}

double ConstraintSet::volume() const {
  if (kind_ == Kind::ball) {
    const double n = dimension();
    return std::pow(std::numbers::pi, n / 2.0) * std::pow(radius_, n) /
           std::tgamma(n / 2.0 + 1.0);
  }
  return (upper_ - lower_).prod();
}

double ConstraintSet::diameter() const {
  if (kind_ == Kind::ball) return 2.0 * radius_;
  return (upper_ - lower_).norm();
}

void ConstraintSet::bounding_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
  if (kind_ != Kind::transformed_box) {
    lo = lower_;
    hi = upper_;
    return;
  }
  const int n = dimension();
  lo = Eigen::VectorXd::Zero(n);
  hi = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = q_(i, j) * lower_(j);
      const double b = q_(i, j) * upper_(j);
      lo(i) += std::min(a, b);
      hi(i) += std::max(a, b);
    }
}

bool ConstraintSet::is_axis_aligned() const {
  return kind_ == Kind::transformed_box &&
         q_ == Eigen::MatrixXd::Identity(q_.rows(), q_.cols());
}

double dispersion_upper_bound(const ConstraintSet& set,
                              const Eigen::MatrixXd& points,
                              int grid_resolution) {
  if (points.cols() == 0) throw InputError("dispersion needs at least one point");
  if (points.rows() != set.dimension())
    throw InputError("point dimension does not match the set");
  if (grid_resolution < 1) throw InputError("grid resolution must be positive");

  const int n = set.dimension();
  // Grid over the box frame; transformed boxes are gridded before rotation.
  const Eigen::VectorXd lo = set.lower();
  const Eigen::VectorXd cell = (set.upper() - set.lower()) / grid_resolution;
  const double half_diagonal = 0.5 * cell.norm();

  double total = 1.0;
  for (int i = 0; i < n; ++i) total *= grid_resolution;
  if (total > 5e7) throw InputError("dispersion grid too large");
  const auto cells = static_cast<long long>(total);

  Eigen::MatrixXd centers(n, cells);
  long long kept = 0;
  Eigen::VectorXd g(n);
  for (long long idx = 0; idx < cells; ++idx) {
    long long rem = idx;
    for (int i = 0; i < n; ++i) {
      const long long k = rem % grid_resolution;
      rem /= grid_resolution;
      g(i) = lo(i) + (static_cast<double>(k) + 0.5) * cell(i);
    }
    if (set.kind() == ConstraintSet::Kind::ball) {
      // Keep cells meeting the ball: nearest cell point within the radius.
      const Eigen::VectorXd nearest =
          set.center().cwiseMax(g - 0.5 * cell).cwiseMin(g + 0.5 * cell);
      if ((nearest - set.center()).norm() > set.radius()) continue;
    }
    centers.col(kept++) =
        set.kind() == ConstraintSet::Kind::transformed_box
            ? Eigen::VectorXd(set.rotation() * g)
            : g;
  }
  centers.conservativeResize(n, kept);
  return kernels::max_min_distance(centers, points) + half_diagonal;
}

}  // namespace invset
