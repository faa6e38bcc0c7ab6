#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace invset {

/// Compact convex constraint set: an axis-aligned box, a Euclidean ball, or
/// a box rotated by an orthogonal matrix Q (the set Q * [lower, upper]).
///
/// Point clouds throughout the library are stored column-wise (n x count).
class ConstraintSet {
 public:
  enum class Kind { box, ball, transformed_box };

  static ConstraintSet box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static ConstraintSet ball(Eigen::VectorXd center, double radius);
  static ConstraintSet transformed_box(Eigen::MatrixXd q, Eigen::VectorXd lower,
                                       Eigen::VectorXd upper);

  Kind kind() const { return kind_; }
  int dimension() const { return static_cast<int>(lower_.size()); }

  // Box bounds (in the rotated frame for transformed boxes). For balls these
  // are the bounds of the enclosing box.
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const Eigen::VectorXd& center() const { return center_; }
  double radius() const { return radius_; }
  const Eigen::MatrixXd& rotation() const { return q_; }

  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  /// Euclidean distance to the set, saturated at one.
  double saturated_distance(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x) const;

  /// `count` uniform samples as columns; a pure function of the seed.
  Eigen::MatrixXd sample_uniform(int count, std::uint64_t seed) const;

  double volume() const;
  double diameter() const;

  /// Axis-aligned bounding box in the original coordinates.
  void bounding_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const;

  /// True for a transformed box whose rotation is exactly the identity.
  bool is_axis_aligned() const;

 private:
  ConstraintSet() = default;
  void check_dim(const Eigen::VectorXd& x) const;

  Kind kind_ = Kind::box;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  Eigen::VectorXd center_;
  double radius_ = 0.0;
  Eigen::MatrixXd q_;
};

/// Certified upper bound on the covering radius of `points` (columns) over
/// `set`: the largest distance from a cell-center of a uniform grid to the
/// point cloud, plus half the cell diagonal. Only cells meeting the set are
/// considered. Halving the cell size never increases the bound.
double dispersion_upper_bound(const ConstraintSet& set,
                              const Eigen::MatrixXd& points,
                              int grid_resolution);

}  // namespace invset
