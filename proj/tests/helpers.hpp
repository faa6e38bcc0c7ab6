#pragma once

#include <Eigen/Dense>

#include "invset/rng.hpp"

namespace testutil {

inline Eigen::VectorXd v2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

inline Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

inline Eigen::VectorXd uniform_vec(invset::Rng& rng, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = lo + (hi - lo) * invset::uniform01(rng);
  return v;
}

inline Eigen::VectorXd unit_box(int n, double v) { return Eigen::VectorXd::Constant(n, v); }

}  // namespace testutil
