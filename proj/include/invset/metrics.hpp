#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "invset/dynamics.hpp"
#include "invset/geometry.hpp"
#include "invset/invariant.hpp"

namespace invset {

/// Monte-Carlo comparison of an approximation against a ground-truth
/// oracle. Percentages are relative to the oracle-positive volume.
struct MetricsReport {
  double volume_error_pct = 0.0;
  double misclassification_pct = 0.0;
  double volume_error_se = 0.0;
  double misclassification_se = 0.0;
  int samples = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
  long long oracle_positive = 0;
  long long false_inside = 0;   // member but not in the true set
  long long false_outside = 0;  // true set but not member
};

using Classifier = std::function<bool(const Eigen::VectorXd&)>;

/// Draws `samples` uniform points over the set in fixed-size chunks with
/// per-chunk seeds. Both predicates must be safe to call concurrently.
MetricsReport estimate_metrics(const ConstraintSet& set,
                               const Classifier& approximation,
                               const Oracle& oracle, int samples,
                               std::uint64_t seed);

MetricsReport estimate_metrics(const ValueModel& model, double threshold,
                               const Oracle& oracle, int samples,
                               std::uint64_t seed);

/// Serial twin of estimate_metrics, same chunking and seeds.
MetricsReport estimate_metrics_reference(const ConstraintSet& set,
                                         const Classifier& approximation,
                                         const Oracle& oracle, int samples,
                                         std::uint64_t seed);

struct GridOptions {
  int resolution = 200;
  enum class Mode { slice, projection } mode = Mode::slice;
  /// Fixed values of coordinates 3..n for slices (defaults to zeros).
  Eigen::VectorXd slice_values;
  int fiber_samples = 200;
  std::uint64_t seed = 0;
};

struct GridPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double value = 0.0;
  bool member = false;
};

/// Membership on a resolution x resolution grid over the first two
/// coordinates of the set's bounding box.
std::vector<GridPoint> classify_grid(const ValueModel& model, double threshold,
                                     const GridOptions& options = {});

/// CSV with header x1,x2,value,member.
void write_grid_csv(const std::vector<GridPoint>& grid, const std::string& path);

}  // namespace invset
