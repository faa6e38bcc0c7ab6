#include "invset/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

#include "invset/errors.hpp"
#include "invset/rng.hpp"

namespace invset {

namespace {

constexpr int kChunk = 4096;

struct Counts {
  long long oracle_positive = 0;
  long long false_inside = 0;
  long long false_outside = 0;
};

Counts classify_chunk(const ConstraintSet& set, const Classifier& approximation,
                      const Oracle& oracle, int len, std::uint64_t seed) {
  Counts c;
  const Eigen::MatrixXd pts = set.sample_uniform(len, seed);
  for (int i = 0; i < len; ++i) {
    const Eigen::VectorXd x = pts.col(i);
    const bool truth = oracle(x);
    const bool inside = approximation(x);
    c.oracle_positive += truth;
    c.false_inside += inside && !truth;
    c.false_outside += !inside && truth;
  }
  return c;
}

void check_request(int samples) {
  if (samples < 1000) throw InputError("metrics need at least 10^3 samples");
}

// Ratio estimates with delta-method standard errors from binomial counts.
MetricsReport summarize(const Counts& c, int samples, std::uint64_t seed) {
  if (c.oracle_positive == 0)
    throw DegenerateError("no oracle-positive samples; the reference set looks empty");
  const double m = samples;
  const double po = c.oracle_positive / m;
  const double pa = c.false_inside / m;
  const double pb = c.false_outside / m;
  MetricsReport r;
  r.samples = samples;
  r.seed = seed;
  r.oracle_positive = c.oracle_positive;
  r.false_inside = c.false_inside;
  r.false_outside = c.false_outside;
  r.volume_error_pct = 100.0 * pa / po;
  r.misclassification_pct = 100.0 * pb / po;
  // false_inside is disjoint from the oracle event: Cov = -pa po.
  const double var_a = (pa * (1 - pa) / (po * po) + pa * pa * (1 - po) / (po * po * po) +
                        2.0 * pa * pa / (po * po)) / m;
  // false_outside is a subset of the oracle event: Cov = pb (1 - po).
  const double var_b = (pb * (1 - pb) / (po * po) + pb * pb * (1 - po) / (po * po * po) -
                        2.0 * pb * pb * (1 - po) / (po * po * po)) / m;
  r.volume_error_se = 100.0 * std::sqrt(std::max(var_a, 0.0));
  r.misclassification_se = 100.0 * std::sqrt(std::max(var_b, 0.0));
  return r;
}

}  // namespace

MetricsReport estimate_metrics(const ConstraintSet& set,
                               const Classifier& approximation,
                               const Oracle& oracle, int samples,
                               std::uint64_t seed) {
  check_request(samples);
  const int chunks = (samples + kChunk - 1) / kChunk;
  std::vector<Counts> partial(chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < chunks; ++k) {
    const int len = std::min(kChunk, samples - k * kChunk);
    partial[k] = classify_chunk(set, approximation, oracle, len, derive_seed(seed, k));
  }
  Counts total;
  for (const Counts& c : partial) {
    total.oracle_positive += c.oracle_positive;
    total.false_inside += c.false_inside;
    total.false_outside += c.false_outside;
  }
  return summarize(total, samples, seed);
}

MetricsReport estimate_metrics_reference(const ConstraintSet& set,
                                         const Classifier& approximation,
                                         const Oracle& oracle, int samples,
                                         std::uint64_t seed) {
  check_request(samples);
  Counts total;
  for (int k = 0; k * kChunk < samples; ++k) {
    const int len = std::min(kChunk, samples - k * kChunk);
    const Counts c = classify_chunk(set, approximation, oracle, len, derive_seed(seed, k));
    total.oracle_positive += c.oracle_positive;
    total.false_inside += c.false_inside;
    total.false_outside += c.false_outside;
  }
  return summarize(total, samples, seed);
}

MetricsReport estimate_metrics(const ValueModel& model, double threshold,
                               const Oracle& oracle, int samples,
                               std::uint64_t seed) {
  return estimate_metrics(
      model.set,
      [&model, threshold](const Eigen::VectorXd& x) {
        return member(model, x, threshold);
      },
      oracle, samples, seed);
}

std::vector<GridPoint> classify_grid(const ValueModel& model, double threshold,
                                     const GridOptions& options) {
  if (options.resolution < 2) throw InputError("grid resolution must be >= 2");
  const int n = model.set.dimension();
  if (n < 2) throw InputError("grids need a state dimension of at least 2");
  Eigen::VectorXd lo, hi;
  model.set.bounding_box(lo, hi);
  Eigen::VectorXd rest = Eigen::VectorXd::Zero(n - 2);
  if (options.slice_values.size() > 0) {
    if (options.slice_values.size() != n - 2)
      throw InputError("slice needs one value per coordinate beyond the second");
    rest = options.slice_values;
  }
  const bool projection = options.mode == GridOptions::Mode::projection && n > 2;
  if (projection && options.fiber_samples < 1)
    throw InputError("projection needs at least one fiber sample");

  const int res = options.resolution;
  std::vector<GridPoint> grid(static_cast<std::size_t>(res) * res);
#pragma omp parallel for schedule(dynamic, 16)
  for (int idx = 0; idx < res * res; ++idx) {
    const int i = idx / res, j = idx % res;
    GridPoint g;
    g.x1 = lo(0) + (hi(0) - lo(0)) * j / (res - 1);
    g.x2 = lo(1) + (hi(1) - lo(1)) * i / (res - 1);
    Eigen::VectorXd x(n);
    x(0) = g.x1;
    x(1) = g.x2;
    x.tail(n - 2) = rest;
    g.value = evaluate_value(model, x);
    g.member = member(model, x, threshold);
    if (projection) {
      Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(idx)));
      double best = std::numeric_limits<double>::infinity();
      for (int f = 0; f < options.fiber_samples && !g.member; ++f) {
        for (int k = 2; k < n; ++k) x(k) = lo(k) + (hi(k) - lo(k)) * uniform01(rng);
        if (!model.set.contains(x)) continue;
        const double v = evaluate_value(model, x);
        best = std::min(best, v);
        g.member = v <= threshold;
      }
      if (std::isfinite(best)) g.value = std::min(g.value, best);
    }
    grid[idx] = g;
  }
  return grid;
}

void write_grid_csv(const std::vector<GridPoint>& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "x1,x2,value,member\n";
  char buf[128];
  for (const GridPoint& g : grid) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", g.x1, g.x2, g.value,
                  g.member ? 1 : 0);
    out << buf;
  }
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace invset
