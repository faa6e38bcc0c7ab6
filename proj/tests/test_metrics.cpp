#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "helpers.hpp"
#include "invset/errors.hpp"
#include "invset/metrics.hpp"
#include "invset/rng.hpp"

using namespace invset;
using testutil::v2;

namespace {

const SystemSpec kJulia = SystemSpec::julia();
const ConstraintSet kDisk = kJulia.default_state_set();

bool inside(const Eigen::VectorXd& x, double r) { return x.norm() < r; }

// x1^2 + x2^2 over the unit box.
ValueModel radial_model() {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c(3) = 1;
  c(5) = 1;
  return ValueModel{BasisSpec::monomial(2, 2), c, 0.5, ConstraintSet::box(-testutil::unit_box(2, 1.0), testutil::unit_box(2, 1.0)), {}};
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("perfect and trivial classifiers") {
  const Oracle oracle = make_mpi_oracle(kJulia, kDisk, 200);
  const MetricsReport same = estimate_metrics(kDisk, oracle, oracle, 5000, 3);
  CHECK(same.volume_error_pct == 0.0);
  CHECK(same.misclassification_pct == 0.0);
  CHECK(same.samples == 5000);
  CHECK(same.oracle_positive > 0);

  const MetricsReport none = estimate_metrics(
      kDisk, [](const Eigen::VectorXd&) { return false; }, oracle, 5000, 3);
  CHECK(none.volume_error_pct == 0.0);
  CHECK(none.misclassification_pct == 100.0);
  CHECK(none.false_outside == same.oracle_positive);
}

TEST_CASE("accepting everything measures the complement of the true set") {
  const Oracle oracle = make_mpi_oracle(kJulia, kDisk, 1000);
  const MetricsReport all = estimate_metrics(
      kDisk, [](const Eigen::VectorXd&) { return true; }, oracle, 20000, 8);
  CHECK(all.misclassification_pct == 0.0);

  // Independent estimate of the true fraction from a fresh sample.
  const Eigen::MatrixXd pts = kDisk.sample_uniform(20000, 901);
  int hits = 0;
  for (int i = 0; i < pts.cols(); ++i) hits += mpi_oracle(kJulia, kDisk, pts.col(i), 1000);
  const double p = static_cast<double>(hits) / pts.cols();
  const double expected = 100.0 * (1.0 - p) / p;
  const double se_fresh = 100.0 * std::sqrt(p * (1 - p) / pts.cols()) / (p * p);
  const double tol = 4.0 * std::hypot(all.volume_error_se, se_fresh);
  CHECK(std::abs(all.volume_error_pct - expected) <= tol);
}

TEST_CASE("input and degenerate errors") {
  const Classifier any = [](const Eigen::VectorXd&) { return true; };
  CHECK_THROWS_AS(estimate_metrics(kDisk, any, any, 999, 1), InputError);
  const Oracle empty = [](const Eigen::VectorXd&) { return false; };
  CHECK_THROWS_AS(estimate_metrics(kDisk, any, empty, 2000, 1), DegenerateError);
}

TEST_CASE("reports are reproducible and match the serial reference") {
  const Classifier approx = [](const Eigen::VectorXd& x) { return inside(x, 0.55); };
  const Oracle oracle = [](const Eigen::VectorXd& x) { return inside(x, 0.5); };
  const MetricsReport a = estimate_metrics(kDisk, approx, oracle, 30000, 17);
  const MetricsReport b = estimate_metrics(kDisk, approx, oracle, 30000, 17);
  const MetricsReport r = estimate_metrics_reference(kDisk, approx, oracle, 30000, 17);
  for (const MetricsReport* o : {&b, &r}) {
    CHECK(o->volume_error_pct == a.volume_error_pct);
    CHECK(o->misclassification_pct == a.misclassification_pct);
    CHECK(o->volume_error_se == a.volume_error_se);
    CHECK(o->oracle_positive == a.oracle_positive);
  }
  // Area ratio (0.55^2 - 0.5^2) / 0.5^2 = 21%.
  CHECK(a.volume_error_pct == doctest::Approx(21.0).epsilon(0.05));
  CHECK(a.misclassification_pct == 0.0);
  const MetricsReport other = estimate_metrics(kDisk, approx, oracle, 30000, 18);
  CHECK(other.volume_error_pct != a.volume_error_pct);
}

TEST_CASE("doubling the sample count shrinks the standard error by about sqrt 2") {
  const Classifier approx = [](const Eigen::VectorXd& x) { return inside(x, 0.6) && x(0) > -0.5; };
  const Oracle oracle = [](const Eigen::VectorXd& x) { return inside(x, 0.55); };
  double ratio_sum = 0.0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    const MetricsReport small = estimate_metrics(kDisk, approx, oracle, 20000, 100 + t);
    const MetricsReport large = estimate_metrics(kDisk, approx, oracle, 40000, 200 + t);
    ratio_sum += small.volume_error_se / large.volume_error_se;
    CHECK(small.misclassification_se / large.misclassification_se ==
          doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
  }
  const double mean = ratio_sum / trials;
  CHECK(mean >= 1.25);
  CHECK(mean <= 1.6);
}

TEST_CASE("model overload uses the threshold") {
  const ValueModel m = radial_model();
  const ConstraintSet& box = m.set;
  const Oracle oracle = [](const Eigen::VectorXd& x) { return x.squaredNorm() <= 0.25; };
  const MetricsReport exact = estimate_metrics(m, 0.25, oracle, 10000, 4);
  CHECK(exact.volume_error_pct == 0.0);
  CHECK(exact.misclassification_pct == 0.0);
  const MetricsReport tight = estimate_metrics(m, 0.2, oracle, 10000, 4);
  CHECK(tight.volume_error_pct == 0.0);
  CHECK(tight.misclassification_pct > 0.0);
  (void)box;
}

TEST_CASE("membership grid") {
  const ValueModel m = radial_model();
  GridOptions opts;
  opts.resolution = 3;
  const auto grid = classify_grid(m, 0.5, opts);
  REQUIRE(grid.size() == 9);
  CHECK(grid[0].x1 == -1.0);
  CHECK(grid[0].x2 == -1.0);
  CHECK(grid[4].x1 == 0.0);
  CHECK(grid[4].member);
  CHECK_FALSE(grid[0].member);
  for (const GridPoint& g : grid) CHECK(g.value == evaluate_value(m, v2(g.x1, g.x2)));

  opts.resolution = 21;
  const auto fine = classify_grid(m, 0.5, opts);
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j) {
      const GridPoint& a = fine[i * 21 + j];
      const GridPoint& b = fine[i * 21 + (20 - j)];
      const GridPoint& c = fine[(20 - i) * 21 + j];
      CHECK(a.value == doctest::Approx(b.value));
      CHECK(a.value == doctest::Approx(c.value));
    }

  opts.resolution = 1;
  CHECK_THROWS_AS(classify_grid(m, 0.5, opts), InputError);
}

TEST_CASE("projection grids for higher dimensions") {
  const BasisSpec basis = BasisSpec::monomial(3, 2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    const auto& e = basis.exponents()[k];
    if (e[0] == 2 || e[1] == 2 || e[2] == 2) c(k) = 1;
  }
  const ValueModel m{basis, c, 0.5, ConstraintSet::box(-testutil::unit_box(3, 1.0), testutil::unit_box(3, 1.0)), {}};
  GridOptions opts;
  opts.resolution = 5;
  opts.slice_values = Eigen::VectorXd::Constant(1, 0.9);
  const auto slice = classify_grid(m, 0.5, opts);
  CHECK_FALSE(slice[12].member);  // origin with x3 = 0.9
  opts.mode = GridOptions::Mode::projection;
  opts.fiber_samples = 400;
  const auto proj = classify_grid(m, 0.5, opts);
  CHECK(proj[12].member);
  CHECK(proj[12].value <= 0.5);
}

TEST_CASE("grid CSV") {
  const auto path = std::filesystem::temp_directory_path() / "invset_grid_test.csv";
  GridOptions opts;
  opts.resolution = 2;
  write_grid_csv(classify_grid(radial_model(), 0.5, opts), path.string());
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "x1,x2,value,member");
  int rows = 0;
  while (std::getline(in, row)) ++rows;
  CHECK(rows == 4);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
