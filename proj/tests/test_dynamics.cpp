#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

#include <doctest.h>

#include "helpers.hpp"
#include "invset/dynamics.hpp"
#include "invset/errors.hpp"

using namespace invset;
using testutil::v1;
using testutil::v2;

TEST_SUITE("dynamics") {

TEST_CASE("map examples") {
  const SystemSpec julia = SystemSpec::julia();
  CHECK(step(julia, v2(0, 0)).isApprox(v2(-0.7, 0.2)));
  CHECK((step(julia, v2(-0.7, 0.2)) - v2(-0.25, -0.08)).norm() < 1e-15);

  const SystemSpec henon = SystemSpec::henon3_controlled();
  Eigen::VectorXd h = step(henon, Eigen::VectorXd::Zero(3), v1(0.0));
  CHECK(h.isApprox(Eigen::Vector3d(0.44, 0, 0)));
  Eigen::Vector3d x(0.5, -0.25, 0.1);
  Eigen::Vector3d expect(0.44 - 0.01 - 0.25 + 0.25 * 0.4, 0.5 + 0.5, -0.25);
  CHECK((step(henon, x, v1(0.4)) - expect).norm() < 1e-15);
}

TEST_CASE("control presence is validated") {
  CHECK_THROWS_AS(step(SystemSpec::henon3_controlled(), Eigen::VectorXd::Zero(3)),
                  InputError);
  CHECK_THROWS_AS(step(SystemSpec::julia(), v2(0, 0), v1(0)), InputError);
  CHECK_THROWS_AS(step(SystemSpec::julia(), v1(0)), InputError);
  CHECK_THROWS_AS(step(SystemSpec::henon3_controlled(), Eigen::VectorXd::Zero(3), v2(0, 0)),
                  InputError);
}

TEST_CASE("system specs validate their parameters") {
  CHECK_THROWS_AS(SystemSpec::julia_product(3, 1), InputError);
  CHECK_THROWS_AS(SystemSpec::flower_switched(SystemSpec::FlowerVariant::affine, 0.0),
                  InputError);
  CHECK(SystemSpec::julia_product(4, 1).state_dimension() == 4);
  CHECK(SystemSpec::henon3_controlled().control_dimension() == 1);
  CHECK(SystemSpec::henon3_controlled().default_control_set().has_value());
  CHECK_FALSE(SystemSpec::julia().default_control_set().has_value());
}

TEST_CASE("julia product conjugates stacked julia maps") {
  const SystemSpec sys = SystemSpec::julia_product(4, 21);
  const Eigen::MatrixXd q = random_unitary(4, 21);
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd x = testutil::uniform_vec(rng, 4, -1, 1);
    Eigen::VectorXd y = q.transpose() * x;
    for (int b = 0; b < 4; b += 2) {
      const Eigen::VectorXd yb = step(SystemSpec::julia(), y.segment(b, 2));
      y.segment(b, 2) = yb;
    }
    CHECK((step(sys, x) - q * y).norm() < 1e-13);
  }
}

TEST_CASE("rk4 on trivial and linear fields") {
  const Eigen::VectorXd x = v2(0.3, -1.2);
  CHECK(rk4_step([](const Eigen::VectorXd& s) { return Eigen::VectorXd::Zero(s.size()); },
                 x, 0.1) == x);
  const VectorField lin = [](const Eigen::VectorXd& s) { return s; };
  const double h = 0.05;
  const double poly = 1 + h + h * h / 2 + h * h * h / 6 + h * h * h * h / 24;
  CHECK(rk4_step(lin, v1(1.0), h)(0) == doctest::Approx(poly).epsilon(1e-15));
  CHECK(poly == doctest::Approx(1.0512711).epsilon(1e-7));
}

TEST_CASE("rk4 is fourth order") {
  // Error against exp(h) shrinks by ~2^5 per halving for one step.
  const VectorField lin = [](const Eigen::VectorXd& s) { return s; };
  double previous = 0.0;
  for (double h : {0.4, 0.2, 0.1}) {
    const double err = std::abs(rk4_step(lin, v1(1.0), h)(0) - std::exp(h));
    if (previous > 0.0) CHECK(previous / err == doctest::Approx(32.0).epsilon(0.15));
    previous = err;
  }
  // Composition of halved steps approaches the exact flow.
  const double one = rk4_step(lin, v1(1.0), 0.2)(0);
  const double two = rk4_step(lin, rk4_step(lin, v1(1.0), 0.1), 0.1)(0);
  CHECK(std::abs(two - std::exp(0.2)) < std::abs(one - std::exp(0.2)));
}

TEST_CASE("flower step freezes the branch at the step start") {
  const SystemSpec sys = SystemSpec::flower_switched(SystemSpec::FlowerVariant::affine);
  Eigen::Matrix2d a1, a2;
  a1 << -1, 1, -5, -0.1;
  a2 << -0.1, 5, -1, -0.1;
  const double h = 0.05;
  auto rk4_linear = [&](const Eigen::Matrix2d& a, const Eigen::Vector2d& x) {
    const Eigen::Matrix2d ha = h * a;
    const Eigen::Matrix2d p = Eigen::Matrix2d::Identity() + ha + ha * ha / 2 +
                              ha * ha * ha / 6 + ha * ha * ha * ha / 24;
    return Eigen::Vector2d(p * x);
  };
  // |x1| <= |x2| selects the first matrix; otherwise the second.
  CHECK((step(sys, v2(0.1, 0.5)) - rk4_linear(a1, {0.1, 0.5})).norm() < 1e-14);
  CHECK((step(sys, v2(0.5, 0.1)) - rk4_linear(a2, {0.5, 0.1})).norm() < 1e-14);
  // Near the switching surface the branch is still chosen once per step.
  CHECK((step(sys, v2(0.3, 0.3)) - rk4_linear(a1, {0.3, 0.3})).norm() < 1e-14);
}

TEST_CASE("nonlinear flower uses sin of cubes") {
  const SystemSpec sys = SystemSpec::flower_switched(SystemSpec::FlowerVariant::nonlinear, 0.05);
  const Eigen::VectorXd x = v2(0.2, 0.7);
  Eigen::Matrix2d a1;
  a1 << -1, 1, -5, -0.1;
  const VectorField field = [&](const Eigen::VectorXd& s) {
    Eigen::Vector2d phi(std::sin(s(0) * s(0) * s(0)), std::sin(s(1) * s(1) * s(1)));
    return Eigen::VectorXd(a1 * phi);
  };
  CHECK((step(sys, x) - rk4_step(field, x, 0.05)).norm() < 1e-15);
}

TEST_CASE("random unitary") {
  const Eigen::MatrixXd q1 = random_unitary(1, 5);
  CHECK(std::abs(std::abs(q1(0, 0)) - 1.0) < 1e-15);
  const Eigen::MatrixXd q = random_unitary(10, 3);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(q == random_unitary(10, 3));
  CHECK(q != random_unitary(10, 4));
}

TEST_CASE("dataset generation") {
  const SystemSpec julia = SystemSpec::julia();
  const ConstraintSet set = julia.default_state_set();
  const TransitionDataset d = generate_dataset(julia, set, std::nullopt, 3, 9);
  CHECK(d.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(set.contains(d.x.col(i)));

  const TransitionDataset big = generate_dataset(julia, set, std::nullopt, 500, 9);
  for (int i = 0; i < big.size(); ++i)
    CHECK(step(julia, big.x.col(i)) == big.x_plus.col(i));
  const TransitionDataset again = generate_dataset(julia, set, std::nullopt, 500, 9);
  CHECK(big.x == again.x);
  CHECK(big.x_plus == again.x_plus);

  CHECK_THROWS_AS(generate_dataset(julia, set, set, 3, 1), InputError);
  CHECK_THROWS_AS(generate_dataset(julia, ConstraintSet::box(v1(-1), v1(1)),
                                   std::nullopt, 3, 1),
                  InputError);
  const SystemSpec henon = SystemSpec::henon3_controlled();
  CHECK_THROWS_AS(generate_dataset(henon, henon.default_state_set(), std::nullopt, 3, 1),
                  InputError);
}

TEST_CASE("controlled data is consistent with some admissible input") {
  // x1+ is affine in u with slope 0.25, so u can be recovered and must lie in U.
  const SystemSpec henon = SystemSpec::henon3_controlled();
  const TransitionDataset d = generate_dataset(henon, henon.default_state_set(),
                                               henon.default_control_set(), 400, 4);
  for (int i = 0; i < d.size(); ++i) {
    const Eigen::VectorXd x = d.x.col(i);
    const double u = (d.x_plus(0, i) - (0.44 - 0.1 * x(2) - 4 * x(1) * x(1))) / 0.25;
    CHECK(std::abs(u) <= 1.0 + 1e-9);
    CHECK((step(henon, x, v1(u)) - d.x_plus.col(i)).norm() < 1e-9);
  }
}

TEST_CASE("dataset split") {
  const SystemSpec julia = SystemSpec::julia();
  const TransitionDataset d = generate_dataset(julia, julia.default_state_set(), std::nullopt, 11, 1);
  const auto [a, b] = d.split(0.5);
  CHECK(a.size() == 5);
  CHECK(b.size() == 6);
  CHECK(a.x.col(0) == d.x.col(0));
  CHECK(b.x.col(0) == d.x.col(5));
  CHECK_THROWS_AS(d.split(0.0), InputError);
  CHECK_THROWS_AS(d.split(1.0), InputError);
}

TEST_CASE("dataset csv round trip is exact") {
  const SystemSpec sys = SystemSpec::julia_product(4, 2);
  const TransitionDataset d = generate_dataset(sys, sys.default_state_set(), std::nullopt, 50, 5);
  const auto path = std::filesystem::temp_directory_path() / "invset_dataset_test.csv";
  write_dataset_csv(d, path.string());
  const TransitionDataset back = read_dataset_csv(path.string());
  CHECK(back.x == d.x);
  CHECK(back.x_plus == d.x_plus);
  std::FILE* f = std::fopen(path.string().c_str(), "r");
  char header[128] = {};
  REQUIRE(std::fgets(header, sizeof header, f));
  std::fclose(f);
  CHECK(std::string(header) == "x1,x2,x3,x4,xp1,xp2,xp3,xp4\n");
  std::filesystem::remove(path);
  CHECK_THROWS(read_dataset_csv("/nonexistent/invset.csv"));
}

TEST_CASE("rollout value examples") {
  const SystemSpec julia = SystemSpec::julia();
  const ConstraintSet set = julia.default_state_set();
  // Fixed point of z^2 + a inside the disk: the orbit never leaves.
  const std::complex<double> a(-0.7, 0.2);
  const std::complex<double> z = (1.0 - std::sqrt(1.0 - 4.0 * a)) / 2.0;
  const Eigen::VectorXd fixed = v2(z.real(), z.imag());
  CHECK((step(julia, fixed) - fixed).norm() < 1e-14);
  CHECK(rollout_value(julia, set, fixed, 0.6, 100).value == 0.0);
  CHECK(mpi_oracle(julia, set, fixed, 1000));

  // Single-step rollouts are the saturated distance of f(x).
  const Eigen::VectorXd far = v2(0.0, 0.99);  // f = (-1.6801, 0.2)
  const RolloutValue r1 = rollout_value(julia, set, far, 0.6, 1);
  CHECK(r1.value == doctest::Approx(std::hypot(1.6801, 0.2) - 1.0).epsilon(1e-12));
  CHECK(r1.truncation_bound == doctest::Approx(0.6 / 0.4));

  const SystemSpec big = SystemSpec::julia(Eigen::Vector2d(3.0, 0.0));
  CHECK(rollout_value(big, set, v2(0, 0), 0.6, 1).value == 1.0);
}

TEST_CASE("rollout value is bounded and satisfies the Bellman equation") {
  const SystemSpec julia = SystemSpec::julia();
  const ConstraintSet set = julia.default_state_set();
  const double alpha = 0.6;
  const int t = 60;
  const Eigen::MatrixXd pts = set.sample_uniform(100, 31);
  for (int i = 0; i < pts.cols(); ++i) {
    const Eigen::VectorXd x = pts.col(i);
    const double v = rollout_value(julia, set, x, alpha, t).value;
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 / (1.0 - alpha));
    const Eigen::VectorXd fx = step(julia, x);
    const double rhs = set.saturated_distance(fx) +
                       alpha * rollout_value(julia, set, set.project(fx), alpha, t - 1).value;
    CHECK(std::abs(v - rhs) <= 2.0 * std::pow(alpha, t) / (1.0 - alpha));
  }
  CHECK_THROWS_AS(rollout_value(SystemSpec::henon3_controlled(),
                                SystemSpec::henon3_controlled().default_state_set(),
                                Eigen::VectorXd::Zero(3), 0.5, 10),
                  InputError);
}

// The discounted sum of dist(f(.)) o fbar^k has Lipschitz constant at most
// L_f^(k+1) per term, so the sum is L_f / (1 - alpha L_f)-Lipschitz. The
// sharper 1 / (1 - alpha L_f) only holds for L_f <= 1 and is exceeded here.
TEST_CASE("rollout value is Lipschitz with constant L_f/(1 - alpha L_f)") {
  const SystemSpec julia = SystemSpec::julia();
  const ConstraintSet set = julia.default_state_set();
  // Empirical Lipschitz constant of f on the disk (|Df| = 2|z| <= 2).
  const Eigen::MatrixXd pts = set.sample_uniform(4000, 41);
  double lf = 0.0;
  for (int i = 0; i + 1 < pts.cols(); i += 2) {
    const double d = (pts.col(i) - pts.col(i + 1)).norm();
    lf = std::max(lf, (step(julia, pts.col(i)) - step(julia, pts.col(i + 1))).norm() / d);
  }
  lf = std::max(lf, 2.0);
  const double alpha = 0.4 / lf;
  const double bound = lf / (1.0 - alpha * lf) + 0.05;
  double worst = 0.0;
  Rng rng(8);
  for (int k = 0; k < 300; ++k) {
    const Eigen::VectorXd x = pts.col(k);
    const Eigen::VectorXd y = set.project(x + testutil::uniform_vec(rng, 2, -0.05, 0.05));
    const double d = (x - y).norm();
    if (d < 1e-9) continue;
    const double q = std::abs(rollout_value(julia, set, x, alpha, 80).value -
                              rollout_value(julia, set, y, alpha, 80).value) / d;
    CHECK(q <= bound);
    worst = std::max(worst, q);
  }
  // Sanity: the sampled quotients do exceed the L_f <= 1 constant.
  CHECK(worst > 1.0 / (1.0 - alpha * lf));
}

TEST_CASE("mpi oracle") {
  const SystemSpec julia = SystemSpec::julia();
  const ConstraintSet set = julia.default_state_set();
  CHECK_FALSE(mpi_oracle(julia, set, v2(1.5, 0), 1000));
  // Brute force from the origin: the orbit's first exit time decides.
  Eigen::VectorXd x = v2(0, 0);
  bool stays = true;
  for (int k = 0; k <= 1000 && stays; ++k) {
    if (!set.contains(x)) stays = false;
    x = step(julia, x);
    if (x.cwiseAbs().maxCoeff() > 1e6) {
      stays = false;
    }
  }
  CHECK(mpi_oracle(julia, set, v2(0, 0), 1000) == stays);

  const Eigen::MatrixXd pts = set.sample_uniform(10000, 51);
  int agree = 0;
  for (int i = 0; i < pts.cols(); ++i)
    agree += mpi_oracle(julia, set, pts.col(i), 100) == mpi_oracle(julia, set, pts.col(i), 1000);
  CHECK(agree >= 9990);
  CHECK_THROWS_AS(mpi_oracle(SystemSpec::henon3_controlled(),
                             SystemSpec::henon3_controlled().default_state_set(),
                             Eigen::VectorXd::Zero(3), 10),
                  InputError);
}

}  // TEST_SUITE
