#include <cmath>
#include <sstream>

#include <doctest.h>

#include "helpers.hpp"
#include "invset/errors.hpp"
#include "invset/lp.hpp"
#include "lp_oracle.hpp"

using namespace invset;
using testutil::v1;
using testutil::v2;

namespace {

LpProblem make(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& z) {
  LpProblem p;
  p.a = a;
  p.b = b;
  p.objective = z;
  for (int i = 0; i < a.rows(); ++i) p.provenance.push_back({RowKind::bellman, i});
  return p;
}

TransitionDataset tiny_dataset() {
  TransitionDataset d;
  d.x.resize(2, 2);
  d.x_plus.resize(2, 2);
  d.x << 0.1, 0.5, -0.2, 0.3;
  d.x_plus << 0.2, 1.5, 0.1, 0.0;  // second successor leaves the disk
  return d;
}

}  // namespace

TEST_SUITE("lp") {

TEST_CASE("solver examples") {
  Eigen::MatrixXd a(2, 1);
  a << 1, -1;
  const LpSolution s1 = solve_lp(make(a, v2(3, 1), v1(1)));
  CHECK(s1.status == LpStatus::optimal);
  CHECK(s1.coefficients(0) == doctest::Approx(3.0).epsilon(1e-7));

  Eigen::MatrixXd a2(4, 2);
  a2 << 1, 0, 0, 1, -1, 0, 0, -1;
  Eigen::VectorXd b2(4);
  b2 << 1, 1, 0, 0;
  const LpSolution s2 = solve_lp(make(a2, b2, v2(1, 1)));
  CHECK(s2.status == LpStatus::optimal);
  CHECK((s2.coefficients - v2(1, 1)).norm() < 1e-7);
  CHECK(s2.primal_objective == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(s2.max_constraint_violation <= 1e-8 * 2);
  CHECK(s2.duality_gap <= 1e-8);
}

TEST_CASE("random instances agree with vertex enumeration") {
  Rng rng(2024);
  const SolverRegistry registry = [] {
    SolverRegistry r = SolverRegistry::with_defaults();
    r.add("vertex_enumeration", testutil::vertex_solver);
    return r;
  }();
  for (int k = 0; k < 50; ++k) {
    const testutil::RandomLp inst = testutil::random_bounded_lp(rng);
    const LpSolution built_in = registry.get(kDefaultSolver)(inst.problem, {});
    const LpSolution plugged = registry.get("vertex_enumeration")(inst.problem, {});
    REQUIRE(built_in.status == LpStatus::optimal);
    CHECK(std::abs(built_in.primal_objective - inst.optimum) <= 1e-6);
    CHECK(std::abs(built_in.primal_objective - plugged.primal_objective) <= 1e-6);
    // Feasibility checked outside the solver.
    const double tol = 1e-8 * (1.0 + inst.problem.b.cwiseAbs().maxCoeff());
    CHECK(((inst.problem.a * built_in.coefficients - inst.problem.b).array() <= tol).all());
  }
}

TEST_CASE("weak duality against random feasible points") {
  Rng rng(7);
  for (int k = 0; k < 20; ++k) {
    const testutil::RandomLp inst = testutil::random_bounded_lp(rng);
    const LpSolution sol = solve_lp(inst.problem);
    const int n = inst.problem.cols();
    for (int t = 0; t < 200; ++t) {
      const Eigen::VectorXd c = testutil::uniform_vec(rng, n, -3, 3);
      if ((inst.problem.a * c - inst.problem.b).maxCoeff() > 0.0) continue;
      CHECK(inst.problem.objective.dot(c) <= sol.primal_objective + 1e-8);
    }
  }
}

TEST_CASE("scaling the constraints leaves the maximizer unchanged") {
  Rng rng(99);
  for (int k = 0; k < 20; ++k) {
    const testutil::RandomLp inst = testutil::random_bounded_lp(rng);
    LpProblem scaled = inst.problem;
    scaled.a *= 10.0;
    scaled.b *= 10.0;
    const LpSolution a = solve_lp(inst.problem);
    const LpSolution b = solve_lp(scaled);
    REQUIRE(b.status == LpStatus::optimal);
    CHECK(std::abs(a.primal_objective - b.primal_objective) <= 1e-6);
    // Compare through the objective when the maximizer is not unique.
    if ((a.coefficients - b.coefficients).norm() > 1e-6) {
      const auto v = testutil::enumerate_vertices(inst.problem.a, inst.problem.b,
                                                  inst.problem.objective);
      CHECK(std::abs(b.primal_objective - v->objective) <= 1e-6);
    }
  }
}

TEST_CASE("unbounded and infeasible problems are detected") {
  Eigen::MatrixXd a(1, 2);
  a << 1, 0;
  const LpSolution u = solve_lp(make(a, v1(1), v2(0, 1)));
  CHECK(u.status == LpStatus::unbounded);
  CHECK(u.coefficients(1) > 0.0);
  CHECK(std::abs(u.coefficients(0)) < 1e-12);
  const LpSolution ray = solve_lp(make(-Eigen::MatrixXd::Ones(1, 1), v1(1), v1(1)));
  CHECK(ray.status == LpStatus::unbounded);

  Eigen::MatrixXd a2(2, 1);
  a2 << 1, -1;
  const LpSolution inf = solve_lp(make(a2, v2(-1, -1), v1(1)));
  CHECK(inf.status == LpStatus::infeasible);
}

TEST_CASE("iteration cap yields numerical failure") {
  Eigen::MatrixXd a(4, 2);
  a << 1, 0, 0, 1, -1, 0, 0, -1;
  Eigen::VectorXd b(4);
  b << 1, 1, 0, 0;
  SolverOptions o;
  o.max_iterations = 1;
  CHECK(solve_lp(make(a, b, v2(1, 1)), o).status == LpStatus::numerical_failure);
}

TEST_CASE("solver input validation") {
  LpProblem p = make(Eigen::MatrixXd::Ones(2, 2), v2(1, 1), v1(1));
  CHECK_THROWS_AS(solve_lp(p), InputError);
  p = make(Eigen::MatrixXd::Ones(2, 2), v2(1, NAN), v2(1, 1));
  CHECK_THROWS_AS(solve_lp(p), InputError);
}

TEST_CASE("solver is deterministic") {
  Rng rng(5);
  const testutil::RandomLp inst = testutil::random_bounded_lp(rng);
  const LpSolution a = solve_lp(inst.problem);
  const LpSolution b = solve_lp(inst.problem);
  CHECK(a.coefficients == b.coefficients);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("registry") {
  const SolverRegistry r = SolverRegistry::with_defaults();
  CHECK(r.names() == std::vector<std::string>{kDefaultSolver});
  CHECK_THROWS_AS(r.get("simplex"), ConfigError);
  SolverRegistry r2;
  CHECK_THROWS_AS(r2.add("", testutil::vertex_solver), InputError);
}

TEST_CASE("assembly block structure") {
  const ConstraintSet disk = ConstraintSet::ball(v2(0, 0), 1.0);
  const BasisSpec basis = BasisSpec::monomial(2, 0);  // N = 1
  Eigen::MatrixXd art(2, 3);
  art << 0.1, -0.2, 0.3, 0.0, 0.4, -0.5;
  const LpProblem p = assemble_problem(tiny_dataset(), art, basis, disk, 0.5);
  CHECK(p.rows() == 2 + 6);
  CHECK(p.cols() == 1);
  CHECK(p.b(0) == 0.0);  // successor inside the set
  CHECK(p.b(1) == doctest::Approx(0.5));
  for (int i = 2; i < 5; ++i) CHECK(p.b(i) == 2.0);
  for (int i = 5; i < 8; ++i) CHECK(p.b(i) == 1.0);
  CHECK(p.a(0, 0) == doctest::Approx(0.5));  // 1 - alpha * 1
  CHECK(p.a(5, 0) == -1.0);
  CHECK(p.provenance[0].kind == RowKind::bellman);
  CHECK(p.provenance[2].kind == RowKind::upper_bound);
  CHECK(p.provenance[7].kind == RowKind::lower_bound);
  CHECK(p.provenance[7].index == 2);
  CHECK(p.has_bound_rows());
  CHECK(p.objective(0) == doctest::Approx(1.0));
}

TEST_CASE("assembled rows follow the Bellman construction") {
  const ConstraintSet disk = ConstraintSet::ball(v2(0, 0), 1.0);
  const BasisSpec basis = BasisSpec::monomial(2, 2);
  const TransitionDataset d = tiny_dataset();
  const Eigen::MatrixXd art = disk.sample_uniform(20, 3);
  Quadrature q;
  q.samples = 1000;
  const LpProblem p = assemble_problem(d, art, basis, disk, 0.6, q);
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXd expect =
        basis.eval(d.x.col(i)) - 0.6 * basis.eval(disk.project(d.x_plus.col(i)));
    CHECK((p.a.row(i).transpose() - expect).norm() < 1e-15);
    CHECK(p.b(i) == disk.saturated_distance(d.x_plus.col(i)));
  }
  CHECK((p.b.head(2).array() >= 0).all());
  CHECK((p.b.head(2).array() <= 1).all());
}

TEST_CASE("assembly rejects bad inputs") {
  const ConstraintSet disk = ConstraintSet::ball(v2(0, 0), 1.0);
  const BasisSpec basis = BasisSpec::monomial(2, 2);
  CHECK_THROWS_AS(assemble_problem(tiny_dataset(), disk.sample_uniform(3, 1), basis, disk, 0.6),
                  ConfigError);
  CHECK_THROWS_AS(assemble_problem(tiny_dataset(), disk.sample_uniform(30, 1), basis, disk, 1.0),
                  InputError);
  CHECK_THROWS_AS(assemble_problem(tiny_dataset(), Eigen::MatrixXd::Zero(3, 30), basis, disk, 0.6),
                  InputError);
}

TEST_CASE("bound rows keep the sampled LP bounded") {
  // Every successor leaves the set, which pushes v up; only bound rows cap it.
  const ConstraintSet disk = ConstraintSet::ball(v2(0, 0), 1.0);
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    TransitionDataset d;
    d.x = disk.sample_uniform(100, 10 + trial);
    d.x_plus = 3.0 * d.x.colwise().normalized();
    const BasisSpec basis = BasisSpec::monomial(2, 4);
    const Eigen::MatrixXd art = disk.sample_uniform(200, 20 + trial);
    Quadrature q;
    q.samples = 20000;
    const LpProblem p = assemble_problem(d, art, basis, disk, 0.6, q);
    const LpSolution sol = solve_lp(p);
    CHECK(sol.status == LpStatus::optimal);
    CHECK(sol.max_constraint_violation <= 1e-8 * (1.0 + p.b.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("problem dump round trip") {
  Rng rng(4);
  const testutil::RandomLp inst = testutil::random_bounded_lp(rng);
  std::stringstream ss;
  write_problem(inst.problem, ss);
  std::string first;
  std::getline(ss, first);
  CHECK(first == std::to_string(inst.problem.cols()) + " " + std::to_string(inst.problem.rows()));
  ss.seekg(0);
  const LpProblem back = read_problem(ss);
  CHECK(back.a == inst.problem.a);
  CHECK(back.b == inst.problem.b);
  CHECK(back.objective == inst.problem.objective);
  std::stringstream bad("2 1\n1 1\n1 1 1\n");
  CHECK_THROWS_AS(read_problem(bad), InputError);
}

}  // TEST_SUITE
