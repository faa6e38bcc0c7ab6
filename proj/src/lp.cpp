#include "invset/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "invset/errors.hpp"
#include "invset/kernels.hpp"

namespace invset {

bool LpProblem::has_bound_rows() const {
  return std::any_of(provenance.begin(), provenance.end(), [](const RowTag& t) {
    return t.kind != RowKind::bellman;
  });
}

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

LpProblem assemble_problem(const TransitionDataset& data,
                           const Eigen::MatrixXd& artificial_points,
                           const BasisSpec& basis, const ConstraintSet& set,
                           double alpha, const Quadrature& quadrature) {
  LpProblem p = assemble_constraints(data, artificial_points, basis, set, alpha);
  if (!unisolvency_check(basis, artificial_points).unisolvent)
    throw ConfigError(
        "artificial points are not unisolvent with respect to the basis");
  p.objective = integrate_basis(basis, set, quadrature).z;
  if (!p.objective.allFinite())
    throw NumericalError("LP objective has non-finite entries");
  return p;
}

LpProblem assemble_constraints(const TransitionDataset& data,
                               const Eigen::MatrixXd& artificial_points,
                               const BasisSpec& basis, const ConstraintSet& set,
                               double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (data.size() < 1) throw InputError("dataset is empty");
  const int n = set.dimension();
  if (data.dimension() != n || basis.state_dimension() != n ||
      artificial_points.rows() != n)
    throw InputError("dataset, basis, artificial points and set dimensions differ");

  const int k = data.size();
  const int kp = static_cast<int>(artificial_points.cols());
  const int n_basis = basis.size();

  LpProblem p;
  RowMatrix bellman;
  Eigen::VectorXd b1;
  kernels::bellman_rows(basis, set, data.x, data.x_plus, alpha, bellman, b1);
  RowMatrix bounds;
  kernels::basis_rows(basis, artificial_points, bounds);

  p.a.resize(k + 2 * kp, n_basis);
  p.a.topRows(k) = bellman;
  p.a.middleRows(k, kp) = bounds;
  p.a.bottomRows(kp) = -bounds;
  p.b.resize(k + 2 * kp);
  p.b.head(k) = b1;
  p.b.segment(k, kp).setConstant(1.0 / (1.0 - alpha));
  p.b.tail(kp).setConstant(1.0);

  p.provenance.reserve(k + 2 * kp);
  for (int i = 0; i < k; ++i) p.provenance.push_back({RowKind::bellman, i});
  for (int i = 0; i < kp; ++i) p.provenance.push_back({RowKind::upper_bound, i});
  for (int i = 0; i < kp; ++i) p.provenance.push_back({RowKind::lower_bound, i});

  if (!p.a.allFinite() || !p.b.allFinite())
    throw NumericalError("assembled LP has non-finite entries");
  return p;
}

double max_violation(const LpProblem& problem, const Eigen::VectorXd& c) {
  if (problem.rows() == 0) return 0.0;
  return std::max(0.0, (problem.a * c - problem.b).maxCoeff());
}

namespace {

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv(i) < 0.0) step = std::min(step, -v(i) / dv(i));
  return step;
}

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

// Cholesky of the Jacobi-scaled normal matrix D G D. Pivots that collapse
// below kPivotFloor are replaced by a huge value, which zeroes the matching
// component of the solution instead of amplifying rounding noise.
constexpr double kPivotFloor = 1e-30;
constexpr double kSkippedPivot = 1e64;

struct NormalSolver {
  Eigen::MatrixXd l;
  Eigen::VectorXd d;
  int skipped = 0;

  bool factor(const Eigen::MatrixXd& gram) {
    const Eigen::Index n = gram.rows();
    d = gram.diagonal().unaryExpr(
        [](double g) { return g > 0.0 ? 1.0 / std::sqrt(g) : 1.0; });
    l = d.asDiagonal() * gram * d.asDiagonal();
    skipped = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double pivot = l(j, j) - l.row(j).head(j).squaredNorm();
      if (!std::isfinite(pivot)) return false;
      if (pivot <= kPivotFloor) {
        ++skipped;
        l(j, j) = kSkippedPivot;
        l.col(j).tail(n - j - 1).setZero();
        continue;
      }
      pivot = std::sqrt(pivot);
      l(j, j) = pivot;
      if (j + 1 < n) {
        l.col(j).tail(n - j - 1) -=
            l.bottomLeftCorner(n - j - 1, j) * l.row(j).head(j).transpose();
        l.col(j).tail(n - j - 1) /= pivot;
      }
    }
    l.triangularView<Eigen::StrictlyUpper>().setZero();
    return true;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd t = d.cwiseProduct(rhs);
    const auto lower = l.triangularView<Eigen::Lower>();
    lower.solveInPlace(t);
    lower.transpose().solveInPlace(t);
    return d.cwiseProduct(t);
  }
};

LpSolution finish(const LpProblem& p, const Eigen::VectorXd& c,
                  const Eigen::VectorXd& y, LpStatus status, int iterations) {
  LpSolution sol;
  sol.coefficients = c;
  sol.status = status;
  sol.iterations = iterations;
  sol.primal_objective = p.objective.dot(c);
  sol.max_constraint_violation = max_violation(p, c);
  const double dual = p.b.dot(y);
  sol.duality_gap =
      std::abs(dual - sol.primal_objective) / (1.0 + std::abs(sol.primal_objective));
  return sol;
}

}  // namespace

namespace {

struct IpmResult {
  Eigen::VectorXd c, y;
  LpStatus status = LpStatus::numerical_failure;
  int iterations = 0;
};

// Predictor-corrector iterations on max z'c s.t. A c <= b. The columns of A
// are expected to be well scaled (see solve_lp).
IpmResult run_ipm(const RowMatrix& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& z, const SolverOptions& options) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const double b_norm = inf_norm(b);
  const double z_norm = inf_norm(z);
  const double a_norm = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  const double divergence = 1e10 * (1.0 + b_norm + z_norm);

  Eigen::MatrixXd gram;
  NormalSolver llt;
  IpmResult out;
  auto done = [&](Eigen::VectorXd c, Eigen::VectorXd y, LpStatus st, int iter) {
    out.c = std::move(c);
    out.y = std::move(y);
    out.status = st;
    out.iterations = iter;
    return out;
  };

  // Least-squares starting point, shifted into the interior.
  kernels::weighted_gram(a, Eigen::VectorXd::Ones(m), gram);
  if (!llt.factor(gram)) throw NumericalError("LP matrix has non-finite Gram entries");
  Eigen::VectorXd c = llt.solve(a.transpose() * b);
  Eigen::VectorXd s = b - a * c;
  Eigen::VectorXd y = a * llt.solve(z);
  s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
  y.array() += std::max(-1.5 * y.minCoeff(), 0.0);
  {
    const double sy = s.dot(y);
    if (y.sum() > 0.0 && s.sum() > 0.0 && sy > 0.0) {
      const double ds = 0.5 * sy / y.sum();
      const double dy = 0.5 * sy / s.sum();
      s.array() += ds;
      y.array() += dy;
    }
    if (!(s.minCoeff() > 0.0) || !(y.minCoeff() > 0.0)) {
      s = s.cwiseMax(1.0);
      y = y.cwiseMax(1.0);
    }
  }

  Eigen::VectorXd r_p(m), r_d(n), w(m), rhs(n), dc(n), ds(m), dy(m);
  Eigen::VectorXd dc_aff(n), ds_aff(m), dy_aff(m), r_c(m);

  auto direction = [&](const Eigen::VectorXd& comp, Eigen::VectorXd& out_c,
                       Eigen::VectorXd& out_s, Eigen::VectorXd& out_y) {
    const Eigen::VectorXd t = (comp - y.cwiseProduct(r_p)).cwiseQuotient(s);
    rhs = r_d - a.transpose() * t;
    out_c = llt.solve(rhs);
    out_s = r_p - a * out_c;
    out_y = (comp - y.cwiseProduct(out_s)).cwiseQuotient(s);
    // Iterative refinement against the dual equation.
    double err = inf_norm(r_d - a.transpose() * out_y);
    for (int k = 0; k < 3 && err > 0.0; ++k) {
      const Eigen::VectorXd c_try = out_c + llt.solve(r_d - a.transpose() * out_y);
      const Eigen::VectorXd s_try = r_p - a * c_try;
      const Eigen::VectorXd y_try = (comp - y.cwiseProduct(s_try)).cwiseQuotient(s);
      const double e = inf_norm(r_d - a.transpose() * y_try);
      if (!(e < 0.5 * err)) break;
      out_c = c_try;
      out_s = s_try;
      out_y = y_try;
      err = e;
    }
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    r_p = b - a * c - s;
    r_d = z - a.transpose() * y;
    const double pobj = z.dot(c);
    const double dobj = b.dot(y);
    const double pinf = inf_norm(r_p) / (1.0 + b_norm);
    const double dinf = inf_norm(r_d) / (1.0 + z_norm);
    const double gap = std::abs(dobj - pobj) / (1.0 + std::abs(pobj));
    const double mu = s.dot(y) / static_cast<double>(m);

    if (options.verbose)
      std::fprintf(stderr, "ipm %3d pobj %+.10e pinf %.2e dinf %.2e gap %.2e mu %.2e\n",
                   iter, pobj, pinf, dinf, gap, mu);
    if (pinf <= options.feasibility_tol && dinf <= options.feasibility_tol &&
        gap <= options.gap_tol)
      return done(c, y, LpStatus::optimal, iter);

    // Diverging primal iterate along a recession direction: unbounded.
    if (inf_norm(c) > divergence) {
      const Eigen::VectorXd d = c / inf_norm(c);
      if ((a * d).maxCoeff() <= 1e-6 * a_norm && z.dot(d) > 0.0)
        return done(c, y, LpStatus::unbounded, iter);
    }
    // Diverging dual iterate with a Farkas certificate: infeasible.
    if (inf_norm(y) > divergence) {
      const Eigen::VectorXd v = y / inf_norm(y);
      if (inf_norm(a.transpose() * v) <= 1e-6 * a_norm && b.dot(v) < 0.0)
        return done(c, y, LpStatus::infeasible, iter);
    }
    if (!std::isfinite(mu) || !c.allFinite())
      return done(c, y, LpStatus::numerical_failure, iter);

    w = y.cwiseQuotient(s);
    kernels::weighted_gram(a, w, gram);
    if (!llt.factor(gram)) return done(c, y, LpStatus::numerical_failure, iter);

    // Predictor.
    r_c = -s.cwiseProduct(y);
    direction(r_c, dc_aff, ds_aff, dy_aff);
    const double ap_aff = max_step(s, ds_aff);
    const double ad_aff = max_step(y, dy_aff);
    const double mu_aff = (s + ap_aff * ds_aff).dot(y + ad_aff * dy_aff) /
                          static_cast<double>(m);
    const double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);

    // Corrector.
    r_c = (sigma * mu - s.array() * y.array() - ds_aff.array() * dy_aff.array())
              .matrix();
    direction(r_c, dc, ds, dy);
    const double ap = std::min(1.0, options.step_fraction * max_step(s, ds));
    const double ad = std::min(1.0, options.step_fraction * max_step(y, dy));
    c += ap * dc;
    s += ap * ds;
    y += ad * dy;
  }
  return done(c, y, LpStatus::numerical_failure, options.max_iterations);
}

}  // namespace

LpSolution solve_lp(const LpProblem& p, const SolverOptions& options) {
  const Eigen::Index m = p.rows();
  const Eigen::Index n = p.cols();
  if (p.objective.size() != n || p.b.size() != m)
    throw InputError("LP objective / rhs sizes do not match A");
  if (!p.a.allFinite() || !p.b.allFinite() || !p.objective.allFinite())
    throw InputError("LP data must be finite");
  if (m == 0) {
    const LpStatus st = p.objective.isZero(0.0) ? LpStatus::optimal
                                                : LpStatus::unbounded;
    return finish(p, Eigen::VectorXd::Zero(n), Eigen::VectorXd(), st, 0);
  }

  // Change of variables c = T c~ with T = D L^-T, where D (A'A) D = L L'.
  // The transformed columns are close to orthonormal, which keeps the
  // normal equations accurate for badly scaled bases such as high-degree
  // monomials. Rank-deficient A is left with the diagonal scaling only.
  Eigen::MatrixXd gram;
  kernels::weighted_gram(p.a, Eigen::VectorXd::Ones(m), gram);
  NormalSolver chol;
  if (!chol.factor(gram)) throw NumericalError("LP matrix has non-finite Gram entries");
  const bool full_rank = chol.skipped == 0;
  if (!full_rank) {
    // An objective with a component in null(A) grows without bound along it.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cutoff = ev.cwiseAbs().maxCoeff() * static_cast<double>(n) *
                          std::numeric_limits<double>::epsilon() * 1e3;
    Eigen::VectorXd ray = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k)
      if (std::abs(ev(k)) <= cutoff)
        ray += eig.eigenvectors().col(k).dot(p.objective) * eig.eigenvectors().col(k);
    if (ray.norm() > 1e-9 * (1.0 + p.objective.norm())) {
      LpSolution sol = finish(p, ray / ray.norm(), Eigen::VectorXd::Zero(m),
                              LpStatus::unbounded, 0);
      return sol;
    }
  }

  RowMatrix at = p.a * chol.d.asDiagonal();
  Eigen::VectorXd zt = chol.d.cwiseProduct(p.objective);
  auto lower = chol.l.triangularView<Eigen::Lower>();
  if (full_rank) {
    lower.transpose().solveInPlace<Eigen::OnTheRight>(at);
    lower.solveInPlace(zt);
  }
  IpmResult r = run_ipm(at, p.b, zt, options);
  if (full_rank) lower.transpose().solveInPlace(r.c);
  r.c = chol.d.cwiseProduct(r.c);
  return finish(p, r.c, r.y, r.status, r.iterations);
}

SolverRegistry SolverRegistry::with_defaults() {
  SolverRegistry r;
  r.add(kDefaultSolver, [](const LpProblem& p, const SolverOptions& o) {
    return solve_lp(p, o);
  });
  return r;
}

void SolverRegistry::add(const std::string& name, LpSolver solver) {
  if (name.empty() || !solver) throw InputError("solver needs a name and a callable");
  solvers_[name] = std::move(solver);
}

const LpSolver& SolverRegistry::get(const std::string& name) const {
  const auto it = solvers_.find(name);
  if (it == solvers_.end()) throw ConfigError("unknown LP solver '" + name + "'");
  return it->second;
}

std::vector<std::string> SolverRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : solvers_) out.push_back(name);
  return out;
}

void write_problem(const LpProblem& p, std::ostream& out) {
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  out << p.cols() << ' ' << p.rows() << '\n';
  for (int j = 0; j < p.cols(); ++j) {
    if (j) out << ' ';
    put(p.objective(j));
  }
  out << '\n';
  for (int i = 0; i < p.rows(); ++i) {
    for (int j = 0; j < p.cols(); ++j) {
      put(p.a(i, j));
      out << ' ';
    }
    out << "| ";
    put(p.b(i));
    out << '\n';
  }
}

LpProblem read_problem(std::istream& in) {
  LpProblem p;
  int n = 0, m = 0;
  if (!(in >> n >> m) || n < 0 || m < 0) throw InputError("bad LP dump header");
  p.objective.resize(n);
  for (int j = 0; j < n; ++j)
    if (!(in >> p.objective(j))) throw InputError("bad LP dump objective");
  p.a.resize(m, n);
  p.b.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j)
      if (!(in >> p.a(i, j))) throw InputError("bad LP dump row");
    std::string bar;
    if (!(in >> bar) || bar != "|" || !(in >> p.b(i)))
      throw InputError("bad LP dump row separator");
    p.provenance.push_back({RowKind::bellman, i});
  }
  return p;
}

}  // namespace invset
