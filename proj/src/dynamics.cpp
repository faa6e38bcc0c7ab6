#include "invset/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "invset/errors.hpp"
#include "invset/rng.hpp"

namespace invset {

namespace {

Eigen::Vector2d julia_map(const Eigen::Vector2d& a, double x1, double x2) {
  return {x1 * x1 - x2 * x2 + a(0), 2.0 * x1 * x2 + a(1)};
}

Eigen::VectorXd flower_field(SystemSpec::FlowerVariant variant,
                             bool first_branch, const Eigen::VectorXd& x) {
  Eigen::Vector2d phi;
  if (variant == SystemSpec::FlowerVariant::affine) {
    phi = x;
  } else {
    phi << std::sin(x(0) * x(0) * x(0)), std::sin(x(1) * x(1) * x(1));
  }
  Eigen::Matrix2d m;
  if (first_branch) {
    m << -1.0, 1.0, -5.0, -0.1;
  } else {
    m << -0.1, 5.0, -1.0, -0.1;
  }
  return m * phi;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SystemSpec SystemSpec::julia(Eigen::Vector2d a) {
  SystemSpec s;
  s.kind_ = Kind::julia;
  s.n_ = 2;
  s.a_ = a;
  return s;
}

SystemSpec SystemSpec::julia_product(int n, std::uint64_t unitary_seed,
                                     Eigen::Vector2d a) {
  if (n < 2 || n % 2 != 0)
    throw InputError("julia_product needs an even dimension >= 2");
  SystemSpec s;
  s.kind_ = Kind::julia_product;
  s.n_ = n;
  s.a_ = a;
  s.unitary_seed_ = unitary_seed;
  s.q_ = random_unitary(n, unitary_seed);
  return s;
}

SystemSpec SystemSpec::henon3_controlled() {
  SystemSpec s;
  s.kind_ = Kind::henon3_controlled;
  s.n_ = 3;
  s.m_ = 1;
  return s;
}

SystemSpec SystemSpec::flower_switched(FlowerVariant variant, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("RK4 step must be > 0");
  SystemSpec s;
  s.kind_ = Kind::flower_switched;
  s.n_ = 2;
  s.variant_ = variant;
  s.h_ = h;
  return s;
}

std::string SystemSpec::name() const {
  switch (kind_) {
    case Kind::julia: return "julia";
    case Kind::julia_product: return "julia_product";
    case Kind::henon3_controlled: return "henon3_controlled";
    case Kind::flower_switched: return "flower_switched";
  }
  return "unknown";
}

ConstraintSet SystemSpec::default_state_set() const {
  switch (kind_) {
    case Kind::julia:
      return ConstraintSet::ball(Eigen::VectorXd::Zero(2), 1.0);
    case Kind::julia_product:
      return ConstraintSet::transformed_box(q_, -Eigen::VectorXd::Ones(n_),
                                            Eigen::VectorXd::Ones(n_));
    case Kind::henon3_controlled:
    case Kind::flower_switched:
      return ConstraintSet::box(-Eigen::VectorXd::Ones(n_),
                                Eigen::VectorXd::Ones(n_));
  }
  throw InputError("unknown system");
}

std::optional<ConstraintSet> SystemSpec::default_control_set() const {
  if (m_ == 0) return std::nullopt;
  return ConstraintSet::box(-Eigen::VectorXd::Ones(m_),
                            Eigen::VectorXd::Ones(m_));
}

Eigen::VectorXd step(const SystemSpec& system, const Eigen::VectorXd& x,
                     const std::optional<Eigen::VectorXd>& u) {
  if (x.size() != system.state_dimension())
    throw InputError("state has dimension " + std::to_string(x.size()) +
                     ", system expects " +
                     std::to_string(system.state_dimension()));
  if (system.control_dimension() > 0) {
    if (!u) throw InputError(system.name() + " requires a control input");
    if (u->size() != system.control_dimension())
      throw InputError("control has wrong dimension");
  } else if (u) {
    throw InputError(system.name() + " takes no control input");
  }

  switch (system.kind()) {
    case SystemSpec::Kind::julia:
      return julia_map(system.julia_parameter(), x(0), x(1));
    case SystemSpec::Kind::julia_product: {
      const Eigen::MatrixXd& q = system.rotation();
      Eigen::VectorXd y = q.transpose() * x;
      for (int k = 0; k + 1 < y.size(); k += 2)
        y.segment<2>(k) = julia_map(system.julia_parameter(), y(k), y(k + 1));
      return q * y;
    }
    case SystemSpec::Kind::henon3_controlled: {
      Eigen::VectorXd next(3);
      next << 0.44 - 0.1 * x(2) - 4.0 * x(1) * x(1) + 0.25 * (*u)(0),
          x(0) - 4.0 * x(0) * x(1), x(1);
      return next;
    }
    case SystemSpec::Kind::flower_switched: {
      // Branch frozen at the step start.
      const bool first = x(0) * x(0) <= x(1) * x(1);
      const auto variant = system.flower_variant();
      return rk4_step(
          [variant, first](const Eigen::VectorXd& s) {
            return flower_field(variant, first, s);
          },
          x, system.step_size());
    }
  }
  throw InputError("unknown system");
}

Eigen::VectorXd rk4_step(const VectorField& field, const Eigen::VectorXd& x,
                         double h) {
  if (!(h > 0.0)) throw InputError("RK4 step must be > 0");
  const Eigen::VectorXd k1 = field(x);
  const Eigen::VectorXd k2 = field(x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = field(x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = field(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::MatrixXd random_unitary(int n, std::uint64_t seed) {
  if (n < 1) throw InputError("random_unitary needs n >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

std::pair<TransitionDataset, TransitionDataset> TransitionDataset::split(
    double fraction) const {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InputError("split fraction must lie in (0, 1)");
  const int first = static_cast<int>(std::floor(fraction * size()));
  if (first < 1 || first >= size())
    throw InputError("split leaves an empty part");
  TransitionDataset a{x.leftCols(first), x_plus.leftCols(first), system, seed};
  TransitionDataset b{x.rightCols(size() - first),
                      x_plus.rightCols(size() - first), system, seed};
  return {std::move(a), std::move(b)};
}

TransitionDataset generate_dataset(
    const SystemSpec& system, const ConstraintSet& state_set,
    const std::optional<ConstraintSet>& control_set, int count,
    std::uint64_t seed) {
  if (count < 1) throw InputError("dataset size must be positive");
  if (state_set.dimension() != system.state_dimension())
    throw InputError("state set dimension does not match the system");
  const int m = system.control_dimension();
  if (m > 0 && !control_set)
    throw InputError(system.name() + " needs a control set");
  if (m == 0 && control_set)
    throw InputError(system.name() + " takes no control set");
  if (control_set && control_set->dimension() != m)
    throw InputError("control set dimension does not match the system");

  TransitionDataset data;
  data.system = system.name();
  data.seed = seed;
  data.x = state_set.sample_uniform(count, derive_seed(seed, 0));
  Eigen::MatrixXd controls;
  if (m > 0) controls = control_set->sample_uniform(count, derive_seed(seed, 1));
  data.x_plus.resize(system.state_dimension(), count);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) {
    std::optional<Eigen::VectorXd> u;
    if (m > 0) u = controls.col(i);
    data.x_plus.col(i) = step(system, data.x.col(i), u);
  }
  return data;
}

void write_dataset_csv(const TransitionDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  const int n = data.dimension();
  for (int i = 0; i < n; ++i) out << (i ? "," : "") << "x" << i + 1;
  for (int i = 0; i < n; ++i) out << ",xp" << i + 1;
  out << '\n';
  for (int k = 0; k < data.size(); ++k) {
    for (int i = 0; i < n; ++i) out << (i ? "," : "") << fmt17(data.x(i, k));
    for (int i = 0; i < n; ++i) out << ',' << fmt17(data.x_plus(i, k));
    out << '\n';
  }
  if (!out) throw InputError("failed writing " + path);
}

TransitionDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  const auto columns = std::count(line.begin(), line.end(), ',') + 1;
  if (columns % 2 != 0 || line.rfind("x1", 0) != 0)
    throw InputError(path + ": header must be x1..xn,xp1..xpn");
  const int n = static_cast<int>(columns / 2);

  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int got = 0;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw InputError(path + ": bad number '" + cell + "'");
      values.push_back(v);
      ++got;
    }
    if (got != 2 * n)
      throw InputError(path + ": row " + std::to_string(rows + 1) +
                       " has wrong column count");
    ++rows;
  }
  if (rows == 0) throw InputError(path + ": no data rows");
  TransitionDataset data;
  data.x.resize(n, rows);
  data.x_plus.resize(n, rows);
  for (int k = 0; k < rows; ++k)
    for (int i = 0; i < n; ++i) {
      data.x(i, k) = values[static_cast<std::size_t>(k) * 2 * n + i];
      data.x_plus(i, k) = values[static_cast<std::size_t>(k) * 2 * n + n + i];
    }
  return data;
}

RolloutValue rollout_value(const SystemSpec& system, const ConstraintSet& set,
                           const Eigen::VectorXd& x, double alpha,
                           int horizon) {
  if (system.control_dimension() > 0)
    throw InputError("rollout_value is unsupported for controlled systems");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (horizon < 1) throw InputError("horizon must be >= 1");
  RolloutValue out;
  Eigen::VectorXd state = x;
  double weight = 1.0;
  for (int k = 0; k < horizon; ++k) {
    const Eigen::VectorXd next = step(system, state);
    out.value += weight * set.saturated_distance(next);
    state = set.project(next);
    weight *= alpha;
  }
  out.truncation_bound = std::pow(alpha, horizon) / (1.0 - alpha);
  return out;
}

bool mpi_oracle(const SystemSpec& system, const ConstraintSet& set,
                const Eigen::VectorXd& x, int horizon) {
  if (system.control_dimension() > 0)
    throw InputError("mpi_oracle is unsupported for controlled systems");
  const double escape = 10.0 * set.diameter();
  Eigen::VectorXd state = x;
  for (int k = 0; k <= horizon; ++k) {
    if (!set.contains(state)) return false;
    if (k == horizon) break;
    state = step(system, state);
    if (state.cwiseAbs().maxCoeff() > escape) return false;
  }
  return true;
}

Oracle make_mpi_oracle(const SystemSpec& system, const ConstraintSet& set,
                       int horizon) {
  if (system.control_dimension() > 0)
    throw InputError("no invariant-set oracle for controlled systems");
  return [system, set, horizon](const Eigen::VectorXd& x) {
    return mpi_oracle(system, set, x, horizon);
  };
}

}  // namespace invset
