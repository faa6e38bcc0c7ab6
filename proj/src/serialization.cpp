#include "invset/serialization.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include "invset/errors.hpp"

namespace invset {

namespace {

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ConfigError(std::string(what) + " must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

// Rows of the matrix as nested arrays.
json rows(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

Eigen::MatrixXd rows_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(what) + " must be a non-empty array of rows");
  const Eigen::VectorXd first = vec_from(j[0], what);
  Eigen::MatrixXd m(j.size(), first.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Eigen::VectorXd r = vec_from(j[i], what);
    if (r.size() != first.size())
      throw ConfigError(std::string(what) + " rows have unequal length");
    m.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return m;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(std::string("missing key '") + key + "'");
  return j.at(key);
}

std::string kind_of(const json& j) {
  const json& k = field(j, "kind");
  if (!k.is_string()) throw ConfigError("'kind' must be a string");
  return k.get<std::string>();
}

template <typename T>
T number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<T>();
}

// InputError from constructors becomes a configuration error here.
template <typename F>
auto validated(F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    throw ConfigError("not a number: '" + text + "'");
  return v;
}

json to_json(const ConstraintSet& set) {
  switch (set.kind()) {
    case ConstraintSet::Kind::box:
      return {{"kind", "box"}, {"lower", vec(set.lower())}, {"upper", vec(set.upper())}};
    case ConstraintSet::Kind::ball:
      return {{"kind", "ball"}, {"center", vec(set.center())}, {"radius", set.radius()}};
    case ConstraintSet::Kind::transformed_box:
      return {{"kind", "transformed_box"},
              {"rotation", rows(set.rotation())},
              {"lower", vec(set.lower())},
              {"upper", vec(set.upper())}};
  }
  return {};
}

ConstraintSet set_from_json(const json& j) {
  const std::string kind = kind_of(j);
  return validated([&] {
    if (kind == "box")
      return ConstraintSet::box(vec_from(field(j, "lower"), "lower"),
                                vec_from(field(j, "upper"), "upper"));
    if (kind == "ball")
      return ConstraintSet::ball(vec_from(field(j, "center"), "center"),
                                 number<double>(j, "radius"));
    if (kind == "transformed_box")
      return ConstraintSet::transformed_box(
          rows_from(field(j, "rotation"), "rotation"),
          vec_from(field(j, "lower"), "lower"),
          vec_from(field(j, "upper"), "upper"));
    throw ConfigError("unknown set kind '" + kind + "'");
  });
}

json to_json(const BasisSpec& basis) {
  if (basis.kind() == BasisSpec::Kind::monomial)
    return {{"kind", "monomial"}, {"n", basis.state_dimension()}, {"degree", basis.degree()}};
  // Centers stored one point per entry.
  return {{"kind", "rbf_thin_plate"}, {"centers", rows(basis.centers().transpose())}};
}

BasisSpec basis_from_json(const json& j) {
  const std::string kind = kind_of(j);
  return validated([&] {
    if (kind == "monomial")
      return BasisSpec::monomial(number<int>(j, "n"), number<int>(j, "degree"));
    if (kind == "rbf_thin_plate")
      return BasisSpec::thin_plate(
          rows_from(field(j, "centers"), "centers").transpose());
    throw ConfigError("unknown basis kind '" + kind + "'");
  });
}

json to_json(const SystemSpec& system) {
  switch (system.kind()) {
    case SystemSpec::Kind::julia:
      return {{"kind", "julia"}, {"a", vec(system.julia_parameter())}};
    case SystemSpec::Kind::julia_product:
      return {{"kind", "julia_product"},
              {"n", system.state_dimension()},
              {"unitary_seed", system.unitary_seed()},
              {"a", vec(system.julia_parameter())}};
    case SystemSpec::Kind::henon3_controlled:
      return {{"kind", "henon3_controlled"}};
    case SystemSpec::Kind::flower_switched:
      return {{"kind", "flower_switched"},
              {"variant", system.flower_variant() == SystemSpec::FlowerVariant::affine
                              ? "affine"
                              : "nonlinear"},
              {"h", system.step_size()}};
  }
  return {};
}

SystemSpec system_from_json(const json& j) {
  const std::string kind = kind_of(j);
  auto julia_a = [&]() -> Eigen::Vector2d {
    if (!j.contains("a")) return {-0.7, 0.2};
    const Eigen::VectorXd a = vec_from(j.at("a"), "a");
    if (a.size() != 2) throw ConfigError("julia parameter 'a' must have 2 entries");
    return a;
  };
  return validated([&] {
    if (kind == "julia") return SystemSpec::julia(julia_a());
    if (kind == "julia_product")
      return SystemSpec::julia_product(number<int>(j, "n"),
                                       number<std::uint64_t>(j, "unitary_seed"),
                                       julia_a());
    if (kind == "henon3_controlled") return SystemSpec::henon3_controlled();
    if (kind == "flower_switched") {
      const std::string variant = j.value("variant", std::string("affine"));
      if (variant != "affine" && variant != "nonlinear")
        throw ConfigError("flower variant must be 'affine' or 'nonlinear'");
      return SystemSpec::flower_switched(
          variant == "affine" ? SystemSpec::FlowerVariant::affine
                              : SystemSpec::FlowerVariant::nonlinear,
          j.value("h", 0.05));
    }
    throw ConfigError("unknown system kind '" + kind + "'");
  });
}

json to_json(const ValueModel& model) {
  json coeffs = json::array();
  for (Eigen::Index i = 0; i < model.coefficients.size(); ++i)
    coeffs.push_back(format_double(model.coefficients(i)));
  const ModelMetadata& m = model.metadata;
  json meta = {
      {"training_pairs", m.training_pairs},
      {"validation_pairs", m.validation_pairs},
      {"artificial_points", m.artificial_points},
      {"data_seed", m.data_seed},
      {"artificial_seed", m.artificial_seed},
      {"integration_method", m.integration_method},
      {"integration_samples", m.integration_samples},
      {"integration_seed", m.integration_seed},
      {"integration_error", m.integration_error},
      {"artificial_condition", m.artificial_condition},
      {"solver", m.solver},
      {"solver_status", m.solver_status},
      {"solver_iterations", m.solver_iterations},
      {"objective", m.objective},
      {"max_constraint_violation", m.max_constraint_violation},
      {"duality_gap", m.duality_gap},
  };
  if (m.centers_seed) meta["centers_seed"] = *m.centers_seed;
  if (m.e_bar) meta["e_bar"] = format_double(*m.e_bar);
  if (m.conservative_threshold)
    meta["conservative_threshold"] = format_double(*m.conservative_threshold);
  if (m.lipschitz_estimate) meta["lipschitz_estimate"] = format_double(*m.lipschitz_estimate);
  return {{"basis", to_json(model.basis)},
          {"coefficients", coeffs},
          {"alpha", format_double(model.alpha)},
          {"set", to_json(model.set)},
          {"metadata", meta}};
}

ValueModel model_from_json(const json& j) {
  BasisSpec basis = basis_from_json(field(j, "basis"));
  ConstraintSet set = set_from_json(field(j, "set"));
  const json& cj = field(j, "coefficients");
  if (!cj.is_array()) throw ConfigError("coefficients must be an array");
  Eigen::VectorXd c(cj.size());
  for (std::size_t i = 0; i < cj.size(); ++i)
    c(static_cast<Eigen::Index>(i)) = cj[i].is_string()
                                          ? parse_double(cj[i].get<std::string>())
                                          : cj[i].get<double>();
  if (c.size() != basis.size())
    throw ConfigError("coefficient count does not match the basis size");
  const json& aj = field(j, "alpha");
  const double alpha = aj.is_string() ? parse_double(aj.get<std::string>()) : aj.get<double>();
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (set.dimension() != basis.state_dimension())
    throw ConfigError("model set and basis dimensions differ");

  ModelMetadata m;
  const json meta = j.value("metadata", json::object());
  auto opt_double = [&](const char* key) -> std::optional<double> {
    if (!meta.contains(key)) return std::nullopt;
    const json& v = meta.at(key);
    return v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>();
  };
  m.training_pairs = meta.value("training_pairs", 0);
  m.validation_pairs = meta.value("validation_pairs", 0);
  m.artificial_points = meta.value("artificial_points", 0);
  m.data_seed = meta.value("data_seed", std::uint64_t{0});
  m.artificial_seed = meta.value("artificial_seed", std::uint64_t{0});
  if (meta.contains("centers_seed")) m.centers_seed = meta.at("centers_seed").get<std::uint64_t>();
  m.integration_method = meta.value("integration_method", std::string());
  m.integration_samples = meta.value("integration_samples", 0);
  m.integration_seed = meta.value("integration_seed", std::uint64_t{0});
  m.integration_error = meta.value("integration_error", 0.0);
  m.artificial_condition = meta.value("artificial_condition", 0.0);
  m.solver = meta.value("solver", std::string());
  m.solver_status = meta.value("solver_status", std::string());
  m.solver_iterations = meta.value("solver_iterations", 0);
  m.objective = meta.value("objective", 0.0);
  m.max_constraint_violation = meta.value("max_constraint_violation", 0.0);
  m.duality_gap = meta.value("duality_gap", 0.0);
  m.e_bar = opt_double("e_bar");
  m.conservative_threshold = opt_double("conservative_threshold");
  m.lipschitz_estimate = opt_double("lipschitz_estimate");
  return ValueModel{std::move(basis), std::move(c), alpha, std::move(set), std::move(m)};
}

json to_json(const MetricsReport& r) {
  return {{"volume_error_pct", r.volume_error_pct},
          {"misclassification_pct", r.misclassification_pct},
          {"volume_error_se", r.volume_error_se},
          {"misclassification_se", r.misclassification_se},
          {"samples", r.samples},
          {"horizon", r.horizon},
          {"seed", r.seed},
          {"oracle_positive", r.oracle_positive},
          {"false_inside", r.false_inside},
          {"false_outside", r.false_outside}};
}

}  // namespace invset
