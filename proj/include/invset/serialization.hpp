#pragma once

#include <json.hpp>

#include "invset/basis.hpp"
#include "invset/dynamics.hpp"
#include "invset/geometry.hpp"
#include "invset/invariant.hpp"
#include "invset/metrics.hpp"

namespace invset {

using json = nlohmann::json;

json to_json(const ConstraintSet& set);
ConstraintSet set_from_json(const json& j);

json to_json(const BasisSpec& basis);
BasisSpec basis_from_json(const json& j);

json to_json(const SystemSpec& system);
SystemSpec system_from_json(const json& j);

json to_json(const ValueModel& model);
ValueModel model_from_json(const json& j);

json to_json(const MetricsReport& report);

/// %.17g, the shortest form guaranteed to round-trip a double.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace invset
