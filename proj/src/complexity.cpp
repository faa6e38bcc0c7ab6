#include "invset/complexity.hpp"

#include <cmath>
#include <limits>

#include "invset/errors.hpp"

namespace invset {

std::string to_string(NetFormula formula) {
  return formula == NetFormula::proof ? "proof" : "printed";
}

namespace {

std::int64_t ceil_count(double k) {
  if (!std::isfinite(k) || k > 9.0e18)
    throw InputError("sample bound overflows a 64-bit count");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(k)));
}

void check_common(double delta, int n) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
  if (n < 1) throw InputError("dimension must be >= 1");
}

// log(1 / (1 - ratio^n)) without cancellation for small ratios.
double log_miss(double ratio, int n) { return -std::log1p(-std::pow(ratio, n)); }

}  // namespace

std::int64_t samples_for_ratio(double ratio, double delta, int n) {
  check_common(delta, n);
  if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("ratio must lie in (0, 1)");
  return ceil_count((std::log(1.0 / delta) + n * std::log(1.0 / ratio)) /
                    log_miss(ratio, n));
}

std::int64_t epsilon_net_samples(double epsilon, double delta, double diameter,
                                 int n, NetFormula formula) {
  check_common(delta, n);
  if (!(diameter > 0.0)) throw InputError("diameter must be positive");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (epsilon >= 2.0 * diameter)
    throw InputError("epsilon >= 2D: the net is trivial and the bound degenerates");
  const double ratio = epsilon / (2.0 * diameter);
  if (formula == NetFormula::proof) return samples_for_ratio(ratio, delta, n);
  return ceil_count((std::log(1.0 / delta) + n * ratio) / log_miss(ratio, n));
}

SampleBound lp_samples(const BoundInputs& in) {
  check_common(in.delta, in.n);
  if (!(in.epsilon > 0.0) || !(in.diameter > 0.0) || !(in.lipschitz_f > 0.0) ||
      !(in.lipschitz_residual > 0.0))
    throw InputError("epsilon, D, L_f and L must be positive");
  if (!(in.alpha > 0.0 && in.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (!(in.alpha * in.lipschitz_f < 1.0))
    throw InputError("the sample bound requires alpha * L_f < 1");
  SampleBound out;
  out.zeta = in.epsilon * (1.0 - in.alpha) / (2.0 * in.diameter * in.lipschitz_residual);
  if (!(out.zeta < 1.0))
    throw InputError("zeta >= 1: decrease epsilon or increase L");
  out.samples = samples_for_ratio(out.zeta, in.delta, in.n);
  return out;
}

VolumeBound volume_error_bound(double degree, double alpha, double lipschitz_f,
                               double constant, double epsilon, double g_value) {
  if (!(degree > 0.0)) throw InputError("degree must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (!(lipschitz_f > 0.0) || !(alpha * lipschitz_f < 1.0))
    throw InputError("the volume bound requires L_f > 0 and alpha * L_f < 1");
  if (constant < 0.0 || epsilon < 0.0 || g_value < 0.0)
    throw InputError("C, epsilon and g must be non-negative");
  const double scale = (1.0 - alpha) * (1.0 - alpha * lipschitz_f);
  const double root = std::sqrt(degree);
  VolumeBound out;
  out.value = 4.0 * constant / scale / (root + epsilon * degree) +
              epsilon / (1.0 / root + epsilon) + g_value;
  out.valid = degree >= 2.0 * constant / scale;
  return out;
}

}  // namespace invset
