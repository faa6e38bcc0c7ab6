#pragma once

#include <cstdint>
#include <string>

namespace invset {

/// Numerator of the epsilon-net sample count. `proof` uses n log(2D/eps);
/// `printed` uses the n eps/(2D) term kept for comparison.
enum class NetFormula { proof, printed };
std::string to_string(NetFormula formula);

/// K = ceil((log(1/delta) + n log(1/ratio)) / log(1/(1 - ratio^n))), at
/// least 1. Shared by both sample bounds; ratio must lie in (0, 1).
std::int64_t samples_for_ratio(double ratio, double delta, int n);

/// Uniform samples needed for an eps-net of a set with diameter D with
/// probability at least 1 - delta.
std::int64_t epsilon_net_samples(double epsilon, double delta, double diameter,
                                 int n, NetFormula formula = NetFormula::proof);

struct BoundInputs {
  double epsilon = 0.0;
  double delta = 0.0;
  int n = 1;
  double diameter = 0.0;
  double alpha = 0.0;
  double lipschitz_f = 0.0;
  /// User-supplied surrogate for the Lipschitz constant of the Bellman
  /// residual over the feasible set.
  double lipschitz_residual = 0.0;
};

struct SampleBound {
  double zeta = 0.0;
  std::int64_t samples = 0;
};

/// zeta = eps (1 - alpha) / (2 D L), K from samples_for_ratio(zeta).
SampleBound lp_samples(const BoundInputs& inputs);

struct VolumeBound {
  double value = 0.0;
  /// d >= 2C / ((1 - alpha)(1 - alpha L_f)).
  bool valid = false;
};

/// 4C/((1-a)(1-a L_f)) / (sqrt(d) + eps d) + eps / (1/sqrt(d) + eps) + g.
VolumeBound volume_error_bound(double degree, double alpha, double lipschitz_f,
                               double constant, double epsilon,
                               double g_value);

}  // namespace invset
