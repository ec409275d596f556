#pragma once

#include <cmath>

namespace rigidflow {

// Ideal gas p = kappa * exp(s / c_v) * rho^gamma.
struct EosParams {
  double gamma = 1.4;
  double kappa = 1.0;
  double c_v = 1.0;

  void validate() const;  // throws ValidationError
};

struct ThermoPair {
  double p = 1.0;
  double s = 0.0;
};

// Axis-aligned admissible region in the (p, s) plane.
struct HyperbolicityBox {
  double p_min = 1e-3;
  double p_max = 1e3;
  double s_min = -50.0;
  double s_max = 50.0;

  void validate() const;
  bool contains(const ThermoPair& tp) const {
    return tp.p >= p_min && tp.p <= p_max && tp.s >= s_min && tp.s <= s_max;
  }
};

struct SymmetrizerCoefficients {
  double alpha;  // rho c^2
  double eta;    // rho
};

double density(const ThermoPair& tp, const EosParams& eos);
double sound_speed(const ThermoPair& tp, const EosParams& eos);

// Throws RegionError when tp lies outside the box.
SymmetrizerCoefficients symmetrizer_coefficients(const ThermoPair& tp, const EosParams& eos,
                                                 const HyperbolicityBox& box);

// Unchecked variant for inner loops; the caller guarantees tp is in the box.
inline SymmetrizerCoefficients symmetrizer_unchecked(const ThermoPair& tp, const EosParams& eos) {
  const double rho = std::pow(tp.p * std::exp(-tp.s / eos.c_v) / eos.kappa, 1.0 / eos.gamma);
  return {eos.gamma * tp.p, rho};
}

}  // namespace rigidflow
