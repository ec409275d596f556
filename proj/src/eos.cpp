#include "rigidflow/eos.hpp"

#include <cmath>
#include <sstream>

#include "rigidflow/errors.hpp"

namespace rigidflow {

namespace {

void require_positive_pressure(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    std::ostringstream os;
    os << "pressure must be positive and finite, got p=" << p;
    throw DomainError(os.str());
  }
}

}  // namespace

void EosParams::validate() const {
  if (!(gamma > 1.0)) throw ValidationError("eos.gamma must exceed 1");
  if (!(kappa > 0.0)) throw ValidationError("eos.kappa must be positive");
  if (!(c_v > 0.0)) throw ValidationError("eos.c_v must be positive");
}

void HyperbolicityBox::validate() const {
  if (!(p_min > 0.0)) throw ValidationError("eos.p_min must be positive");
  if (!(p_min < p_max)) throw ValidationError("eos.p_min must be below eos.p_max");
  if (!(s_min < s_max)) throw ValidationError("eos.s_min must be below eos.s_max");
}

double density(const ThermoPair& tp, const EosParams& eos) {
  require_positive_pressure(tp.p);
  return std::pow(tp.p * std::exp(-tp.s / eos.c_v) / eos.kappa, 1.0 / eos.gamma);
}

double sound_speed(const ThermoPair& tp, const EosParams& eos) {
  return std::sqrt(eos.gamma * tp.p / density(tp, eos));
}

SymmetrizerCoefficients symmetrizer_coefficients(const ThermoPair& tp, const EosParams& eos,
                                                 const HyperbolicityBox& box) {
  if (!box.contains(tp)) {
    std::ostringstream os;
    os << "state (p=" << tp.p << ", s=" << tp.s << ") outside hyperbolicity box [" << box.p_min
       << ", " << box.p_max << "] x [" << box.s_min << ", " << box.s_max << "]";
    throw RegionError(os.str(), tp.p, tp.s, box.p_min, box.p_max, box.s_min, box.s_max);
  }
  const double rho = density(tp, eos);
  return {eos.gamma * tp.p, rho};
}

}  // namespace rigidflow
