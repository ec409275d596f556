#include <cmath>
#include <random>

#include "doctest.h"
#include "rigidflow/eos.hpp"
#include "rigidflow/errors.hpp"

using namespace rigidflow;

namespace {

// Forward law written independently of the library: p = kappa e^{s/c_v} rho^gamma,
// with the power evaluated through exp/log.
double forward_pressure(double rho, double s, const EosParams& e) {
  return e.kappa * std::exp(s / e.c_v) * std::exp(e.gamma * std::log(rho));
}

}  // namespace

TEST_CASE("density examples") {
  const EosParams eos;
  CHECK(density({1.0, 0.0}, eos) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(density({0.0, 0.0}, eos), DomainError);
  CHECK_THROWS_AS(density({-2.0, 0.0}, eos), DomainError);
  const double p2 = forward_pressure(2.0, 0.0, eos);
  CHECK(p2 == doctest::Approx(2.6390158).epsilon(1e-7));
  CHECK(density({p2, 0.0}, eos) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("sound speed examples") {
  EosParams eos;
  CHECK(sound_speed({1.0, 0.0}, eos) == doctest::Approx(std::sqrt(1.4)).epsilon(1e-14));
  CHECK(sound_speed({1.0, 0.0}, eos) == doctest::Approx(1.1832160).epsilon(1e-7));
  const double ratio = sound_speed({4.0, 0.3}, eos) / sound_speed({1.0, 0.3}, eos);
  CHECK(ratio == doctest::Approx(std::pow(4.0, (1.0 - 1.0 / eos.gamma) / 2.0)).epsilon(1e-13));
  // gamma = 1 sits outside the validated parameter range but the formula is
  // still the isothermal limit.
  EosParams iso;
  iso.gamma = 1.0;
  CHECK(sound_speed({1.0, 0.0}, iso) == doctest::Approx(1.0));
}

TEST_CASE("symmetrizer coefficients") {
  const EosParams eos;
  const HyperbolicityBox box;
  const auto sc = symmetrizer_coefficients({1.0, 0.0}, eos, box);
  CHECK(sc.alpha == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(sc.eta == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(symmetrizer_coefficients({box.p_max * 2.0, 0.0}, eos, box), RegionError);
  try {
    symmetrizer_coefficients({1.0, box.s_max + 1.0}, eos, box);
    FAIL("expected RegionError");
  } catch (const RegionError& e) {
    CHECK(e.s == box.s_max + 1.0);
    CHECK(e.p_min == box.p_min);
  }

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> pd(0.1, 10.0), sd(-2.0, 2.0);
  for (int i = 0; i < 10; ++i) {
    const ThermoPair tp{pd(rng), sd(rng)};
    const auto c = symmetrizer_coefficients(tp, eos, box);
    const double cs = sound_speed(tp, eos);
    CHECK(std::abs(c.alpha / c.eta - cs * cs) / (cs * cs) < 1e-12);
  }
}

TEST_CASE("eos properties on a grid") {
  const EosParams eos{1.67, 2.0, 0.7};
  double prev = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double p = 0.05 + 0.1 * i;
    const double rho = density({p, 0.4}, eos);
    CHECK(rho > prev);
    prev = rho;
    CHECK(sound_speed({p, 0.4}, eos) > 0.0);
    CHECK(std::abs(forward_pressure(rho, 0.4, eos) - p) / p < 1e-12);
  }
}

TEST_CASE("parameter validation") {
  EosParams e;
  e.gamma = 1.0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
  HyperbolicityBox b;
  b.p_min = 0.0;
  CHECK_THROWS_AS(b.validate(), ValidationError);
  b = HyperbolicityBox{};
  b.s_min = b.s_max;
  CHECK_THROWS_AS(b.validate(), ValidationError);
}
