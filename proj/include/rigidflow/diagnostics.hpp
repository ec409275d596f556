#pragma once

#include <vector>

#include "rigidflow/fluid.hpp"
#include "rigidflow/solid.hpp"

namespace rigidflow {

// One stored time level of the coupled state.
struct TimeLevel {
  double t = 0.0;
  FluidField U;
  SolidVelocity theta;
  Configuration conf;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double E0 = 0.0;
  double E1 = 0.0;
  double bc_mismatch = 0.0;
  double vort_res = 0.0;
  double ent_res = 0.0;
  std::vector<double> compat_res;
};

// Symmetrized energy: volume integral of p^2/alpha + eta M u.u + s^2 plus the
// solid kinetic form m|l|^2 + J0 w.w.
double conormal_energy0(const FluidSolver& solver, const BodyProps& props, const TimeLevel& cur);

// First-order conormal energy. The time derivative either comes from a
// supplied field (dUdt) or from a backward difference against `prev`; the
// overload taking a pointer throws InsufficientHistoryError when it is null.
double conormal_energy1(const FluidSolver& solver, const BodyProps& props, const TimeLevel& cur,
                        const FluidField& dUdt);
double conormal_energy1(const FluidSolver& solver, const BodyProps& props, const TimeLevel& cur,
                        const TimeLevel* prev);
// order 0 or 1; anything else is an UnsupportedOrderError.
double conormal_energy(const FluidSolver& solver, const BodyProps& props, const TimeLevel& cur,
                       const TimeLevel* prev, int order);

// Residual of the transport equation for Curl(M u) over the interior nodes
// (one-cell margin at each wall), L2 with volume weights. The two-level form
// uses a trapezoidal average; the single-level form takes dU/dt directly.
double vorticity_residual(const FluidSolver& solver, const TimeLevel* prev, const TimeLevel& cur);
double vorticity_residual(const FluidSolver& solver, const TimeLevel& cur, const FluidField& dUdt);

// Residual of ds/dt + ((u - u_S + eps nu).grad) s - F_s, L2 over all nodes.
double entropy_residual(const FluidSolver& solver, const TimeLevel* prev, const TimeLevel& cur);
double entropy_residual(const FluidSolver& solver, const TimeLevel& cur, const FluidField& dUdt);

// Max over boundary faces of the order-k wall defect for k = 0..K:
// I^k_u . n - (I^k_l + I^k_w x x) . n on the solid, I^k_u . n on the outer wall.
std::vector<double> compatibility_residual(const Mesh& mesh, const CompatibilityDerivatives& cd);

}  // namespace rigidflow
