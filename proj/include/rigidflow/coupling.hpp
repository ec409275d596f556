#pragma once

#include <vector>

#include "rigidflow/fluid.hpp"
#include "rigidflow/solid.hpp"

namespace rigidflow {

enum class CouplingMode { subiterated_step, partitioned_window };

struct CouplingConfig {
  CouplingMode mode = CouplingMode::subiterated_step;
  double window = 0.05;
  double picard_tol = 1e-10;
  int picard_max = 50;

  void validate() const;  // throws ValidationError
};

struct CoupledState {
  double t = 0.0;
  FluidField U;
  SolidVelocity theta;
  Configuration conf;
};

// Solid velocities sampled every half step on [t0, t0 + steps*dt]; between
// samples the trace is linear.
struct ThetaTrace {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<SolidVelocity> samples;  // size 2*steps + 1

  static ThetaTrace constant(double t0, double dt, int steps, const SolidVelocity& th);
  int steps() const { return static_cast<int>(samples.size() / 2); }
  SolidVelocity operator()(double t) const;
  // max-norm distance over the samples
  double distance(const ThetaTrace& other) const;
};

struct WindowResult {
  ThetaTrace lambda;              // the map applied to the guess
  CoupledState end;               // fluid and configuration driven by the guess
  std::vector<SurfaceLoad> loads;  // load at every step boundary
};

struct AdvanceResult {
  CoupledState state;
  int steps = 0;
  int picard_iters = 0;
  double last_distance = 0.0;
};

class CoupledSolver {
 public:
  CoupledSolver(const FluidSolver& fluid, const BodyProps& props, CouplingConfig cfg);

  const FluidSolver& fluid() const { return *fluid_; }
  const BodyProps& props() const { return props_; }
  const CouplingConfig& config() const { return cfg_; }

  // One application of the fixed-point map: evolve the fluid with the solid
  // motion prescribed by `guess`, then integrate the solid equations with the
  // recorded loads and the guess in the gyroscopic terms.
  WindowResult picard_update(const CoupledState& s, const ThetaTrace& guess) const;

  // Iterates the map over `steps` steps of size dt until successive traces
  // agree to picard_tol.
  AdvanceResult solve_window(const CoupledState& s, double dt, int steps) const;

  // Single-step sub-iteration: the solid is frozen at its previous value for
  // the first fluid step and refined until the update stalls.
  AdvanceResult subiterated_step(const CoupledState& s, double dt) const;

  // One coupled advance in the configured mode: a single step, or a whole
  // window of round(window/dt) steps (cut short at t_stop).
  AdvanceResult advance(const CoupledState& s, double dt, double t_stop) const;

 private:
  const FluidSolver* fluid_;
  BodyProps props_;
  CouplingConfig cfg_;
};

}  // namespace rigidflow
