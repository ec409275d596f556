#include "rigidflow/coupling.hpp"

#include <cmath>
#include <sstream>

#include "rigidflow/errors.hpp"

namespace rigidflow {

namespace {

double max_norm(const SolidVelocity& a) { return a.max_abs(); }

// Quadrature of the solid right side over one step from three samples:
// value at the midpoint and at the end, both exact for quadratics.
struct StepIntegral {
  SolidVelocity half;
  SolidVelocity full;
};

StepIntegral integrate_step(const SolidVelocity& base, const SolidVelocity& g0,
                            const SolidVelocity& gh, const SolidVelocity& g1,
                            const SurfaceLoad& l0, const SurfaceLoad& l1, const BodyProps& props,
                            double dt) {
  SurfaceLoad lh;
  lh.force = 0.5 * (l0.force + l1.force);
  lh.torque = 0.5 * (l0.torque + l1.torque);
  const SolidVelocity f0 = solid_rate(g0, l0, props);
  const SolidVelocity fh = solid_rate(gh, lh, props);
  const SolidVelocity f1 = solid_rate(g1, l1, props);
  StepIntegral out;
  out.half = planar_restrict(base + (f0 * 5.0 + fh * 8.0 - f1) * (dt / 24.0), props.dim);
  out.full = planar_restrict(base + (f0 + fh * 4.0 + f1) * (dt / 6.0), props.dim);
  return out;
}

SurfaceLoad load_of(const Mesh& mesh, const FluidField& U) {
  return surface_load(mesh, solid_pressure_trace(mesh, U));
}

}  // namespace

void CouplingConfig::validate() const {
  if (!(window > 0.0)) throw ValidationError("coupling.window must be positive");
  if (!(picard_tol > 0.0)) throw ValidationError("coupling.picard_tol must be positive");
  if (picard_max < 1) throw ValidationError("coupling.picard_max must be at least 1");
}

ThetaTrace ThetaTrace::constant(double t0, double dt, int steps, const SolidVelocity& th) {
  ThetaTrace tr;
  tr.t0 = t0;
  tr.dt = dt;
  tr.samples.assign(static_cast<std::size_t>(2 * steps + 1), th);
  return tr;
}

SolidVelocity ThetaTrace::operator()(double t) const {
  const double h = 0.5 * dt;
  const double x = (t - t0) / h;
  const auto last = static_cast<double>(samples.size() - 1);
  if (x <= 0.0) return samples.front();
  if (x >= last) return samples.back();
  const double k = std::floor(x);
  const auto j = static_cast<std::size_t>(k);
  const double f = x - k;
  // sample times are hit exactly so stage evaluations see the stored values
  if (f < 1e-9) return samples[j];
  if (f > 1.0 - 1e-9) return samples[j + 1];
  return samples[j] * (1.0 - f) + samples[j + 1] * f;
}

double ThetaTrace::distance(const ThetaTrace& other) const {
  double d = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j)
    d = std::max(d, max_norm(samples[j] - other.samples[j]));
  return d;
}

CoupledSolver::CoupledSolver(const FluidSolver& fluid, const BodyProps& props, CouplingConfig cfg)
    : fluid_(&fluid), props_(props), cfg_(cfg) {
  cfg_.validate();
  props_.validate();
}

WindowResult CoupledSolver::picard_update(const CoupledState& s, const ThetaTrace& guess) const {
  const Mesh& mesh = fluid_->mesh();
  const double mismatch = max_norm(guess.samples.front() - s.theta);
  if (mismatch > 0.0 || guess.t0 != s.t) {
    std::ostringstream os;
    os << "guess does not start from the window state: |theta(t0) - theta0| = " << mismatch
       << ", guess t0 = " << guess.t0 << ", state t = " << s.t;
    throw ContinuityError(os.str());
  }
  const int steps = guess.steps();
  const double dt = guess.dt;
  const ThetaSampler sampler = [&guess](double t) { return guess(t); };

  WindowResult out;
  out.lambda.t0 = s.t;
  out.lambda.dt = dt;
  out.lambda.samples.resize(guess.samples.size());
  out.lambda.samples[0] = s.theta;
  out.loads.push_back(load_of(mesh, s.U));

  FluidStepResult cur{s.U, s.conf};
  for (int i = 0; i < steps; ++i) {
    const double t = s.t + i * dt;
    cur = fluid_->step(cur.U, sampler, cur.conf, t, dt);
    out.loads.push_back(load_of(mesh, cur.U));
    const std::size_t j = static_cast<std::size_t>(2 * i);
    const StepIntegral si =
        integrate_step(out.lambda.samples[j], guess.samples[j], guess.samples[j + 1],
                       guess.samples[j + 2], out.loads[i], out.loads[i + 1], props_, dt);
    out.lambda.samples[j + 1] = si.half;
    out.lambda.samples[j + 2] = si.full;
  }
  out.end.t = s.t + steps * dt;
  out.end.U = std::move(cur.U);
  out.end.conf = std::move(cur.conf);
  out.end.theta = out.lambda.samples.back();
  return out;
}

AdvanceResult CoupledSolver::solve_window(const CoupledState& s, double dt, int steps) const {
  ThetaTrace guess = ThetaTrace::constant(s.t, dt, steps, s.theta);
  double dist = 0.0;
  for (int k = 1; k <= cfg_.picard_max; ++k) {
    WindowResult r = picard_update(s, guess);
    dist = r.lambda.distance(guess);
    if (dist < cfg_.picard_tol) {
      return AdvanceResult{std::move(r.end), steps, k, dist};
    }
    guess = std::move(r.lambda);
  }
  std::ostringstream os;
  os << "Picard iteration did not converge within " << cfg_.picard_max
     << " iterations at t=" << s.t << " (window of " << steps << " steps, last distance " << dist
     << ")";
  throw NonConvergenceError(os.str(), cfg_.picard_max, dist);
}

AdvanceResult CoupledSolver::subiterated_step(const CoupledState& s, double dt) const {
  // A one-step window: the same map, so both modes share their fixed point.
  return solve_window(s, dt, 1);
}

AdvanceResult CoupledSolver::advance(const CoupledState& s, double dt, double t_stop) const {
  if (cfg_.mode == CouplingMode::subiterated_step) return subiterated_step(s, dt);
  int steps = std::max(1, static_cast<int>(std::lround(cfg_.window / dt)));
  const double room = std::floor((t_stop - s.t) / dt + 1e-9);
  if (room < steps) steps = std::max(1, static_cast<int>(room));
  return solve_window(s, dt, steps);
}

}  // namespace rigidflow
