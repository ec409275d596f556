#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "rigidflow/coupling.hpp"
#include "rigidflow/diagnostics.hpp"
#include "rigidflow/scenario.hpp"

namespace rigidflow {

// Everything derived from a scenario before time stepping starts.
class Simulation {
 public:
  explicit Simulation(const Scenario& sc);

  const Scenario& scenario() const { return sc_; }
  const Mesh& mesh() const { return *mesh_; }
  const FluidSolver& solver() const { return *solver_; }
  const CoupledSolver& coupler() const { return *coupler_; }
  const BodyProps& props() const { return props_; }
  // Time derivatives at t = 0 up to order max(1, fluid.compat_order).
  const CompatibilityDerivatives& compat() const { return compat_; }
  CoupledState initial_state() const;
  // 0.8 of the CFL limit of the initial state, or run.dt when set.
  double default_dt() const;

 private:
  Scenario sc_;
  std::unique_ptr<Mesh> mesh_;
  BodyProps props_;
  CompatibilityDerivatives compat_;
  std::unique_ptr<FluidSolver> solver_;
  std::unique_ptr<CoupledSolver> coupler_;
  FluidField U0_;
};

struct SeriesRow {
  double t = 0.0;
  double E0 = 0.0, E1 = 0.0;
  double bc_mismatch = 0.0, vort_res = 0.0, ent_res = 0.0;
  SolidVelocity theta;
  Vec3 h = Vec3::Zero();
  int picard_iters = 0;
};

struct RunOptions {
  std::string out_dir;  // empty: no files
  double dt = 0.0;      // overrides the scenario step when positive
};

struct Trajectory {
  std::vector<SeriesRow> rows;
  std::vector<double> compat_res;
  CoupledState final_state;
  double dt = 0.0;
  long steps = 0;
};

Trajectory run_simulation(const Simulation& sim, const RunOptions& opts = {});

// L2 distance between two fields on the same mesh, volume weighted.
double field_distance(const Mesh& mesh, const FluidField& a, const FluidField& b);

struct SweepEntry {
  double eps = 0.0;
  double final_E0 = 0.0;
  double max_bc_mismatch = 0.0;
  double distance_to_zero = 0.0;
};
struct SweepResult {
  std::vector<SweepEntry> entries;  // the requested values, then eps = 0
  double fitted_exponent = 0.0;     // slope of log distance against log eps
  double dt = 0.0;
};
SweepResult sweep_eps(const Scenario& sc, const std::string& out_dir = "");

struct RefineEntry {
  int n_r = 0, n_theta = 0, n_phi = 0;
  double dt = 0.0;
  double error = 0.0;  // against the finest level, on this level's nodes
  double order = 0.0;  // log2 of the error ratio to the next finer level
};
std::vector<RefineEntry> refine_study(const Scenario& sc, const std::string& out_dir = "");

// Samples a field from a mesh refined by 2^levels onto `coarse`.
FluidField restrict_field(const Mesh& fine, const FluidField& f, const Mesh& coarse);

struct CompatReport {
  std::vector<double> residuals;
  double threshold = 0.0;
  bool pass = false;
};
CompatReport check_compat(const Scenario& sc);

void write_series_header(std::ostream& os, int dim);
void write_series_row(std::ostream& os, const SeriesRow& r, int dim);
// Raw little-endian float64 snapshot plus a text sidecar; returns the stem.
std::string write_snapshot(const std::string& dir, long index, const Mesh& mesh,
                           const CoupledState& s);

}  // namespace rigidflow
