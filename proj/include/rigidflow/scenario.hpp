#pragma once

#include <array>
#include <string>
#include <vector>

#include "rigidflow/coupling.hpp"
#include "rigidflow/eos.hpp"
#include "rigidflow/fluid.hpp"
#include "rigidflow/geometry.hpp"

namespace rigidflow {

using Triple = std::array<double, 3>;

// Every field mirrors one key of the scenario file; see README for the
// schema. Vectors are stored as plain triples so scenarios compare exactly.
struct Scenario {
  struct Geometry {
    int dim = 2;
    double r_s = 0.0;
    double R_o = 0.0;
    double R0 = 0.5;
    Triple offset{0.0, 0.0, 0.0};
    int n_r = 16;
    int n_theta = 32;
    int n_phi = 0;
    bool operator==(const Geometry&) const = default;
  } geometry;

  struct Eos {
    double gamma = 0.0;
    double kappa = 1.0;
    double c_v = 1.0;
    double p_min = 1e-3;
    double p_max = 1e3;
    double s_min = -50.0;
    double s_max = 50.0;
    bool operator==(const Eos&) const = default;
  } eos;

  struct Initial {
    std::string preset;
    double p0 = 1.0;
    double s0 = 0.0;
    double amplitude = 1e-3;
    double width = 0.2;
    double center = -1.0;  // pulse radius; negative means mid-gap
    Triple direction{1.0, 0.0, 0.0};
    double spin_rate = 1.0;
    bool operator==(const Initial&) const = default;
  } initial;

  struct Solid {
    double rho_S = 1.0;
    Triple l0{0.0, 0.0, 0.0};
    Triple omega0{0.0, 0.0, 0.0};
    bool operator==(const Solid&) const = default;
  } solid;

  struct Fluid {
    double cfl = 0.4;
    double eps = 0.0;
    int compat_order = 1;
    std::string limiter = "llf";
    bool operator==(const Fluid&) const = default;
  } fluid;

  struct Coupling {
    std::string mode = "subiterated";
    double window = 0.05;
    double picard_tol = 1e-10;
    int picard_max = 50;
    bool operator==(const Coupling&) const = default;
  } coupling;

  struct Run {
    double t_end = 1.0;
    double dt = 0.0;  // 0 picks 0.8 of the CFL limit of the initial state
    int output_every = 1;
    int snapshot_every = 0;
    bool operator==(const Run&) const = default;
  } run;

  struct Check {
    double threshold = 1e-8;
    bool operator==(const Check&) const = default;
  } check;

  struct Sweep {
    std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    bool operator==(const Sweep&) const = default;
  } sweep;

  struct Refine {
    int levels = 3;
    bool operator==(const Refine&) const = default;
  } refine;

  bool operator==(const Scenario&) const = default;

  void validate() const;  // ValidationError / ConstructionError naming the constraint

  DomainSpec domain() const;
  Resolution resolution() const;
  EosParams eos_params() const;
  HyperbolicityBox box() const;
  FluidOptions fluid_options() const;
  CouplingConfig coupling_config() const;
  SolidVelocity initial_theta() const;
};

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);

// Initial fluid field of the scenario preset on the given mesh.
FluidField initial_field(const Scenario& s, const Mesh& mesh);

const std::vector<std::string>& preset_names();

}  // namespace rigidflow
