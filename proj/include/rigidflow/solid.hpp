#pragma once

#include <functional>
#include <span>

#include "rigidflow/geometry.hpp"
#include "rigidflow/kinematics.hpp"

namespace rigidflow {

// In 2D the inertia is a scalar; it is stored as J0 = J * I so that the
// planar angular velocity (0, 0, w) needs no special casing.
struct BodyProps {
  int dim = 2;
  double body_mass = 1.0;
  Mat3 J0 = Mat3::Identity();
  double rho_S = 1.0;

  double inertia_scalar() const { return J0(2, 2); }
  void validate() const;
};

BodyProps mass_properties(double rho_S, const DomainSpec& spec);

struct SurfaceLoad {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

using LoadSampler = std::function<SurfaceLoad(double)>;

// Force and torque (about `origin`) of the pressure trace on the SOLID patch.
SurfaceLoad surface_load(const Mesh& mesh, std::span<const double> p_trace,
                         const Vec3& origin = Vec3::Zero());

// Right side of the body-frame equations for a given load.
SolidVelocity solid_rate(const SolidVelocity& theta, const SurfaceLoad& load,
                         const BodyProps& props);

// One RK4 step over [t, t + dt].
SolidVelocity advance_solid(const SolidVelocity& theta, const LoadSampler& load,
                            const BodyProps& props, double t, double dt);

}  // namespace rigidflow
