#include "rigidflow/solid.hpp"

#include <sstream>

#include "rigidflow/errors.hpp"

namespace rigidflow {

void BodyProps::validate() const {
  if (!(body_mass > 0.0)) throw ValidationError("body mass must be positive");
  if (!J0.isApprox(J0.transpose(), 1e-12)) throw ValidationError("J0 must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(J0);
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw ValidationError("J0 must be positive definite");
}

BodyProps mass_properties(double rho_S, const DomainSpec& spec) {
  if (!(rho_S > 0.0)) {
    std::ostringstream os;
    os << "solid.rho_S must be positive, got " << rho_S;
    throw ValidationError(os.str());
  }
  BodyProps b;
  b.dim = spec.dim;
  b.rho_S = rho_S;
  const double r = spec.r_s;
  if (spec.dim == 2) {
    b.body_mass = rho_S * kPi * r * r;
    b.J0 = (0.5 * rho_S * kPi * r * r * r * r) * Mat3::Identity();
  } else {
    b.body_mass = 4.0 / 3.0 * rho_S * kPi * r * r * r;
    b.J0 = (0.4 * b.body_mass * r * r) * Mat3::Identity();
  }
  return b;
}

SurfaceLoad surface_load(const Mesh& mesh, std::span<const double> p_trace, const Vec3& origin) {
  const BoundaryPatch& patch = mesh.solid();
  if (p_trace.size() != patch.size()) {
    std::ostringstream os;
    os << "pressure trace has " << p_trace.size() << " entries, SOLID patch has "
       << patch.size();
    throw ShapeError(os.str());
  }
  SurfaceLoad load;
  for (std::size_t f = 0; f < patch.size(); ++f) {
    const Vec3 pn = (patch.weight[f] * p_trace[f]) * patch.normal[f];
    load.force += pn;
    load.torque += (patch.center[f] - origin).cross(pn);
  }
  return load;
}

SolidVelocity solid_rate(const SolidVelocity& theta, const SurfaceLoad& load,
                         const BodyProps& props) {
  SolidVelocity r;
  r.l = theta.l.cross(theta.omega) + load.force / props.body_mass;
  r.omega = props.J0.ldlt().solve((props.J0 * theta.omega).cross(theta.omega) + load.torque);
  return planar_restrict(r, props.dim);
}

SolidVelocity advance_solid(const SolidVelocity& theta, const LoadSampler& load,
                            const BodyProps& props, double t, double dt) {
  const SurfaceLoad l0 = load(t);
  const SurfaceLoad lh = load(t + 0.5 * dt);
  const SurfaceLoad l1 = load(t + dt);
  const SolidVelocity k1 = solid_rate(theta, l0, props);
  const SolidVelocity k2 = solid_rate(theta + k1 * (0.5 * dt), lh, props);
  const SolidVelocity k3 = solid_rate(theta + k2 * (0.5 * dt), lh, props);
  const SolidVelocity k4 = solid_rate(theta + k3 * dt, l1, props);
  return planar_restrict(theta + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0), props.dim);
}

}  // namespace rigidflow
