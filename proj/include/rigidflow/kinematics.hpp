#pragma once

#include <functional>
#include <vector>

#include "rigidflow/geometry.hpp"
#include "rigidflow/types.hpp"

namespace rigidflow {

// Body-frame velocities. Planar problems use l.z() = 0 and omega = (0, 0, w).
struct SolidVelocity {
  Vec3 l = Vec3::Zero();
  Vec3 omega = Vec3::Zero();

  bool is_zero() const { return l.isZero(0.0) && omega.isZero(0.0); }
  double max_abs() const { return std::max(l.cwiseAbs().maxCoeff(), omega.cwiseAbs().maxCoeff()); }
  SolidVelocity operator+(const SolidVelocity& o) const { return {l + o.l, omega + o.omega}; }
  SolidVelocity operator-(const SolidVelocity& o) const { return {l - o.l, omega - o.omega}; }
  SolidVelocity operator*(double a) const { return {a * l, a * omega}; }
};

using ThetaSampler = std::function<SolidVelocity(double)>;

// Drops the components that a planar problem does not carry.
SolidVelocity planar_restrict(const SolidVelocity& th, int dim);

struct Configuration {
  Vec3 h = Vec3::Zero();
  Mat3 Q = Mat3::Identity();
  std::vector<Vec3> phi;
  std::vector<Mat3> J1;
  std::vector<Tensor3> J2;  // J2[i](j, k) = d^2 phi_i / dx_j dx_k

  static Configuration identity(const Mesh& mesh);
};

struct ConfigurationRate {
  Vec3 dh;
  Mat3 dQ;
  std::vector<Vec3> dphi;
  std::vector<Mat3> dJ1;
  std::vector<Tensor3> dJ2;
};

// V and its first two derivatives at y for the rigid field carried by
// (theta, h, Q). grad(i, j) = dV_i/dy_j, hess[i](j, k) = d^2 V_i/dy_j dy_k.
struct VelocityDerivatives {
  Vec3 V;
  Mat3 grad;
  Tensor3 hess;
};

Vec3 transport_velocity(const DomainSpec& spec, const SolidVelocity& theta, const Vec3& h,
                        const Mat3& Q, const Vec3& y);
Vec3 transport_velocity(const DomainSpec& spec, const SolidVelocity& theta,
                        const Configuration& conf, const Vec3& y);
// The Hessian is left unset when with_hessian is false.
VelocityDerivatives transport_velocity_derivatives(const DomainSpec& spec,
                                                   const SolidVelocity& theta, const Vec3& h,
                                                   const Mat3& Q, const Vec3& y,
                                                   bool with_hessian = true);

// l + omega x x for a point of the reference solid surface.
Vec3 solid_boundary_velocity(const SolidVelocity& theta, const Vec3& x);
// Same, but checks that `node` lies on the SOLID patch (DomainError if not).
Vec3 solid_boundary_velocity(const Mesh& mesh, const SolidVelocity& theta, std::size_t node);

ConfigurationRate configuration_rate(const Mesh& mesh, const SolidVelocity& theta,
                                     const Configuration& conf);

constexpr double kDefaultDetFloor = 1e-3;

// One RK4 step of the configuration ODEs. When `midpoint` is non-null it
// receives a third-order Hermite estimate of the configuration at t + dt/2.
Configuration advance_configuration(const Mesh& mesh, const Configuration& conf,
                                    const ThetaSampler& theta, double t, double dt,
                                    Configuration* midpoint = nullptr,
                                    double det_floor = kDefaultDetFloor);

// Nearest rotation (polar factor) of a nearly orthogonal matrix.
Mat3 project_to_rotation(const Mat3& q);

Mat3 metric(const Configuration& conf, std::size_t node);

struct ConfigurationResiduals {
  double orthogonality;
  double gradient_defect;
  double boundary_metric;
};

ConfigurationResiduals configuration_residuals(const Mesh& mesh, const Configuration& conf);

}  // namespace rigidflow
