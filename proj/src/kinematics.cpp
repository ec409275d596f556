#include "rigidflow/kinematics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "rigidflow/errors.hpp"
#include "rigidflow/parallel.hpp"

namespace rigidflow {

namespace {

struct NodeState {
  Vec3 phi;
  Mat3 J1;
  Tensor3 J2;
};

struct StageParams {
  SolidVelocity theta;
  Vec3 h;
  Mat3 Q;
};

NodeState node_rate(const DomainSpec& spec, const StageParams& sp, const NodeState& s) {
  NodeState r;
  // beyond the cutoff band nothing moves
  if (cutoff(spec, s.phi) == 0.0) {
    r.phi.setZero();
    r.J1.setZero();
    r.J2 = zero_tensor();
    return r;
  }
  const VelocityDerivatives vd = transport_velocity_derivatives(spec, sp.theta, sp.h, sp.Q, s.phi);
  r.phi = vd.V;
  r.J1 = vd.grad * s.J1;
  const bool curved = !(vd.hess[0].isZero(0.0) && vd.hess[1].isZero(0.0) && vd.hess[2].isZero(0.0));
  for (int i = 0; i < 3; ++i) {
    if (curved)
      r.J2[i] = s.J1.transpose() * vd.hess[i] * s.J1;
    else
      r.J2[i].setZero();
    for (int l = 0; l < 3; ++l) r.J2[i] += vd.grad(i, l) * s.J2[l];
  }
  return r;
}

NodeState axpy(const NodeState& s, double a, const NodeState& r) {
  NodeState o;
  o.phi = s.phi + a * r.phi;
  o.J1 = s.J1 + a * r.J1;
  for (int i = 0; i < 3; ++i) o.J2[i] = s.J2[i] + a * r.J2[i];
  return o;
}

}  // namespace

SolidVelocity planar_restrict(const SolidVelocity& th, int dim) {
  if (dim == 3) return th;
  return {Vec3(th.l.x(), th.l.y(), 0.0), Vec3(0.0, 0.0, th.omega.z())};
}

Configuration Configuration::identity(const Mesh& mesh) {
  Configuration c;
  const std::size_t n = mesh.node_count();
  c.phi = mesh.positions();
  c.J1.assign(n, Mat3::Identity());
  c.J2.assign(n, zero_tensor());
  return c;
}

Vec3 transport_velocity(const DomainSpec& spec, const SolidVelocity& theta, const Vec3& h,
                        const Mat3& Q, const Vec3& y) {
  const double chi = cutoff(spec, y);
  if (chi == 0.0) return Vec3::Zero();
  return chi * (Q * theta.l + (Q * theta.omega).cross(y - h));
}

Vec3 transport_velocity(const DomainSpec& spec, const SolidVelocity& theta,
                        const Configuration& conf, const Vec3& y) {
  return transport_velocity(spec, theta, conf.h, conf.Q, y);
}

VelocityDerivatives transport_velocity_derivatives(const DomainSpec& spec,
                                                   const SolidVelocity& theta, const Vec3& h,
                                                   const Mat3& Q, const Vec3& y, bool with_hessian) {
  VelocityDerivatives d;
  const CutoffDerivatives cd = cutoff_derivatives(spec, y);
  if (cd.value == 0.0) {
    d.V.setZero();
    d.grad.setZero();
    d.hess = zero_tensor();
    return d;
  }
  const Mat3 W = skew(Q * theta.omega);
  const Vec3 a = Q * theta.l + W * (y - h);
  if (cd.value == 1.0 && cd.grad.isZero(0.0) && cd.hess.isZero(0.0)) {
    // inside the rigid zone the field is an exact rigid motion
    d.V = a;
    d.grad = W;
    d.hess = zero_tensor();
    return d;
  }
  d.V = cd.value * a;
  d.grad = a * cd.grad.transpose() + cd.value * W;
  if (!with_hessian) return d;
  for (int i = 0; i < 3; ++i) {
    const Vec3 wi = W.row(i).transpose();
    d.hess[i] = a(i) * cd.hess + wi * cd.grad.transpose() + cd.grad * wi.transpose();
  }
  return d;
}

Vec3 solid_boundary_velocity(const SolidVelocity& theta, const Vec3& x) {
  return theta.l + theta.omega.cross(x);
}

Vec3 solid_boundary_velocity(const Mesh& mesh, const SolidVelocity& theta, std::size_t node) {
  if (node >= mesh.node_count() || mesh.radial_index(node) != 0) {
    std::ostringstream os;
    os << "node " << node << " is not on the SOLID patch";
    throw DomainError(os.str());
  }
  return solid_boundary_velocity(theta, mesh.position(node));
}

ConfigurationRate configuration_rate(const Mesh& mesh, const SolidVelocity& theta,
                                     const Configuration& conf) {
  ConfigurationRate r;
  r.dh = conf.Q * theta.l;
  r.dQ = conf.Q * skew(theta.omega);
  const std::size_t n = mesh.node_count();
  r.dphi.resize(n);
  r.dJ1.resize(n);
  r.dJ2.resize(n);
  const StageParams sp{theta, conf.h, conf.Q};
  pool().for_each(n, [&](std::size_t node) {
    const NodeState k = node_rate(mesh.spec(), sp, {conf.phi[node], conf.J1[node], conf.J2[node]});
    r.dphi[node] = k.phi;
    r.dJ1[node] = k.J1;
    r.dJ2[node] = k.J2;
  });
  return r;
}

Mat3 project_to_rotation(const Mat3& q) {
  Eigen::JacobiSVD<Mat3> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

Configuration advance_configuration(const Mesh& mesh, const Configuration& conf,
                                    const ThetaSampler& theta, double t, double dt,
                                    Configuration* midpoint, double det_floor) {
  const int dim = mesh.dim();
  const SolidVelocity th0 = planar_restrict(theta(t), dim);
  const SolidVelocity thh = planar_restrict(theta(t + 0.5 * dt), dim);
  const SolidVelocity th1 = planar_restrict(theta(t + dt), dim);

  // With zero body velocity over the step the transport field vanishes
  // identically and every configuration rate is exactly zero.
  if (th0.is_zero() && thh.is_zero() && th1.is_zero()) {
    if (midpoint) *midpoint = conf;
    return conf;
  }

  // Scalar (h, Q) stages first; the node ODEs only read them.
  std::array<StageParams, 4> sp;
  std::array<Vec3, 4> kh;
  std::array<Mat3, 4> kQ;
  const std::array<SolidVelocity, 4> ths = {th0, thh, thh, th1};
  const std::array<double, 4> frac = {0.0, 0.5, 0.5, 1.0};
  for (int s = 0; s < 4; ++s) {
    sp[s].theta = ths[s];
    if (s == 0) {
      sp[s].h = conf.h;
      sp[s].Q = conf.Q;
    } else {
      sp[s].h = conf.h + frac[s] * dt * kh[s - 1];
      sp[s].Q = conf.Q + frac[s] * dt * kQ[s - 1];
    }
    kh[s] = sp[s].Q * ths[s].l;
    kQ[s] = sp[s].Q * skew(ths[s].omega);
  }

  Configuration out;
  out.h = conf.h + dt / 6.0 * (kh[0] + 2.0 * kh[1] + 2.0 * kh[2] + kh[3]);
  out.Q = project_to_rotation(conf.Q + dt / 6.0 * (kQ[0] + 2.0 * kQ[1] + 2.0 * kQ[2] + kQ[3]));

  const std::size_t n = mesh.node_count();
  out.phi.resize(n);
  out.J1.resize(n);
  out.J2.resize(n);
  std::vector<NodeState> k_first;
  if (midpoint) k_first.resize(n);
  const DomainSpec& spec = mesh.spec();

  pool().for_each(n, [&](std::size_t node) {
    const NodeState y0{conf.phi[node], conf.J1[node], conf.J2[node]};
    const NodeState k1 = node_rate(spec, sp[0], y0);
    const NodeState k2 = node_rate(spec, sp[1], axpy(y0, 0.5 * dt, k1));
    const NodeState k3 = node_rate(spec, sp[2], axpy(y0, 0.5 * dt, k2));
    const NodeState k4 = node_rate(spec, sp[3], axpy(y0, dt, k3));
    NodeState y1 = axpy(y0, dt / 6.0, k1);
    y1 = axpy(y1, dt / 3.0, k2);
    y1 = axpy(y1, dt / 3.0, k3);
    y1 = axpy(y1, dt / 6.0, k4);
    out.phi[node] = y1.phi;
    out.J1[node] = y1.J1;
    out.J2[node] = y1.J2;
    if (midpoint) k_first[node] = k1;
  });

  for (std::size_t node = 0; node < n; ++node) {
    const double det = out.J1[node].determinant();
    if (!(det > det_floor)) {
      std::ostringstream os;
      os << "flow-map Jacobian determinant " << det << " below floor " << det_floor
         << " at node " << node << " (t=" << t + dt << ")";
      throw DegeneracyError(os.str());
    }
  }

  if (midpoint) {
    // Cubic Hermite through both ends: y(1/2) = (y0 + y1)/2 + dt (f0 - f1)/8.
    const StageParams end{th1, out.h, out.Q};
    const Vec3 kh_end = out.Q * th1.l;
    const Mat3 kQ_end = out.Q * skew(th1.omega);
    midpoint->h = 0.5 * (conf.h + out.h) + dt / 8.0 * (kh[0] - kh_end);
    midpoint->Q = project_to_rotation(0.5 * (conf.Q + out.Q) + dt / 8.0 * (kQ[0] - kQ_end));
    midpoint->phi.resize(n);
    midpoint->J1.resize(n);
    midpoint->J2.resize(n);
    pool().for_each(n, [&](std::size_t node) {
      const NodeState y1{out.phi[node], out.J1[node], out.J2[node]};
      const NodeState f1 = node_rate(spec, end, y1);
      const NodeState& f0 = k_first[node];
      midpoint->phi[node] = 0.5 * (conf.phi[node] + y1.phi) + dt / 8.0 * (f0.phi - f1.phi);
      midpoint->J1[node] = 0.5 * (conf.J1[node] + y1.J1) + dt / 8.0 * (f0.J1 - f1.J1);
      for (int i = 0; i < 3; ++i)
        midpoint->J2[node][i] =
            0.5 * (conf.J2[node][i] + y1.J2[i]) + dt / 8.0 * (f0.J2[i] - f1.J2[i]);
    });
  }
  return out;
}

Mat3 metric(const Configuration& conf, std::size_t node) {
  const Mat3& j = conf.J1[node];
  if (std::abs(j.determinant()) < 1e-14) {
    std::ostringstream os;
    os << "singular flow-map Jacobian at node " << node;
    throw DegeneracyError(os.str());
  }
  return j.transpose() * j;
}

ConfigurationResiduals configuration_residuals(const Mesh& mesh, const Configuration& conf) {
  ConfigurationResiduals r{};
  r.orthogonality = (conf.Q.transpose() * conf.Q - Mat3::Identity()).norm();
  const std::size_t n = mesh.node_count();
  const int nr = mesh.resolution().n_r;
  Mat3 planar_fill = Mat3::Zero();
  if (mesh.dim() == 2) planar_fill(2, 2) = 1.0;
  for (std::size_t node = 0; node < n; ++node) {
    const Mat3 g = mesh.gradient(conf.phi.data(), node) + planar_fill;
    r.gradient_defect = std::max(r.gradient_defect, (g - conf.J1[node]).norm());
    const int i = mesh.radial_index(node);
    if (i <= 1 || i >= nr - 1) {
      const Mat3 m = conf.J1[node].transpose() * conf.J1[node];
      r.boundary_metric = std::max(r.boundary_metric, (m - Mat3::Identity()).norm());
    }
  }
  return r;
}

}  // namespace rigidflow
