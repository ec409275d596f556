#include "rigidflow/fluid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "rigidflow/errors.hpp"
#include "rigidflow/parallel.hpp"

namespace rigidflow {

// ---------------------------------------------------------------- FluidField

FluidField FluidField::uniform(std::size_t n, double p0, const Vec3& u0, double s0) {
  FluidField f;
  f.p.assign(n, p0);
  f.u.assign(n, u0);
  f.s.assign(n, s0);
  return f;
}

void FluidField::combine(double a, double b, const FluidField& x) {
  for (std::size_t i = 0; i < size(); ++i) {
    p[i] = a * p[i] + b * x.p[i];
    u[i] = a * u[i] + b * x.u[i];
    s[i] = a * s[i] + b * x.s[i];
  }
}

FluidField FluidField::operator+(const FluidField& o) const {
  FluidField r = *this;
  r.combine(1.0, 1.0, o);
  return r;
}

FluidField FluidField::operator-(const FluidField& o) const {
  FluidField r = *this;
  r.combine(1.0, -1.0, o);
  return r;
}

FluidField FluidField::operator*(double a) const {
  FluidField r(size());
  r.combine(0.0, a, *this);
  return r;
}

// -------------------------------------------------------------- coefficients

NodeCoefficients node_coefficients(const DomainSpec& spec, const SolidVelocity& theta,
                                   const Configuration& conf, std::size_t node) {
  NodeCoefficients c;
  const Mat3& J1 = conf.J1[node];
  const Tensor3& J2 = conf.J2[node];
  // Untouched nodes outside the cutoff band: the defaults are exactly what
  // the general formulas below would produce.
  if (J1 == Mat3::Identity() && J2[0].isZero(0.0) && J2[1].isZero(0.0) && J2[2].isZero(0.0) &&
      cutoff(spec, conf.phi[node]) == 0.0)
    return c;
  const VelocityDerivatives vd =
      transport_velocity_derivatives(spec, theta, conf.h, conf.Q, conf.phi[node], false);
  c.J1inv = J1.inverse();
  c.M = J1.transpose() * J1;
  c.Minv = c.J1inv * c.J1inv.transpose();
  c.us = c.J1inv * vd.V;
  c.gradV = vd.grad;
  c.K = c.J1inv * vd.grad * J1;
  for (int i = 0; i < 3; ++i) {
    c.T[i] = c.J1inv(i, 0) * J2[0] + c.J1inv(i, 1) * J2[1] + c.J1inv(i, 2) * J2[2];
  }
  for (int j = 0; j < 3; ++j) {
    double bj = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) bj += c.J1inv(k, i) * J2[i](j, k);
    c.b(j) = bj;
  }
  return c;
}

void node_kinematics(const Mesh& mesh, const SolidVelocity& theta, const Configuration& conf,
                     NodeKinematics& k) {
  k.theta = planar_restrict(theta, mesh.dim());
  const std::size_t n = mesh.node_count();
  bool trivial = k.theta.is_zero() && conf.h.isZero(0.0) && conf.Q == Mat3::Identity();
  for (std::size_t node = 0; trivial && node < n; ++node) {
    trivial = conf.J1[node] == Mat3::Identity() && conf.J2[node][0].isZero(0.0) &&
              conf.J2[node][1].isZero(0.0) && conf.J2[node][2].isZero(0.0);
  }
  k.trivial = trivial;
  // every slot is overwritten below, so existing storage is reused as is
  if (k.node.size() != n) k.node.resize(n);
  if (trivial) {
    std::fill(k.node.begin(), k.node.end(), NodeCoefficients{});
    return;
  }
  pool().for_each(n, [&](std::size_t node) {
    k.node[node] = node_coefficients(mesh.spec(), k.theta, conf, node);
  });
}

NodeKinematics node_kinematics(const Mesh& mesh, const SolidVelocity& theta,
                               const Configuration& conf) {
  NodeKinematics k;
  node_kinematics(mesh, theta, conf, k);
  return k;
}

// ------------------------------------------------------------ regularization

namespace {

FluidField directional_derivative(const Mesh& mesh, const NormalExtension& nu,
                                  const FluidField& f, double scale) {
  const std::size_t n = mesh.node_count();
  FluidField out(n);
  pool().for_each(n, [&](std::size_t node) {
    const Vec3& v = nu.nu[node];
    out.p[node] = scale * v.dot(mesh.gradient(f.p.data(), node));
    out.u[node] = scale * (mesh.gradient(f.u.data(), node) * v);
    out.s[node] = scale * v.dot(mesh.gradient(f.s.data(), node));
  });
  return out;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

Regularization make_regularization(const Mesh& mesh, double eps,
                                   const CompatibilityDerivatives& compat) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    std::ostringstream os;
    os << "fluid.eps must lie in [0, 1], got " << eps;
    throw ValidationError(os.str());
  }
  if (compat.U.empty()) throw ValidationError("regularization needs at least the initial data");
  Regularization reg;
  reg.eps = eps;
  reg.nu = extended_normal(mesh);
  reg.K = static_cast<int>(compat.U.size()) - 1;
  reg.moments = compat.U;
  for (const FluidField& m : reg.moments)
    reg.fluxes.push_back(eps > 0.0 ? directional_derivative(mesh, reg.nu, m, eps)
                                   : FluidField(mesh.node_count()));
  return reg;
}

Regularization no_regularization(const Mesh& mesh, const FluidField& U0) {
  CompatibilityDerivatives c;
  c.U.push_back(U0);
  c.theta.emplace_back();
  return make_regularization(mesh, 0.0, c);
}

ReferenceExtension reference_extension(const Regularization& reg, double t) {
  const std::size_t n = reg.moments.front().size();
  ReferenceExtension out{FluidField(n), FluidField(n)};
  for (int k = 0; k <= reg.K; ++k) {
    const double c = std::pow(t, k) / factorial(k);
    out.U.combine(1.0, c, reg.moments[k]);
    out.F.combine(1.0, c, reg.fluxes[k]);
  }
  return out;
}

// -------------------------------------------------------------- FluidSolver

FluidSolver::FluidSolver(const Mesh& mesh, const EosParams& eos, const HyperbolicityBox& box,
                         Regularization reg, FluidOptions opts)
    : mesh_(&mesh), eos_(eos), box_(box), reg_(std::move(reg)), opts_(opts) {
  eos_.validate();
  box_.validate();
  if (!(opts_.cfl > 0.0)) throw ValidationError("fluid.cfl must be positive");
}

CoefficientSet FluidSolver::assemble_coefficients(const NodeKinematics& kin, const FluidField& U,
                                                  std::size_t node) const {
  const int d = mesh_->dim();
  const SymmetrizerCoefficients sc = symmetrizer_coefficients({U.p[node], U.s[node]}, eos_, box_);
  const NodeCoefficients& c = kin.node[node];
  const Vec3 w = U.u[node] - c.us;
  const Vec3& nu = reg_.nu.nu[node];

  CoefficientSet cs;
  cs.A0 = Eigen::MatrixXd::Zero(d + 2, d + 2);
  cs.A0(0, 0) = 1.0 / sc.alpha;
  cs.A0.block(1, 1, d, d) = sc.eta * c.M.topLeftCorner(d, d);
  cs.A0(d + 1, d + 1) = 1.0;

  for (int j = 0; j < d; ++j) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d + 2, d + 2);
    a(0, 0) = w(j) / sc.alpha;
    a(0, 1 + j) = 1.0;
    a(1 + j, 0) = 1.0;
    a.block(1, 1, d, d) = sc.eta * w(j) * c.M.topLeftCorner(d, d);
    a(d + 1, d + 1) = w(j);
    a += reg_.eps * nu(j) * Eigen::MatrixXd::Identity(d + 2, d + 2);
    cs.A.push_back(a);
  }

  Mat3 Tw;
  for (int i = 0; i < 3; ++i) Tw.row(i) = (c.T[i] * w).transpose();
  const Mat3 Buu = sc.eta * c.M * (Tw + c.K);
  cs.B = Eigen::MatrixXd::Zero(d + 2, d + 2);
  cs.B.block(0, 1, 1, d) = c.b.head(d).transpose();
  cs.B.block(1, 1, d, d) = Buu.topLeftCorner(d, d);
  return cs;
}

void FluidSolver::residual(const FluidField& U, const NodeKinematics& kin, double t,
                           FluidField& R, ResidualOptions ro, FluidField* eps_part) const {
  if (R.size() != U.size()) R = FluidField(U.size());
  if (eps_part && eps_part->size() != U.size()) *eps_part = FluidField(U.size());
  if (kin.trivial)
    residual_impl<true>(U, kin, t, R, ro, eps_part);
  else
    residual_impl<false>(U, kin, t, R, ro, eps_part);
}

template <bool Trivial>
void FluidSolver::residual_impl(const FluidField& U, const NodeKinematics& kin, double t,
                                FluidField& R, ResidualOptions ro, FluidField* eps_part) const {
  const Mesh& mesh = *mesh_;
  const std::size_t n = mesh.node_count();
  const int dim = mesh.dim();
  const double eps = ro.regularization ? reg_.eps : 0.0;
  const bool dissipate = ro.dissipation && opts_.limiter == Limiter::llf;

  std::vector<double> fcoef(reg_.K + 1);
  for (int k = 0; k <= reg_.K; ++k) fcoef[k] = std::pow(t, k) / factorial(k);

  std::vector<double> speeds;
  if (dissipate) speeds.assign(n * 3, 0.0);

  pool().for_each(n, [&](std::size_t node) {
    const double p = U.p[node];
    const double s = U.s[node];
    const Vec3& u = U.u[node];
    const SymmetrizerCoefficients sc = symmetrizer_unchecked({p, s}, eos_);
    const double alpha = sc.alpha;
    const double eta = sc.eta;

    const Vec3 gp = mesh.gradient(U.p.data(), node);
    const Vec3 gs = mesh.gradient(U.s.data(), node);
    const Mat3 G = mesh.gradient(U.u.data(), node);

    Vec3 w;
    double rp;
    Vec3 ru;
    if constexpr (Trivial) {
      w = u;
      rp = -w.dot(gp) - alpha * G.trace();
      ru = -gp / eta - G * w;
    } else {
      const NodeCoefficients& c = kin.node[node];
      w = u - c.us;
      rp = -w.dot(gp) - alpha * (G.trace() + c.b.dot(u));
      Vec3 tuw;
      for (int i = 0; i < 3; ++i) tuw(i) = u.dot(c.T[i] * w);
      ru = -(c.Minv * gp) / eta - G * w - (tuw + c.K * u);
    }
    double rs = -w.dot(gs);

    double eps_speed = 0.0;
    if (eps > 0.0) {
      const Vec3& nu = reg_.nu.nu[node];
      double Fp = 0.0, Fs = 0.0;
      Vec3 Fu = Vec3::Zero();
      for (int k = 0; k <= reg_.K; ++k) {
        Fp += fcoef[k] * reg_.fluxes[k].p[node];
        Fu += fcoef[k] * reg_.fluxes[k].u[node];
        Fs += fcoef[k] * reg_.fluxes[k].s[node];
      }
      const double ep = alpha * (Fp - eps * nu.dot(gp));
      Vec3 eu = (Fu - eps * (G * nu)) / eta;
      double minv_norm = 1.0;
      if constexpr (!Trivial) {
        eu = kin.node[node].Minv * eu;
        minv_norm = kin.node[node].Minv.cwiseAbs().rowwise().sum().maxCoeff();
      }
      const double es = Fs - eps * nu.dot(gs);
      rp += ep;
      ru += eu;
      rs += es;
      if (eps_part) {
        eps_part->p[node] = ep;
        eps_part->u[node] = eu;
        eps_part->s[node] = es;
      }
      eps_speed = eps * std::max({alpha, minv_norm / eta, 1.0});
    }
    R.p[node] = rp;
    R.u[node] = ru;
    R.s[node] = rs;

    if (dissipate) {
      const double cs = std::sqrt(alpha / eta);
      for (int c = 0; c < dim; ++c) {
        const Vec3& k = mesh.grad_q(node, c);
        double acoustic;
        if constexpr (Trivial)
          acoustic = cs * k.norm();
        else
          acoustic = cs * std::sqrt(k.dot(kin.node[node].Minv * k));
        double lam = std::abs(w.dot(k)) + acoustic;
        if (eps_speed > 0.0) lam += eps_speed * std::abs(reg_.nu.nu[node].dot(k));
        speeds[node * 3 + c] = std::max(lam, opts_.speed_floor);
      }
    }
  });

  if (dissipate) add_dissipation(U, speeds, R);
}

// Fourth-difference dissipation in the form -(1/8h) D2^T diag(lambda) D2 U
// per direction. This is the local Lax-Friedrichs flux difference on
// linearly reconstructed interface states, and the factored form keeps it
// negative semi-definite next to the walls where D2 is truncated.
void FluidSolver::add_dissipation(const FluidField& U, const std::vector<double>& speeds,
                                  FluidField& R) const {
  const Mesh& mesh = *mesh_;
  const std::size_t n = mesh.node_count();
  const int nr = mesh.resolution().n_r;
  FluidField E(n);
  for (int c = 0; c < mesh.dim(); ++c) {
    pool().for_each(n, [&](std::size_t m) {
      const double lam = speeds[m * 3 + c];
      if (c == 0) {
        const int i = mesh.radial_index(m);
        if (i == 0 || i == nr) {
          E.p[m] = 0.0;
          E.u[m].setZero();
          E.s[m] = 0.0;
          return;
        }
        E.p[m] = lam * (U.p[m + 1] - 2.0 * U.p[m] + U.p[m - 1]);
        E.u[m] = lam * (U.u[m + 1] - 2.0 * U.u[m] + U.u[m - 1]);
        E.s[m] = lam * (U.s[m + 1] - 2.0 * U.s[m] + U.s[m - 1]);
        return;
      }
      const auto up = static_cast<std::size_t>(mesh.neighbor(m, c, 1));
      const auto dn = static_cast<std::size_t>(mesh.neighbor(m, c, -1));
      E.p[m] = lam * (U.p[up] - 2.0 * U.p[m] + U.p[dn]);
      E.u[m] = lam * (mesh.transport(m, c, 1) * U.u[up] - 2.0 * U.u[m] +
                      mesh.transport(m, c, -1) * U.u[dn]);
      E.s[m] = lam * (U.s[up] - 2.0 * U.s[m] + U.s[dn]);
    });
    const double scale = 1.0 / (8.0 * mesh.spacing(c));
    pool().for_each(n, [&](std::size_t i) {
      double ap;
      Vec3 au;
      double as;
      if (c == 0) {
        const int ir = mesh.radial_index(i);
        ap = -2.0 * E.p[i];
        au = -2.0 * E.u[i];
        as = -2.0 * E.s[i];
        if (ir > 0) {
          ap += E.p[i - 1];
          au += E.u[i - 1];
          as += E.s[i - 1];
        }
        if (ir < nr) {
          ap += E.p[i + 1];
          au += E.u[i + 1];
          as += E.s[i + 1];
        }
      } else {
        const auto up = static_cast<std::size_t>(mesh.neighbor(i, c, 1));
        const auto dn = static_cast<std::size_t>(mesh.neighbor(i, c, -1));
        ap = E.p[up] - 2.0 * E.p[i] + E.p[dn];
        au = mesh.transport(i, c, 1) * E.u[up] - 2.0 * E.u[i] + mesh.transport(i, c, -1) * E.u[dn];
        as = E.s[up] - 2.0 * E.s[i] + E.s[dn];
      }
      R.p[i] -= scale * ap;
      R.u[i] -= scale * au;
      R.s[i] -= scale * as;
    });
  }
}

void FluidSolver::apply_boundary(FluidField& U, const NodeKinematics& kin) const {
  for (const BoundaryPatch* patch : {&mesh_->solid(), &mesh_->outer()}) {
    for (std::size_t f = 0; f < patch->size(); ++f) {
      const std::size_t node = patch->nodes[f];
      const Vec3& nrm = patch->normal[f];
      const SymmetrizerCoefficients sc = symmetrizer_unchecked({U.p[node], U.s[node]}, eos_);
      Vec3 minv_n = nrm;
      double g = 0.0;
      if (!kin.trivial) {
        minv_n = kin.node[node].Minv * nrm;
        g = kin.node[node].us.dot(nrm);
      }
      const double a = nrm.dot(minv_n);
      const double q = U.u[node].dot(nrm);
      const double Z = std::sqrt(sc.alpha * sc.eta / a);
      U.p[node] += Z * (q - g);
      U.u[node] += ((g - q) / a) * minv_n;
    }
  }
}

double FluidSolver::boundary_mismatch(const FluidField& U, const NodeKinematics& kin) const {
  double worst = 0.0;
  for (const BoundaryPatch* patch : {&mesh_->solid(), &mesh_->outer()}) {
    for (std::size_t f = 0; f < patch->size(); ++f) {
      const std::size_t node = patch->nodes[f];
      const Vec3 us = kin.trivial ? Vec3::Zero() : kin.node[node].us;
      worst = std::max(worst, std::abs((U.u[node] - us).dot(patch->normal[f])));
    }
  }
  return worst;
}

double FluidSolver::max_stable_dt(const FluidField& U, const NodeKinematics& kin) const {
  const Mesh& mesh = *mesh_;
  const std::size_t n = mesh.node_count();
  const double eps = reg_.eps;
  double worst = 0.0;
  for (std::size_t node = 0; node < n; ++node) {
    const SymmetrizerCoefficients sc = symmetrizer_unchecked({U.p[node], U.s[node]}, eos_);
    const double cs = std::sqrt(sc.alpha / sc.eta);
    Mat3 Minv = Mat3::Identity();
    Vec3 w = U.u[node];
    if (!kin.trivial) {
      Minv = kin.node[node].Minv;
      w -= kin.node[node].us;
    }
    const double eps_speed =
        eps * std::max({sc.alpha, Minv.cwiseAbs().rowwise().sum().maxCoeff() / sc.eta, 1.0});
    double rate = 0.0;
    for (int c = 0; c < mesh.dim(); ++c) {
      const Vec3& k = mesh.grad_q(node, c);
      double lam = std::abs(w.dot(k)) + cs * std::sqrt(k.dot(Minv * k)) +
                   eps_speed * std::abs(reg_.nu.nu[node].dot(k));
      rate += std::max(lam, opts_.speed_floor) / mesh.spacing(c);
    }
    worst = std::max(worst, rate);
  }
  return opts_.cfl / worst;
}

void FluidSolver::check_state(const FluidField& U) const {
  for (std::size_t node = 0; node < U.size(); ++node) {
    const ThermoPair tp{U.p[node], U.s[node]};
    if (!box_.contains(tp) || !U.u[node].allFinite()) {
      const Vec3& x = mesh_->position(node);
      std::ostringstream os;
      os << "state (p=" << tp.p << ", s=" << tp.s << ") at node " << node << " (x=" << x.x()
         << ", " << x.y() << ", " << x.z() << ") outside hyperbolicity box [" << box_.p_min
         << ", " << box_.p_max << "] x [" << box_.s_min << ", " << box_.s_max << "]";
      throw RegionError(os.str(), tp.p, tp.s, box_.p_min, box_.p_max, box_.s_min, box_.s_max);
    }
  }
}

// out = a*base + b*(v + dt*R) everywhere. At wall nodes the eps part of R is
// held back, the remainder is projected onto the wall condition, and the eps
// increment is added afterwards, so the normal-velocity mismatch is driven
// only by the regularization.
void FluidSolver::stage_update(FluidField& out, double a, const FluidField& base, double b,
                               const FluidField& v, double dt, const FluidField& R,
                               const FluidField& Reps, const NodeKinematics& kin) const {
  const std::size_t n = base.size();
  out = FluidField(n);
  const bool split = reg_.eps > 0.0;
  pool().for_each(n, [&](std::size_t i) {
    const bool wall = split && mesh_->on_boundary(i);
    const double f = wall ? 1.0 : 0.0;
    out.p[i] = a * base.p[i] + b * (v.p[i] + dt * (R.p[i] - f * Reps.p[i]));
    out.u[i] = a * base.u[i] + b * (v.u[i] + dt * (R.u[i] - f * Reps.u[i]));
    out.s[i] = a * base.s[i] + b * (v.s[i] + dt * (R.s[i] - f * Reps.s[i]));
  });
  apply_boundary(out, kin);
  if (!split) return;
  for (const BoundaryPatch* patch : {&mesh_->solid(), &mesh_->outer()}) {
    for (std::uint32_t node : patch->nodes) {
      out.p[node] += b * dt * Reps.p[node];
      out.u[node] += b * dt * Reps.u[node];
      out.s[node] += b * dt * Reps.s[node];
    }
  }
}

FluidField FluidSolver::step_with(const FluidField& U, const NodeKinematics& k0,
                                  const NodeKinematics& kh, const NodeKinematics& k1, double t,
                                  double dt) const {
  check_state(U);
  const double dt_max = max_stable_dt(U, k0);
  if (dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "time step " << dt << " exceeds the CFL limit " << dt_max << " at t=" << t;
    throw StepSizeError(os.str(), dt, dt_max);
  }
  const std::size_t n = U.size();
  FluidField R(n), Reps(n), U1, U2, U3;
  residual(U, k0, t, R, {}, &Reps);
  stage_update(U1, 0.0, U, 1.0, U, dt, R, Reps, k1);
  residual(U1, k1, t + dt, R, {}, &Reps);
  stage_update(U2, 0.75, U, 0.25, U1, dt, R, Reps, kh);
  residual(U2, kh, t + 0.5 * dt, R, {}, &Reps);
  stage_update(U3, 1.0 / 3.0, U, 2.0 / 3.0, U2, dt, R, Reps, k1);
  check_state(U3);
  return U3;
}

FluidStepResult FluidSolver::step(const FluidField& U, const ThetaSampler& theta,
                                  const Configuration& conf, double t, double dt) const {
  const int dim = mesh_->dim();
  const SolidVelocity th0 = planar_restrict(theta(t), dim);
  const SolidVelocity thh = planar_restrict(theta(t + 0.5 * dt), dim);
  const SolidVelocity th1 = planar_restrict(theta(t + dt), dim);
  Configuration mid;
  FluidStepResult out;
  out.conf = advance_configuration(*mesh_, conf, theta, t, dt, &mid, opts_.det_floor);
  // Coefficient buffers are large; keeping them per thread avoids
  // reallocating them on every step.
  thread_local std::array<NodeKinematics, 3> k;
  node_kinematics(*mesh_, th0, conf, k[0]);
  if (th0.is_zero() && thh.is_zero() && th1.is_zero()) {
    out.U = step_with(U, k[0], k[0], k[0], t, dt);
  } else {
    node_kinematics(*mesh_, thh, mid, k[1]);
    node_kinematics(*mesh_, th1, out.conf, k[2]);
    out.U = step_with(U, k[0], k[1], k[2], t, dt);
  }
  return out;
}

std::vector<double> solid_pressure_trace(const Mesh& mesh, const FluidField& U) {
  const BoundaryPatch& patch = mesh.solid();
  std::vector<double> trace(patch.size());
  for (std::size_t f = 0; f < patch.size(); ++f) trace[f] = U.p[patch.nodes[f]];
  return trace;
}

// ------------------------------------------------------ compatibility recursion

CompatibilityDerivatives FluidSolver::compatibility_derivatives(const FluidField& U0,
                                                                const SolidVelocity& theta0,
                                                                const BodyProps& props,
                                                                int K) const {
  if (K < 0 || K > 2) {
    std::ostringstream os;
    os << "compatibility order " << K << " is not supported (0 <= K <= 2)";
    throw UnsupportedOrderError(os.str());
  }
  const Mesh& mesh = *mesh_;
  const std::size_t n = mesh.node_count();
  const ResidualOptions bare{false, false};
  const SolidVelocity th0 = planar_restrict(theta0, mesh.dim());

  CompatibilityDerivatives out;
  out.U.push_back(U0);
  out.theta.push_back(th0);
  if (K == 0) return out;

  const Configuration conf0 = Configuration::identity(mesh);
  const NodeKinematics kin0 = node_kinematics(mesh, th0, conf0);
  FluidField R1(n);
  residual(U0, kin0, 0.0, R1, bare);
  const SolidVelocity th1 =
      solid_rate(th0, surface_load(mesh, solid_pressure_trace(mesh, U0)), props);
  out.U.push_back(R1);
  out.theta.push_back(th1);
  if (K == 1) return out;

  // Second derivative of the fluid block: directional derivative of the
  // discrete right side along (dU/dt, dTheta/dt, dUpsilon/dt) at t = 0.
  double u_scale = 1.0, r_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    u_scale = std::max({u_scale, std::abs(U0.p[i]), U0.u[i].cwiseAbs().maxCoeff(), std::abs(U0.s[i])});
    r_scale = std::max({r_scale, std::abs(R1.p[i]), R1.u[i].cwiseAbs().maxCoeff(), std::abs(R1.s[i])});
  }
  r_scale = std::max({r_scale, th1.max_abs(), th0.max_abs()});
  const double delta = r_scale > 0.0 ? 1e-5 * u_scale / r_scale : 1e-5;
  const ConfigurationRate rate = configuration_rate(mesh, th0, conf0);
  FluidField Rplus(n), Rminus(n);
  for (const double sgn : {1.0, -1.0}) {
    const double d = sgn * delta;
    FluidField Ud = U0;
    Ud.combine(1.0, d, R1);
    Configuration cd = conf0;
    cd.h += d * rate.dh;
    cd.Q += d * rate.dQ;
    for (std::size_t i = 0; i < n; ++i) {
      cd.phi[i] += d * rate.dphi[i];
      cd.J1[i] += d * rate.dJ1[i];
      for (int a = 0; a < 3; ++a) cd.J2[i][a] += d * rate.dJ2[i][a];
    }
    const NodeKinematics kd = node_kinematics(mesh, th0 + th1 * d, cd);
    residual(Ud, kd, 0.0, sgn > 0 ? Rplus : Rminus, bare);
  }
  FluidField R2 = Rplus - Rminus;
  R2 = R2 * (1.0 / (2.0 * delta));

  // The solid block is differentiated exactly; the load is linear in p.
  const SurfaceLoad dload = surface_load(mesh, solid_pressure_trace(mesh, R1));
  SolidVelocity th2;
  th2.l = th1.l.cross(th0.omega) + th0.l.cross(th1.omega) + dload.force / props.body_mass;
  th2.omega = props.J0.ldlt().solve((props.J0 * th1.omega).cross(th0.omega) +
                                    (props.J0 * th0.omega).cross(th1.omega) + dload.torque);
  out.U.push_back(R2);
  out.theta.push_back(planar_restrict(th2, mesh.dim()));
  return out;
}

}  // namespace rigidflow
