#include "rigidflow/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include "rigidflow/errors.hpp"
#include "rigidflow/parallel.hpp"

namespace rigidflow {

namespace {

// Node-wise fields that every estimator needs at one level.
struct LevelData {
  NodeKinematics kin;
  std::vector<double> alpha, eta;
};

LevelData level_data(const FluidSolver& solver, const TimeLevel& lv) {
  const Mesh& mesh = solver.mesh();
  LevelData d;
  d.kin = node_kinematics(mesh, lv.theta, lv.conf);
  const std::size_t n = mesh.node_count();
  d.alpha.resize(n);
  d.eta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SymmetrizerCoefficients sc = symmetrizer_unchecked({lv.U.p[i], lv.U.s[i]}, solver.eos());
    d.alpha[i] = sc.alpha;
    d.eta[i] = sc.eta;
  }
  return d;
}

const Mat3& metric_of(const LevelData& d, std::size_t node) {
  static const Mat3 identity = Mat3::Identity();
  return d.kin.trivial ? identity : d.kin.node[node].M;
}

Vec3 wall_velocity(const LevelData& d, std::size_t node) {
  return d.kin.trivial ? Vec3::Zero() : d.kin.node[node].us;
}

double quadratic_form(const LevelData& d, std::size_t i, double p, const Vec3& u, double s) {
  return p * p / d.alpha[i] + d.eta[i] * u.dot(metric_of(d, i) * u) + s * s;
}

double solid_form(const BodyProps& props, const SolidVelocity& th) {
  return props.body_mass * th.l.squaredNorm() + th.omega.dot(props.J0 * th.omega);
}

double weighted_sum(const Mesh& mesh, const std::vector<double>& density) {
  // fixed summation order keeps runs bit-reproducible
  double sum = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) sum += mesh.volume_weight(i) * density[i];
  return sum;
}

SolidVelocity committed_rate(const FluidSolver& solver, const BodyProps& props,
                             const TimeLevel& lv) {
  const SurfaceLoad load = surface_load(solver.mesh(), solid_pressure_trace(solver.mesh(), lv.U));
  return solid_rate(lv.theta, load, props);
}

double energy1(const FluidSolver& solver, const BodyProps& props, const TimeLevel& cur,
               const FluidField& dUdt) {
  const Mesh& mesh = solver.mesh();
  const LevelData d = level_data(solver, cur);
  const std::size_t n = mesh.node_count();
  const int dim = mesh.dim();
  std::vector<double> dens(n);
  pool().for_each(n, [&](std::size_t i) {
    double e = quadratic_form(d, i, cur.U.p[i], cur.U.u[i], cur.U.s[i]);
    e += quadratic_form(d, i, dUdt.p[i], dUdt.u[i], dUdt.s[i]);
    for (int c = 1; c < dim; ++c) {
      e += quadratic_form(d, i, mesh.d_scalar(cur.U.p.data(), i, c),
                          mesh.d_vector(cur.U.u.data(), i, c), mesh.d_scalar(cur.U.s.data(), i, c));
    }
    // weighted normal field phi(z) d_z, z the distance to the nearer wall
    const double L = mesh.radial_length(i);
    const double xi = mesh.xi(i);
    const double z = std::min(xi, 1.0 - xi) * L;
    const double w = z / (1.0 + z) / L;
    e += quadratic_form(d, i, w * mesh.d_scalar(cur.U.p.data(), i, 0),
                        w * mesh.d_vector(cur.U.u.data(), i, 0),
                        w * mesh.d_scalar(cur.U.s.data(), i, 0));
    dens[i] = e;
  });
  // Solid terms: one copy per conormal field, the time field carrying the
  // committed rate and the others the velocity itself.
  const SolidVelocity rate = committed_rate(solver, props, cur);
  const double solid = (1 + dim) * solid_form(props, cur.theta) + solid_form(props, rate);
  return weighted_sum(mesh, dens) + solid;
}

// Upwind-biased second-order derivative of a node scalar along direction c.
double upwind(const Mesh& mesh, const double* f, std::size_t node, int c, double speed) {
  const double h = mesh.spacing(c);
  if (c == 0) {
    const int i = mesh.radial_index(node);
    const int nr = mesh.resolution().n_r;
    if (speed > 0.0 && i >= 2)
      return (3.0 * f[node] - 4.0 * f[node - 1] + f[node - 2]) / (2.0 * h);
    if (speed < 0.0 && i <= nr - 2)
      return (-3.0 * f[node] + 4.0 * f[node + 1] - f[node + 2]) / (2.0 * h);
    return mesh.d_scalar(f, node, 0);
  }
  if (mesh.dim() == 3 && c == 1) {
    // the polar stencil flips orientation across a pole
    const int j = mesh.angular_index(node);
    if (j < 2 || j > mesh.n1() - 3) return mesh.d_scalar(f, node, c);
  }
  if (speed == 0.0) return mesh.d_scalar(f, node, c);
  const int o = speed > 0.0 ? -1 : 1;
  const auto n1 = static_cast<std::size_t>(mesh.neighbor(node, c, o));
  const auto n2 = static_cast<std::size_t>(mesh.neighbor(n1, c, o));
  return -o * (3.0 * f[node] - 4.0 * f[n1] + f[n2]) / (2.0 * h);
}

Vec3 curl_of(const Mat3& g) {
  // g(k, j) = d v_k / d x_j
  return Vec3(g(2, 1) - g(1, 2), g(0, 2) - g(2, 0), g(1, 0) - g(0, 1));
}

struct VorticityLevel {
  std::vector<Vec3> W;          // Curl(M u)
  std::vector<Vec3> transport;  // ((w + a).grad) W - R, upwinded
  std::vector<Vec3> v;          // M u
};

VorticityLevel vorticity_level(const FluidSolver& solver, const TimeLevel& lv) {
  const Mesh& mesh = solver.mesh();
  const LevelData d = level_data(solver, lv);
  const Regularization& reg = solver.regularization();
  const double eps = reg.eps;
  const std::size_t n = mesh.node_count();
  const int dim = mesh.dim();
  const EosParams& eos = solver.eos();
  FluidField F;
  if (eps > 0.0) F = reference_extension(reg, lv.t).F;

  VorticityLevel out;
  out.v.resize(n);
  std::vector<Vec3> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.v[i] = metric_of(d, i) * lv.U.u[i];
    w[i] = lv.U.u[i] - wall_velocity(d, i);
  }
  out.W.resize(n);
  std::vector<Vec3> G(n);
  std::vector<Mat3> gv(n);
  pool().for_each(n, [&](std::size_t i) {
    const Mat3 gu = mesh.gradient(lv.U.u.data(), i);
    gv[i] = mesh.gradient(out.v.data(), i);
    out.W[i] = curl_of(gv[i]);
    const Vec3& u = lv.U.u[i];
    const Mat3& M = metric_of(d, i);
    // G collects every term of d(Mu)/dt that is not a pressure gradient or
    // the (w.grad)(Mu) transport.
    Vec3 g = gv[i] * w[i] - M * (gu * w[i]);
    if (!d.kin.trivial) {
      const NodeCoefficients& c = d.kin.node[i];
      const Mat3& J1 = lv.conf.J1[i];
      const Mat3 dM = J1.transpose() * (c.gradV + c.gradV.transpose()) * J1;
      Vec3 j2uw;
      for (int k = 0; k < 3; ++k) j2uw(k) = u.dot(lv.conf.J2[i][k] * w[i]);
      g += dM * u - J1.transpose() * (j2uw + c.gradV * (J1 * u));
    }
    if (eps > 0.0) g += (F.u[i] - eps * (gu * reg.nu.nu[i])) / d.eta[i];
    G[i] = g;
  });

  out.transport.resize(n);
  const double rho_p_factor = 1.0 / eos.gamma;
  pool().for_each(n, [&](std::size_t i) {
    const Mat3& M = metric_of(d, i);
    const Vec3 gp = mesh.gradient(lv.U.p.data(), i);
    const Vec3 gs = mesh.gradient(lv.U.s.data(), i);
    const double eta = d.eta[i];
    // eta = rho(p, s): d rho/dp = rho/(gamma p), d rho/ds = -rho/(gamma c_v)
    const Vec3 geta = eta * rho_p_factor * (gp / lv.U.p[i] - gs / eos.c_v);
    const Vec3 baroclinic = geta.cross(gp) / (eta * eta);
    const Mat3 gw = mesh.gradient(w.data(), i);
    const Mat3 A = gv[i] * gw;
    const Vec3 C(A(2, 1) - A(1, 2), A(0, 2) - A(2, 0), A(1, 0) - A(0, 1));
    const Mat3 gW = mesh.gradient(out.W.data(), i);
    Vec3 a = Vec3::Zero();
    if (eps > 0.0) a = eps * M.inverse() * reg.nu.nu[i] / eta;
    const Vec3 R = curl_of(mesh.gradient(G.data(), i)) + baroclinic - C + gW * a;

    out.transport[i] = -R;
  });
  // Upwind advection of W, one Cartesian component at a time.
  for (int k = 0; k < 3; ++k) {
    if (dim == 2 && k < 2) continue;
    std::vector<double> Wk(n);
    for (std::size_t i = 0; i < n; ++i) Wk[i] = out.W[i](k);
    pool().for_each(n, [&](std::size_t i) {
      Vec3 a = Vec3::Zero();
      if (eps > 0.0) a = eps * metric_of(d, i).inverse() * reg.nu.nu[i] / d.eta[i];
      const Vec3 b = w[i] + a;
      double adv = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double speed = b.dot(mesh.grad_q(i, c));
        adv += speed * upwind(mesh, Wk.data(), i, c, speed);
      }
      out.transport[i](k) += adv;
    });
  }
  return out;
}

double interior_norm(const Mesh& mesh, const std::vector<Vec3>& r) {
  const int nr = mesh.resolution().n_r;
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const int ir = mesh.radial_index(i);
    if (ir < 1 || ir > nr - 1) continue;
    sum += mesh.volume_weight(i) * r[i].squaredNorm();
  }
  return std::sqrt(sum);
}

std::vector<double> entropy_transport(const FluidSolver& solver, const TimeLevel& lv) {
  const Mesh& mesh = solver.mesh();
  const Regularization& reg = solver.regularization();
  const NodeKinematics kin = node_kinematics(mesh, lv.theta, lv.conf);
  const std::size_t n = mesh.node_count();
  FluidField F;
  if (reg.eps > 0.0) F = reference_extension(reg, lv.t).F;
  std::vector<double> out(n);
  pool().for_each(n, [&](std::size_t i) {
    Vec3 b = lv.U.u[i];
    if (!kin.trivial) b -= kin.node[i].us;
    double r = 0.0;
    if (reg.eps > 0.0) {
      b += reg.eps * reg.nu.nu[i];
      r -= F.s[i];
    }
    out[i] = r + b.dot(mesh.gradient(lv.U.s.data(), i));
  });
  return out;
}

double node_norm(const Mesh& mesh, const std::vector<double>& r) {
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += mesh.volume_weight(i) * r[i] * r[i];
  return std::sqrt(sum);
}

void require_history(const TimeLevel* prev, const TimeLevel& cur, const char* what) {
  if (!prev) {
    std::ostringstream os;
    os << what << " needs two stored time levels, only one is available at t=" << cur.t;
    throw InsufficientHistoryError(os.str());
  }
  if (!(cur.t > prev->t)) {
    std::ostringstream os;
    os << what << ": stored levels are not increasing in time (" << prev->t << ", " << cur.t
       << ")";
    throw InsufficientHistoryError(os.str());
  }
}

}  // namespace

double conormal_energy0(const FluidSolver& solver, const BodyProps& props, const TimeLevel& cur) {
  const Mesh& mesh = solver.mesh();
  const LevelData d = level_data(solver, cur);
  const std::size_t n = mesh.node_count();
  std::vector<double> dens(n);
  for (std::size_t i = 0; i < n; ++i) dens[i] = quadratic_form(d, i, cur.U.p[i], cur.U.u[i], cur.U.s[i]);
  return weighted_sum(mesh, dens) + solid_form(props, cur.theta);
}

double conormal_energy1(const FluidSolver& solver, const BodyProps& props, const TimeLevel& cur,
                        const FluidField& dUdt) {
  return energy1(solver, props, cur, dUdt);
}

double conormal_energy1(const FluidSolver& solver, const BodyProps& props, const TimeLevel& cur,
                        const TimeLevel* prev) {
  require_history(prev, cur, "conormal energy of order 1");
  FluidField dU = cur.U - prev->U;
  dU = dU * (1.0 / (cur.t - prev->t));
  return energy1(solver, props, cur, dU);
}

double conormal_energy(const FluidSolver& solver, const BodyProps& props, const TimeLevel& cur,
                       const TimeLevel* prev, int order) {
  if (order == 0) return conormal_energy0(solver, props, cur);
  if (order == 1) return conormal_energy1(solver, props, cur, prev);
  std::ostringstream os;
  os << "conormal energy of order " << order << " is not available (orders 0 and 1 only)";
  throw UnsupportedOrderError(os.str());
}

double vorticity_residual(const FluidSolver& solver, const TimeLevel* prev, const TimeLevel& cur) {
  require_history(prev, cur, "vorticity residual");
  const VorticityLevel a = vorticity_level(solver, *prev);
  const VorticityLevel b = vorticity_level(solver, cur);
  const double dt = cur.t - prev->t;
  std::vector<Vec3> r(a.W.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = (b.W[i] - a.W[i]) / dt + 0.5 * (a.transport[i] + b.transport[i]);
  return interior_norm(solver.mesh(), r);
}

double vorticity_residual(const FluidSolver& solver, const TimeLevel& cur, const FluidField& dUdt) {
  const Mesh& mesh = solver.mesh();
  const VorticityLevel a = vorticity_level(solver, cur);
  const NodeKinematics kin = node_kinematics(mesh, cur.theta, cur.conf);
  const std::size_t n = mesh.node_count();
  // d(Mu)/dt = (dM/dt) u + M du/dt
  std::vector<Vec3> dv(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kin.trivial) {
      dv[i] = dUdt.u[i];
      continue;
    }
    const NodeCoefficients& c = kin.node[i];
    const Mat3& J1 = cur.conf.J1[i];
    const Mat3 dM = J1.transpose() * (c.gradV + c.gradV.transpose()) * J1;
    dv[i] = dM * cur.U.u[i] + c.M * dUdt.u[i];
  }
  std::vector<Vec3> r(n);
  pool().for_each(n, [&](std::size_t i) {
    r[i] = curl_of(mesh.gradient(dv.data(), i)) + a.transport[i];
  });
  return interior_norm(mesh, r);
}

double entropy_residual(const FluidSolver& solver, const TimeLevel* prev, const TimeLevel& cur) {
  require_history(prev, cur, "entropy residual");
  const std::vector<double> a = entropy_transport(solver, *prev);
  const std::vector<double> b = entropy_transport(solver, cur);
  const double dt = cur.t - prev->t;
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = (cur.U.s[i] - prev->U.s[i]) / dt + 0.5 * (a[i] + b[i]);
  return node_norm(solver.mesh(), r);
}

double entropy_residual(const FluidSolver& solver, const TimeLevel& cur, const FluidField& dUdt) {
  std::vector<double> r = entropy_transport(solver, cur);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += dUdt.s[i];
  return node_norm(solver.mesh(), r);
}

std::vector<double> compatibility_residual(const Mesh& mesh, const CompatibilityDerivatives& cd) {
  std::vector<double> out;
  for (std::size_t k = 0; k < cd.U.size(); ++k) {
    const FluidField& Uk = cd.U[k];
    const SolidVelocity th = k < cd.theta.size() ? cd.theta[k] : SolidVelocity{};
    double worst = 0.0;
    const BoundaryPatch& s = mesh.solid();
    for (std::size_t f = 0; f < s.size(); ++f) {
      const Vec3 wall = th.l + th.omega.cross(s.center[f]);
      worst = std::max(worst, std::abs((Uk.u[s.nodes[f]] - wall).dot(s.normal[f])));
    }
    const BoundaryPatch& o = mesh.outer();
    for (std::size_t f = 0; f < o.size(); ++f)
      worst = std::max(worst, std::abs(Uk.u[o.nodes[f]].dot(o.normal[f])));
    out.push_back(worst);
  }
  return out;
}

}  // namespace rigidflow
