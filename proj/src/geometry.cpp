#include "rigidflow/geometry.hpp"

#include <cmath>
#include <sstream>

#include "rigidflow/errors.hpp"

namespace rigidflow {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 8> kGaussX = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussW = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss(double a, double b, F&& f) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t q = 0; q < kGaussX.size(); ++q) sum += kGaussW[q] * f(mid + half * kGaussX[q]);
  return sum * half;
}

template <class F>
Vec3 gauss_vec(double a, double b, F&& f) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Vec3 sum = Vec3::Zero();
  for (std::size_t q = 0; q < kGaussX.size(); ++q) sum += kGaussW[q] * f(mid + half * kGaussX[q]);
  return sum * half;
}

double smoothstep_d1(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

double smoothstep_d2(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

Mat3 planar_projector(int dim) {
  Mat3 p = Mat3::Identity();
  if (dim == 2) p(2, 2) = 0.0;
  return p;
}

}  // namespace

void DomainSpec::validate() const {
  std::ostringstream os;
  if (dim != 2 && dim != 3) {
    os << "geometry.dim must be 2 or 3, got " << dim;
    throw ConstructionError(os.str());
  }
  if (!(r_s > 0.0) || !std::isfinite(r_s)) throw ConstructionError("geometry.r_s must be positive");
  if (!(R0 > 0.0) || !std::isfinite(R0)) throw ConstructionError("geometry.R0 must be positive");
  if (!offset.allFinite()) throw ConstructionError("geometry.offset must be finite");
  if (dim == 2 && offset.z() != 0.0)
    throw ConstructionError("geometry.offset must be planar when dim = 2");
  const double need = r_s + offset.norm() + 2.0 * R0;
  if (!(need < R_o)) {
    os << "DomainSpec invariant r_s + |offset| + 2*R0 < R_o violated: " << need
       << " >= " << R_o;
    throw ConstructionError(os.str());
  }
}

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double cutoff(const DomainSpec& spec, const Vec3& y) {
  const double dist = y.norm() - spec.r_s;
  return 1.0 - smoothstep((dist - spec.R0) / spec.R0);
}

CutoffDerivatives cutoff_derivatives(const DomainSpec& spec, const Vec3& y) {
  const double r = y.norm();
  const double t = (r - spec.r_s - spec.R0) / spec.R0;
  if (t <= 0.0) return {1.0, Vec3::Zero(), Mat3::Zero()};
  if (t >= 1.0) return {0.0, Vec3::Zero(), Mat3::Zero()};
  const double d1 = -smoothstep_d1(t) / spec.R0;
  const double d2 = -smoothstep_d2(t) / (spec.R0 * spec.R0);
  const Vec3 n = y / r;
  const Mat3 nn = n * n.transpose();
  return {1.0 - smoothstep(t), d1 * n, d2 * nn + (d1 / r) * (planar_projector(spec.dim) - nn)};
}

Mesh::Mesh(const DomainSpec& spec, const Resolution& res) : spec_(spec), res_(res) {
  spec_.validate();
  if (spec_.dim == 2) res_.n_phi = 0;
  std::ostringstream os;
  if (res_.n_r < 8 || res_.n_theta < 8) {
    os << "resolution must have at least 8 cells per direction, got " << res_.n_r << "x"
       << res_.n_theta;
    throw ConstructionError(os.str());
  }
  if (spec_.dim == 3 && (res_.n_phi < 8 || res_.n_phi % 2 != 0)) {
    os << "mesh.N_phi must be even and at least 8 in 3D, got " << res_.n_phi;
    throw ConstructionError(os.str());
  }
  dq_[0] = 1.0 / res_.n_r;
  if (spec_.dim == 2) {
    dq_[1] = 2.0 * kPi / res_.n_theta;
  } else {
    dq_[1] = kPi / res_.n_theta;
    dq_[2] = 2.0 * kPi / res_.n_phi;
  }
  for (int c = 1; c < 3; ++c) two_sin_[c] = 2.0 * std::sin(dq_[c]);
  x_.resize(static_cast<std::size_t>(radial_nodes()) * n1() * n2());
  build_topology();
  build_frames();
  build_nodes();
  build_volumes();
  build_patches();
}

std::size_t Mesh::cell_count() const {
  return static_cast<std::size_t>(res_.n_r) * n1() * n2();
}

Vec3 Mesh::unit_dir(double a, double b) const {
  if (dim() == 2) return {std::cos(a), std::sin(a), 0.0};
  return {std::sin(a) * std::cos(b), std::sin(a) * std::sin(b), std::cos(a)};
}

double Mesh::outer_distance(const Vec3& e) const {
  const double b = spec_.offset.dot(e);
  return -b + std::sqrt(b * b - spec_.offset.squaredNorm() + spec_.R_o * spec_.R_o);
}

double Mesh::q1(std::size_t node) const {
  const int j = angular_index(node);
  return dim() == 2 ? j * dq_[1] : (j + 0.5) * dq_[1];
}

double Mesh::q2(std::size_t node) const {
  return dim() == 2 ? 0.0 : azimuth_index(node) * dq_[2];
}

Vec3 Mesh::chart(double xi, double a, double b) const {
  const Vec3 e = unit_dir(a, b);
  return ((1.0 - xi) * spec_.r_s + xi * outer_distance(e)) * e;
}

Mat3 Mesh::chart_jacobian(double xi, double a, double b) const {
  const Vec3 e = unit_dir(a, b);
  Vec3 e1, e2;
  if (dim() == 2) {
    e1 = {-std::sin(a), std::cos(a), 0.0};
    e2 = Vec3::UnitZ();
  } else {
    e1 = {std::cos(a) * std::cos(b), std::cos(a) * std::sin(b), -std::sin(a)};
    e2 = std::sin(a) * Vec3(-std::sin(b), std::cos(b), 0.0);
  }
  const double bb = spec_.offset.dot(e);
  const double root = std::sqrt(bb * bb - spec_.offset.squaredNorm() + spec_.R_o * spec_.R_o);
  const double t = -bb + root;
  const double rho = (1.0 - xi) * spec_.r_s + xi * t;
  const double dt1 = spec_.offset.dot(e1) * (-1.0 + bb / root);
  Mat3 j;
  j.col(0) = (t - spec_.r_s) * e;
  j.col(1) = xi * dt1 * e + rho * e1;
  if (dim() == 2) {
    j.col(2) = Vec3::UnitZ();
  } else {
    const double dt2 = spec_.offset.dot(e2) * (-1.0 + bb / root);
    j.col(2) = xi * dt2 * e + rho * e2;
  }
  return j;
}

void Mesh::build_topology() {
  const int nr = res_.n_r;
  const int m1 = n1();
  const int m2 = n2();
  nb_.assign(node_count() * 3 * 4, -1);
  for (int k = 0; k < m2; ++k) {
    for (int j = 0; j < m1; ++j) {
      for (int i = 0; i <= nr; ++i) {
        const std::size_t node = index(i, j, k);
        for (int o : {-2, -1, 1, 2}) {
          const int slot = offset_slot(o);
          if (i + o >= 0 && i + o <= nr) nb_[(node * 3 + 0) * 4 + slot] = static_cast<std::int32_t>(index(i + o, j, k));
          if (dim() == 2) {
            const int jj = ((j + o) % m1 + m1) % m1;
            nb_[(node * 3 + 1) * 4 + slot] = static_cast<std::int32_t>(index(i, jj, k));
          } else {
            // Colatitude neighbours continue across a pole onto the opposite
            // meridian.
            int jj = j + o;
            int kk = k;
            if (jj < 0) {
              jj = -jj - 1;
              kk = (k + m2 / 2) % m2;
            } else if (jj >= m1) {
              jj = 2 * m1 - 1 - jj;
              kk = (k + m2 / 2) % m2;
            }
            nb_[(node * 3 + 1) * 4 + slot] = static_cast<std::int32_t>(index(i, jj, kk));
            const int kz = ((k + o) % m2 + m2) % m2;
            nb_[(node * 3 + 2) * 4 + slot] = static_cast<std::int32_t>(index(i, j, kz));
          }
        }
      }
    }
  }
}

void Mesh::build_frames() {
  const int m2 = n2();
  transport_.assign(static_cast<std::size_t>(3) * 4 * m2, Mat3::Identity());
  generator_.assign(static_cast<std::size_t>(3) * m2, Mat3::Zero());
  for (int k = 0; k < m2; ++k) {
    const double az = dim() == 2 ? 0.0 : k * dq_[2];
    const Vec3 axis1 = dim() == 2 ? Vec3::UnitZ() : Vec3(-std::sin(az), std::cos(az), 0.0);
    generator_[1 * m2 + k] = skew(axis1);
    if (dim() == 3) generator_[2 * m2 + k] = skew(Vec3::UnitZ());
    for (int o : {-2, -1, 1, 2}) {
      const int slot = offset_slot(o);
      transport_[(1 * 4 + slot) * m2 + k] = axis_rotation(axis1, -o * dq_[1]);
      if (dim() == 3) transport_[(2 * 4 + slot) * m2 + k] = axis_rotation(Vec3::UnitZ(), -o * dq_[2]);
    }
  }
}

double Mesh::d_scalar(const double* f, std::size_t node, int c) const {
  const double h = dq_[c];
  if (c == 0) {
    const int i = radial_index(node);
    if (i == 0) return (-3.0 * f[node] + 4.0 * f[node + 1] - f[node + 2]) / (2.0 * h);
    if (i == res_.n_r) return (3.0 * f[node] - 4.0 * f[node - 1] + f[node - 2]) / (2.0 * h);
    return (f[node + 1] - f[node - 1]) / (2.0 * h);
  }
  // Angular differences divide by 2 sin(h): first harmonics, and with them
  // linear functions on a concentric mesh, are then differentiated exactly.
  return (f[neighbor(node, c, 1)] - f[neighbor(node, c, -1)]) / two_sin_[c];
}

Vec3 Mesh::d_vector(const Vec3* f, std::size_t node, int c) const {
  const double h = dq_[c];
  if (c == 0) {
    const int i = radial_index(node);
    if (i == 0) return (-3.0 * f[node] + 4.0 * f[node + 1] - f[node + 2]) / (2.0 * h);
    if (i == res_.n_r) return (3.0 * f[node] - 4.0 * f[node - 1] + f[node - 2]) / (2.0 * h);
    return (f[node + 1] - f[node - 1]) / (2.0 * h);
  }
  // Same 2 sin(h) divisor as the scalar case; here it keeps uniform fields
  // exact as well.
  return generator(node, c) * f[node] +
         (transport(node, c, 1) * f[neighbor(node, c, 1)] -
          transport(node, c, -1) * f[neighbor(node, c, -1)]) /
             two_sin_[c];
}

Vec3 Mesh::gradient(const double* f, std::size_t node) const {
  Vec3 g = Vec3::Zero();
  for (int c = 0; c < dim(); ++c) g += d_scalar(f, node, c) * grad_q(node, c);
  return g;
}

Mat3 Mesh::gradient(const Vec3* f, std::size_t node) const {
  Mat3 g = Mat3::Zero();
  for (int c = 0; c < dim(); ++c) g += d_vector(f, node, c) * grad_q(node, c).transpose();
  return g;
}

void Mesh::build_nodes() {
  const std::size_t n = node_count();
  for (std::size_t node = 0; node < n; ++node) x_[node] = chart(xi(node), q1(node), q2(node));

  ray_len_.resize(static_cast<std::size_t>(n1()) * n2());
  for (std::size_t ray = 0; ray < ray_len_.size(); ++ray) {
    const std::size_t node = ray * radial_nodes();
    ray_len_[ray] = (x_[node + res_.n_r] - x_[node]).norm();
  }

  // The metric comes from differencing the node coordinates with the same
  // stencils that act on the solution, so linear fields have exact discrete
  // gradients at every node.
  gq_.resize(n * 3);
  for (std::size_t node = 0; node < n; ++node) {
    Mat3 jac;
    jac.col(2) = Vec3::UnitZ();
    for (int c = 0; c < dim(); ++c) jac.col(c) = d_vector(x_.data(), node, c);
    const double det = jac.determinant();
    if (!(det > 0.0)) {
      std::ostringstream os;
      os << "non-positive discrete chart Jacobian " << det << " at node " << node;
      throw ConstructionError(os.str());
    }
    const Mat3 inv = jac.inverse();
    for (int c = 0; c < 3; ++c) gq_[node * 3 + c] = inv.row(c).transpose();
  }
}

void Mesh::build_volumes() {
  const auto volume = [&](double x0, double x1, double a0, double a1, double b0, double b1) {
    return gauss(x0, x1, [&](double xi) {
      return gauss(a0, a1, [&](double a) {
        if (dim() == 2) return chart_jacobian(xi, a, 0.0).determinant();
        return gauss(b0, b1, [&](double b) { return chart_jacobian(xi, a, b).determinant(); });
      });
    });
  };
  const std::size_t n = node_count();
  vol_.resize(n);
  cell_vol_.assign(cell_count(), 0.0);
  for (std::size_t node = 0; node < n; ++node) {
    const double x = xi(node);
    const double a = q1(node);
    const double b = q2(node);
    const double h1 = 0.5 * dq_[1];
    const double h2 = 0.5 * dq_[2];
    const double lo = std::max(0.0, x - 0.5 * dq_[0]);
    const double hi = std::min(1.0, x + 0.5 * dq_[0]);
    vol_[node] = volume(lo, hi, a - h1, a + h1, b - h2, b + h2);
    const int i = radial_index(node);
    if (i < res_.n_r) {
      const std::size_t cell =
          static_cast<std::size_t>(i) +
          static_cast<std::size_t>(res_.n_r) * (angular_index(node) + static_cast<std::size_t>(n1()) * azimuth_index(node));
      cell_vol_[cell] = volume(x, x + dq_[0], a - h1, a + h1, b - h2, b + h2);
      if (!(cell_vol_[cell] > 0.0)) throw ConstructionError("non-positive cell volume");
    }
  }
}

void Mesh::build_patches() {
  solid_.tag = PatchTag::solid;
  outer_.tag = PatchTag::outer;
  const auto normal_at = [&](double xi, double a, double b) -> Vec3 {
    const Vec3 e = unit_dir(a, b);
    if (xi == 0.0) return -e;
    return (spec_.offset + outer_distance(e) * e) / spec_.R_o;
  };
  const auto area_element = [&](double xi, double a, double b) {
    const Mat3 j = chart_jacobian(xi, a, b);
    if (dim() == 2) return j.col(1).norm();
    return j.col(1).cross(j.col(2)).norm();
  };
  for (int k = 0; k < n2(); ++k) {
    for (int j = 0; j < n1(); ++j) {
      for (BoundaryPatch* patch : {&solid_, &outer_}) {
        const double xi = patch == &solid_ ? 0.0 : 1.0;
        const std::size_t node = index(patch == &solid_ ? 0 : res_.n_r, j, k);
        const double a = q1(node);
        const double b = q2(node);
        const double h1 = 0.5 * dq_[1];
        const double h2 = 0.5 * dq_[2];
        double w;
        Vec3 nsum;
        if (dim() == 2) {
          w = gauss(a - h1, a + h1, [&](double s) { return area_element(xi, s, 0.0); });
          nsum = gauss_vec(a - h1, a + h1,
                           [&](double s) -> Vec3 { return area_element(xi, s, 0.0) * normal_at(xi, s, 0.0); });
        } else {
          w = gauss(a - h1, a + h1, [&](double s) {
            return gauss(b - h2, b + h2, [&](double r) { return area_element(xi, s, r); });
          });
          nsum = gauss_vec(a - h1, a + h1, [&](double s) -> Vec3 {
            return gauss_vec(b - h2, b + h2,
                             [&](double r) -> Vec3 { return area_element(xi, s, r) * normal_at(xi, s, r); });
          });
        }
        patch->nodes.push_back(static_cast<std::uint32_t>(node));
        patch->center.push_back(x_[node]);
        patch->normal.push_back(nsum.normalized());
        patch->weight.push_back(w);
      }
    }
  }
}

Mesh build_mesh(const DomainSpec& spec, const Resolution& res) { return Mesh(spec, res); }

NormalExtension extended_normal(const Mesh& mesh) {
  NormalExtension ext;
  const std::size_t n = mesh.node_count();
  ext.nu.resize(n);
  const DomainSpec& spec = mesh.spec();
  for (std::size_t node = 0; node < n; ++node) {
    const Vec3 e = mesh.chart(0.0, mesh.q1(node), mesh.q2(node)).normalized();
    const Vec3 outer_n = (spec.offset + mesh.chart(1.0, mesh.q1(node), mesh.q2(node))) / spec.R_o;
    const double b = smoothstep(mesh.xi(node));
    ext.nu[node] = (1.0 - b) * (-e) + b * outer_n;
  }
  for (const BoundaryPatch* patch : {&mesh.solid(), &mesh.outer()})
    for (std::size_t f = 0; f < patch->size(); ++f) ext.nu[patch->nodes[f]] = patch->normal[f];
  return ext;
}

double surface_integral(const Mesh&, const BoundaryPatch& patch, std::span<const double> values) {
  if (values.size() != patch.size()) {
    std::ostringstream os;
    os << "surface integrand has " << values.size() << " entries, patch has " << patch.size();
    throw ShapeError(os.str());
  }
  double sum = 0.0;
  for (std::size_t f = 0; f < patch.size(); ++f) sum += patch.weight[f] * values[f];
  return sum;
}

Vec3 surface_integral(const Mesh&, const BoundaryPatch& patch, std::span<const Vec3> values) {
  if (values.size() != patch.size()) {
    std::ostringstream os;
    os << "surface integrand has " << values.size() << " entries, patch has " << patch.size();
    throw ShapeError(os.str());
  }
  Vec3 sum = Vec3::Zero();
  for (std::size_t f = 0; f < patch.size(); ++f) sum += patch.weight[f] * values[f];
  return sum;
}

}  // namespace rigidflow
