#include <cmath>

#include "doctest.h"
#include "rigidflow/errors.hpp"
#include "rigidflow/kinematics.hpp"

using namespace rigidflow;

namespace {

Mesh disk_mesh(int nr = 12, int nt = 24) {
  return build_mesh(DomainSpec{2, 0.5, 2.0, 0.5, Vec3::Zero()}, {nr, nt, 0});
}

Configuration run(const Mesh& m, const ThetaSampler& th, double T, int steps,
                  double* worst_orth = nullptr) {
  Configuration c = Configuration::identity(m);
  const double dt = T / steps;
  for (int s = 0; s < steps; ++s) {
    c = advance_configuration(m, c, th, s * dt, dt);
    if (worst_orth) *worst_orth = std::max(*worst_orth, configuration_residuals(m, c).orthogonality);
  }
  return c;
}

}  // namespace

TEST_CASE("transport velocity") {
  const DomainSpec s{2, 0.5, 2.0, 0.5, Vec3::Zero()};
  const SolidVelocity zero{};
  const SolidVelocity tr{Vec3(1.0, -0.5, 0.0), Vec3::Zero()};
  const SolidVelocity rot{Vec3(0.3, 0.2, 0.0), Vec3(0, 0, 1.7)};
  CHECK(transport_velocity(s, zero, Vec3::Zero(), Mat3::Identity(), Vec3(0.7, 0.1, 0)).norm() == 0.0);
  CHECK((transport_velocity(s, tr, Vec3::Zero(), Mat3::Identity(), Vec3(0.6, 0.2, 0)) - tr.l).norm() == 0.0);
  CHECK(transport_velocity(s, rot, Vec3::Zero(), Mat3::Identity(), Vec3(1.9, 0.0, 0)).norm() == 0.0);

  // analytic derivatives against central differences
  const Mat3 Q = axis_rotation(Vec3::UnitZ(), 0.4);
  const Vec3 h(0.05, -0.02, 0.0);
  const double d = 1e-5;
  for (const Vec3 y : {Vec3(0.9, 0.5, 0.0), Vec3(-0.6, -0.9, 0.0)}) {
    const VelocityDerivatives vd = transport_velocity_derivatives(s, rot, h, Q, y);
    CHECK((vd.V - transport_velocity(s, rot, h, Q, y)).norm() < 1e-15);
    for (int j = 0; j < 2; ++j) {
      Vec3 e = Vec3::Zero();
      e(j) = d;
      const Vec3 fd = (transport_velocity(s, rot, h, Q, y + e) - transport_velocity(s, rot, h, Q, y - e)) / (2 * d);
      CHECK((vd.grad.col(j) - fd).norm() < 1e-8);
      const Mat3 gfd = (transport_velocity_derivatives(s, rot, h, Q, y + e).grad -
                        transport_velocity_derivatives(s, rot, h, Q, y - e).grad) / (2 * d);
      for (int i = 0; i < 3; ++i) CHECK((vd.hess[i].col(j) - gfd.row(i).transpose()).norm() < 1e-6);
    }
  }
}

TEST_CASE("solid boundary velocity") {
  const Mesh m = disk_mesh();
  const SolidVelocity spin{Vec3::Zero(), Vec3(0, 0, 1)};
  const Vec3 v = solid_boundary_velocity(spin, Vec3(0.5, 0.0, 0.0));
  CHECK((v - Vec3(0.0, 0.5, 0.0)).norm() < 1e-15);
  const SolidVelocity tr{Vec3(1, 0, 0), Vec3::Zero()};
  for (auto n : m.solid().nodes) CHECK((solid_boundary_velocity(m, tr, n) - Vec3(1, 0, 0)).norm() == 0.0);
  CHECK(solid_boundary_velocity(m, SolidVelocity{}, m.solid().nodes[3]).norm() == 0.0);
  CHECK_THROWS_AS(solid_boundary_velocity(m, tr, m.outer().nodes[0]), DomainError);
  CHECK_THROWS_AS(solid_boundary_velocity(m, tr, 5), DomainError);
}

TEST_CASE("rest configuration is stationary") {
  const Mesh m = disk_mesh();
  const Configuration c0 = Configuration::identity(m);
  const ConfigurationResiduals r0 = configuration_residuals(m, c0);
  CHECK(r0.orthogonality <= 1e-14);
  CHECK(r0.gradient_defect <= 1e-12);
  CHECK(r0.boundary_metric <= 1e-14);
  const Configuration c = run(m, [](double) { return SolidVelocity{}; }, 1.0, 10);
  CHECK(c.h.norm() == 0.0);
  CHECK(c.Q == Mat3::Identity());
  for (std::size_t n = 0; n < m.node_count(); ++n) {
    CHECK(c.phi[n] == m.position(n));
    CHECK(c.J1[n] == Mat3::Identity());
  }
}

TEST_CASE("steady rotation matches the closed form") {
  const Mesh m = disk_mesh();
  const double Om = 0.8, T = 1.0;
  double worst = 0.0;
  const Configuration c =
      run(m, [=](double) { return SolidVelocity{Vec3::Zero(), Vec3(0, 0, Om)}; }, T, 1000, &worst);
  CHECK((c.Q - axis_rotation(Vec3::UnitZ(), Om * T)).norm() < 1e-8);
  CHECK(worst <= 1e-10);
  // Q carries the solid surface: phi = h + Q x with J1 = Q there.
  for (auto n : m.solid().nodes) {
    CHECK((c.phi[n] - c.Q * m.position(n)).norm() < 1e-10);
    CHECK((c.J1[n] - c.Q).norm() < 1e-10);
  }
  // Outer nodes never move and concentric circles map to themselves.
  double drift = 0.0;
  for (std::size_t n = 0; n < m.node_count(); ++n) {
    drift = std::max(drift, std::abs(c.phi[n].norm() - m.position(n).norm()));
    if (m.radial_index(n) == m.resolution().n_r) {
      CHECK(c.phi[n] == m.position(n));
      CHECK(c.J1[n] == Mat3::Identity());
    }
  }
  CHECK(drift <= 1e-8);
  CHECK(configuration_residuals(m, c).boundary_metric <= 1e-10);
}

TEST_CASE("3D rotation about a tilted axis stays orthogonal") {
  const Mesh m = build_mesh(DomainSpec{3, 0.5, 2.0, 0.5, Vec3::Zero()}, {8, 8, 16});
  const Vec3 w = Vec3(0.3, -0.5, 0.8);
  const double T = 0.5;
  double worst = 0.0;
  const Configuration c = run(m, [=](double) { return SolidVelocity{Vec3::Zero(), w}; }, T, 100, &worst);
  // Q' = Q [w]x with constant w integrates to Q = exp(T [w]x).
  CHECK((c.Q - axis_rotation(w.normalized(), w.norm() * T)).norm() < 1e-8);
  CHECK(worst <= 1e-10);
}

TEST_CASE("pure translation is rigid inside the cutoff zone") {
  const Mesh m = disk_mesh();
  const Vec3 l(0.2, -0.1, 0.0);
  const double T = 0.5;
  const Configuration c = run(m, [=](double) { return SolidVelocity{l, Vec3::Zero()}; }, T, 50);
  CHECK((c.h - T * l).norm() < 1e-13);
  const DomainSpec& s = m.spec();
  int checked = 0;
  for (std::size_t n = 0; n < m.node_count(); ++n) {
    // a node whose whole path stays where chi = 1
    if (m.position(n).norm() + T * l.norm() <= s.r_s + s.R0) {
      CHECK((c.phi[n] - m.position(n) - T * l).norm() < 1e-12);
      CHECK((c.J1[n] - Mat3::Identity()).norm() < 1e-12);
      ++checked;
    }
  }
  CHECK(checked >= m.solid().size());
  CHECK(configuration_residuals(m, c).boundary_metric <= 1e-10);
}

TEST_CASE("Hermite midpoint tracks the configuration") {
  const Mesh m = disk_mesh();
  const ThetaSampler th = [](double t) {
    return SolidVelocity{Vec3(0.1 * std::cos(t), 0.05, 0.0), Vec3(0, 0, 0.5 + 0.2 * t)};
  };
  const double dt = 0.1;
  Configuration mid;
  const Configuration c0 = Configuration::identity(m);
  advance_configuration(m, c0, th, 0.0, dt, &mid);
  Configuration ref = c0;
  for (int s = 0; s < 50; ++s) ref = advance_configuration(m, ref, th, s * dt / 100, dt / 100);
  double err = (mid.h - ref.h).norm() + (mid.Q - ref.Q).norm();
  for (std::size_t n = 0; n < m.node_count(); ++n) err = std::max(err, (mid.phi[n] - ref.phi[n]).norm());
  CHECK(err < 1e-5);
}

TEST_CASE("gradient defect converges at second order") {
  const ThetaSampler th = [](double) { return SolidVelocity{Vec3(0.3, 0.1, 0.0), Vec3(0, 0, 0.6)}; };
  double prev = 0.0;
  for (int nr : {32, 64, 128}) {
    const Mesh m = disk_mesh(nr, 2 * nr);
    const Configuration c = run(m, th, 0.5, 20);
    const double d = configuration_residuals(m, c).gradient_defect;
    if (prev > 0.0) CHECK(prev / d > 3.5);
    prev = d;
  }
}

TEST_CASE("metric examples") {
  Configuration c;
  c.J1 = {Mat3::Identity(), axis_rotation(Vec3::UnitZ(), 0.7), Mat3::Identity(), Mat3::Zero()};
  c.J1[2].diagonal() << 2.0, 1.0, 1.0;
  CHECK((metric(c, 0) - Mat3::Identity()).norm() < 1e-15);
  CHECK((metric(c, 1) - Mat3::Identity()).norm() < 1e-15);
  Mat3 d = Mat3::Identity();
  d(0, 0) = 4.0;
  CHECK((metric(c, 2) - d).norm() == 0.0);
  CHECK_THROWS_AS(metric(c, 3), DegeneracyError);
}

TEST_CASE("entangled configuration raises a degeneracy error") {
  // Driving the rigid zone into the outer wall crushes the cutoff band.
  const Mesh m = disk_mesh(8, 16);
  const ThetaSampler th = [](double) { return SolidVelocity{Vec3(1.0, 0.0, 0.0), Vec3::Zero()}; };
  const auto drive = [&](double floor) {
    Configuration c = Configuration::identity(m);
    for (int s = 0; s < 300; ++s) c = advance_configuration(m, c, th, s * 0.01, 0.01, nullptr, floor);
  };
  CHECK_NOTHROW(drive(1e-12));
  CHECK_THROWS_AS(drive(0.5), DegeneracyError);
}
