#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rigidflow/eos.hpp"
#include "rigidflow/geometry.hpp"
#include "rigidflow/kinematics.hpp"
#include "rigidflow/solid.hpp"

namespace rigidflow {

struct FluidField {
  std::vector<double> p;
  std::vector<Vec3> u;
  std::vector<double> s;

  FluidField() = default;
  explicit FluidField(std::size_t n) : p(n, 0.0), u(n, Vec3::Zero()), s(n, 0.0) {}
  static FluidField uniform(std::size_t n, double p0, const Vec3& u0, double s0);

  std::size_t size() const { return p.size(); }

  // this = a * this + b * x
  void combine(double a, double b, const FluidField& x);
  FluidField operator+(const FluidField& o) const;
  FluidField operator-(const FluidField& o) const;
  FluidField operator*(double a) const;
};

// Coefficient data that depends only on (theta, configuration), evaluated
// once per stage time and shared by every residual evaluation at that time.
struct NodeCoefficients {
  Vec3 us = Vec3::Zero();              // transported solid velocity J1^{-1} V(phi)
  Mat3 M = Mat3::Identity();           // J1^T J1
  Mat3 Minv = Mat3::Identity();
  Mat3 J1inv = Mat3::Identity();
  Mat3 gradV = Mat3::Zero();           // grad_y V at phi
  Mat3 K = Mat3::Zero();               // J1^{-1} grad_y V J1
  Tensor3 T = zero_tensor();           // J1^{-1} J2
  Vec3 b = Vec3::Zero();               // b_j = sum_{i,k} (J1^{-1})_{ki} J2[i](j, k)
};

struct NodeKinematics {
  SolidVelocity theta;
  bool trivial = true;  // identity configuration and zero body velocity
  std::vector<NodeCoefficients> node;
};

NodeCoefficients node_coefficients(const DomainSpec& spec, const SolidVelocity& theta,
                                   const Configuration& conf, std::size_t node);
NodeKinematics node_kinematics(const Mesh& mesh, const SolidVelocity& theta,
                               const Configuration& conf);
// Same, filling `out` and reusing its storage.
void node_kinematics(const Mesh& mesh, const SolidVelocity& theta, const Configuration& conf,
                     NodeKinematics& out);

// Dense (dim+2) x (dim+2) coefficient matrices at one node, in the variable
// order (p, u_1..u_dim, s).
struct CoefficientSet {
  Eigen::MatrixXd A0;
  std::vector<Eigen::MatrixXd> A;  // already include the eps * nu_j shift
  Eigen::MatrixXd B;
};

// Time derivatives of the data at t = 0: U[k] is d^k U/dt^k, theta[k] the
// matching solid derivatives.
struct CompatibilityDerivatives {
  std::vector<FluidField> U;
  std::vector<SolidVelocity> theta;
};

struct Regularization {
  double eps = 0.0;
  NormalExtension nu;
  int K = 0;
  std::vector<FluidField> moments;  // moments[k] = I^k_U
  std::vector<FluidField> fluxes;   // eps * (nu . grad) moments[k]
};

Regularization make_regularization(const Mesh& mesh, double eps,
                                   const CompatibilityDerivatives& compat);
// Regularization with eps = 0 and the given data as the only moment.
Regularization no_regularization(const Mesh& mesh, const FluidField& U0);

struct ReferenceExtension {
  FluidField U;
  FluidField F;
};
ReferenceExtension reference_extension(const Regularization& reg, double t);

enum class Limiter { none, llf };

struct FluidOptions {
  double cfl = 0.4;
  Limiter limiter = Limiter::llf;
  double det_floor = kDefaultDetFloor;
  double speed_floor = 1e-12;
};

struct ResidualOptions {
  bool dissipation = true;
  bool regularization = true;
};

struct FluidStepResult {
  FluidField U;
  Configuration conf;
};

class FluidSolver {
 public:
  FluidSolver(const Mesh& mesh, const EosParams& eos, const HyperbolicityBox& box,
              Regularization reg, FluidOptions opts = {});

  const Mesh& mesh() const { return *mesh_; }
  const EosParams& eos() const { return eos_; }
  const HyperbolicityBox& box() const { return box_; }
  const Regularization& regularization() const { return reg_; }
  const FluidOptions& options() const { return opts_; }

  CoefficientSet assemble_coefficients(const NodeKinematics& kin, const FluidField& U,
                                       std::size_t node) const;

  // Semi-discrete right-hand side dU/dt = R at time t. When eps_part is
  // non-null it receives the regularization contribution alone (the eps
  // transport terms and F), used by the boundary closure.
  void residual(const FluidField& U, const NodeKinematics& kin, double t, FluidField& R,
                ResidualOptions ro = {}, FluidField* eps_part = nullptr) const;

  // Strong wall closure: sets the normal velocity to the wall velocity along
  // the incoming characteristic and keeps the outgoing one.
  void apply_boundary(FluidField& U, const NodeKinematics& kin) const;

  double boundary_mismatch(const FluidField& U, const NodeKinematics& kin) const;
  double max_stable_dt(const FluidField& U, const NodeKinematics& kin) const;

  // Throws RegionError naming the first node outside the box.
  void check_state(const FluidField& U) const;

  // One SSP-RK3 step with the configuration advanced alongside.
  FluidStepResult step(const FluidField& U, const ThetaSampler& theta, const Configuration& conf,
                       double t, double dt) const;
  // Same, with the stage kinematics supplied by the caller.
  FluidField step_with(const FluidField& U, const NodeKinematics& k0, const NodeKinematics& kh,
                       const NodeKinematics& k1, double t, double dt) const;

  // The discrete right-hand sides of the fluid and solid blocks together,
  // without dissipation or regularization. Used by the compatibility
  // recursion.
  CompatibilityDerivatives compatibility_derivatives(const FluidField& U0,
                                                     const SolidVelocity& theta0,
                                                     const BodyProps& props, int K) const;

 private:
  template <bool Trivial>
  void residual_impl(const FluidField& U, const NodeKinematics& kin, double t, FluidField& R,
                     ResidualOptions ro, FluidField* eps_part) const;
  void add_dissipation(const FluidField& U, const std::vector<double>& speeds,
                       FluidField& R) const;
  void stage_update(FluidField& out, double a, const FluidField& base, double b,
                    const FluidField& v, double dt, const FluidField& R, const FluidField& Reps,
                    const NodeKinematics& kin) const;

  const Mesh* mesh_;
  EosParams eos_;
  HyperbolicityBox box_;
  Regularization reg_;
  FluidOptions opts_;
};

// Pressure values on the SOLID patch faces.
std::vector<double> solid_pressure_trace(const Mesh& mesh, const FluidField& U);

}  // namespace rigidflow
