#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rigidflow/types.hpp"

namespace rigidflow {

enum class PatchTag { solid, outer };

// The solid is centred at the origin. The outer boundary is a circle/sphere
// of radius R_o centred at -offset.
struct DomainSpec {
  int dim = 2;
  double r_s = 0.5;
  double R_o = 2.0;
  double R0 = 0.5;
  Vec3 offset = Vec3::Zero();

  void validate() const;  // throws ConstructionError
};

// Cell counts. In 2D n_theta is the planar angle count; in 3D n_theta counts
// colatitude bands and n_phi (even) counts azimuthal sectors.
struct Resolution {
  int n_r = 16;
  int n_theta = 32;
  int n_phi = 0;
};

// One face per boundary node; the face is the angular band around it.
struct BoundaryPatch {
  PatchTag tag = PatchTag::solid;
  std::vector<std::uint32_t> nodes;
  std::vector<Vec3> center;   // chart image of the node
  std::vector<Vec3> normal;   // unit, into the solid on SOLID, outward on OUTER
  std::vector<double> weight; // face measure

  std::size_t size() const { return nodes.size(); }
};

struct NormalExtension {
  std::vector<Vec3> nu;
};

// Quintic smoothstep 6t^5 - 15t^4 + 10t^3, clamped to [0, 1] outside.
double smoothstep(double t);

struct CutoffDerivatives {
  double value;
  Vec3 grad;
  Mat3 hess;
};

double cutoff(const DomainSpec& spec, const Vec3& y);
CutoffDerivatives cutoff_derivatives(const DomainSpec& spec, const Vec3& y);

class Mesh {
 public:
  Mesh(const DomainSpec& spec, const Resolution& res);

  const DomainSpec& spec() const { return spec_; }
  const Resolution& resolution() const { return res_; }
  int dim() const { return spec_.dim; }

  int radial_nodes() const { return res_.n_r + 1; }
  int n1() const { return res_.n_theta; }
  int n2() const { return dim() == 3 ? res_.n_phi : 1; }
  std::size_t node_count() const { return x_.size(); }
  std::size_t cell_count() const;

  std::size_t index(int i, int j, int k = 0) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(radial_nodes()) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(n1()) * k);
  }
  int radial_index(std::size_t node) const { return static_cast<int>(node % radial_nodes()); }
  int angular_index(std::size_t node) const {
    return static_cast<int>((node / radial_nodes()) % n1());
  }
  int azimuth_index(std::size_t node) const {
    return static_cast<int>(node / (static_cast<std::size_t>(radial_nodes()) * n1()));
  }
  bool on_boundary(std::size_t node) const {
    const int i = radial_index(node);
    return i == 0 || i == res_.n_r;
  }

  // Computational spacing of direction c (0 radial, 1 and 2 angular).
  double spacing(int c) const { return dq_[c]; }

  // Neighbour at offset o in {-2,-1,1,2} along c, or -1 across a wall.
  std::int32_t neighbor(std::size_t node, int c, int o) const {
    return nb_[(node * 3 + c) * 4 + offset_slot(o)];
  }

  // Rotation taking a neighbour's Cartesian vector into the frame
  // continuation of `node` (identity along the radial direction).
  const Mat3& transport(std::size_t node, int c, int o) const {
    return transport_[(static_cast<std::size_t>(c) * 4 + offset_slot(o)) * n2() +
                      (c == 0 ? 0 : azimuth_index(node))];
  }
  const Mat3& generator(std::size_t node, int c) const {
    return generator_[static_cast<std::size_t>(c) * n2() + (c == 0 ? 0 : azimuth_index(node))];
  }

  // Node position, discrete chart metric (gradient of computational
  // coordinate c) and dual-cell quadrature weight.
  const Vec3& position(std::size_t node) const { return x_[node]; }
  const std::vector<Vec3>& positions() const { return x_; }
  const Vec3& grad_q(std::size_t node, int c) const { return gq_[node * 3 + c]; }
  double volume_weight(std::size_t node) const { return vol_[node]; }
  const std::vector<double>& volume_weights() const { return vol_; }
  const std::vector<double>& cell_volumes() const { return cell_vol_; }

  double xi(std::size_t node) const { return static_cast<double>(radial_index(node)) * dq_[0]; }
  // Length of the radial chart line through the node (|P - S|).
  double radial_length(std::size_t node) const { return ray_len_[node / radial_nodes()]; }

  const BoundaryPatch& solid() const { return solid_; }
  const BoundaryPatch& outer() const { return outer_; }
  const BoundaryPatch& patch(PatchTag tag) const { return tag == PatchTag::solid ? solid_ : outer_; }

  // Analytic chart X(xi, q1, q2) and its computational Jacobian.
  Vec3 chart(double xi, double q1, double q2) const;
  Mat3 chart_jacobian(double xi, double q1, double q2) const;
  // Angular coordinates of node (q1, q2); q2 = 0 in 2D.
  double q1(std::size_t node) const;
  double q2(std::size_t node) const;

  // Difference operators along computational direction c. Interior points
  // use central differences, radial walls use one-sided second-order
  // formulas. Vector fields are differenced after transporting neighbours
  // into the local polar/spherical frame, which makes the stencil exact for
  // both uniform fields and fields that are constant in that frame.
  double d_scalar(const double* f, std::size_t node, int c) const;
  Vec3 d_vector(const Vec3* f, std::size_t node, int c) const;

  // Cartesian gradient from computational derivatives.
  Vec3 gradient(const double* f, std::size_t node) const;
  // G(i, j) = d u_i / d x_j.
  Mat3 gradient(const Vec3* f, std::size_t node) const;

 private:
  static int offset_slot(int o) { return o < 0 ? o + 2 : o + 1; }
  Vec3 unit_dir(double q1, double q2) const;
  double outer_distance(const Vec3& e) const;  // t(e)
  void build_topology();
  void build_frames();
  void build_nodes();
  void build_volumes();
  void build_patches();

  DomainSpec spec_;
  Resolution res_;
  double dq_[3] = {0.0, 0.0, 0.0};
  double two_sin_[3] = {0.0, 0.0, 0.0};  // 2 sin(dq) of the angular directions
  std::vector<std::int32_t> nb_;
  std::vector<Mat3> transport_;
  std::vector<Mat3> generator_;
  std::vector<Vec3> x_;
  std::vector<Vec3> gq_;
  std::vector<double> vol_;
  std::vector<double> cell_vol_;
  std::vector<double> ray_len_;
  BoundaryPatch solid_;
  BoundaryPatch outer_;
};

Mesh build_mesh(const DomainSpec& spec, const Resolution& res);

NormalExtension extended_normal(const Mesh& mesh);

// Sum of weight * value over the faces of the patch.
double surface_integral(const Mesh& mesh, const BoundaryPatch& patch,
                        std::span<const double> values);
Vec3 surface_integral(const Mesh& mesh, const BoundaryPatch& patch, std::span<const Vec3> values);

}  // namespace rigidflow
