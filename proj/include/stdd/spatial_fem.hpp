#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <vector>

namespace stdd {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Region { Whole, Sub1, Sub2 };

const char* to_string(Region region);

enum class NodeKind { Boundary, Interior1, Interior2, Interface };

/// Uniform mesh of (0, 1) with an interface node splitting it into
/// Omega_1 = (0, x_G) and Omega_2 = (x_G, 1).  Nodes 0 and num_elements carry
/// homogeneous Dirichlet data and no degree of freedom.
class SpatialMesh {
 public:
  SpatialMesh(int num_elements, double interface_pos);

  int num_elements() const { return num_elements_; }
  double h() const { return 1.0 / num_elements_; }
  double node(int i) const { return i * h(); }
  int interface_node() const { return interface_node_; }
  double interface_pos() const { return node(interface_node_); }
  NodeKind kind(int node) const;

  /// Mesh nodes carrying a dof in `region`, increasing.  Sub-regions include
  /// the interface node.
  std::vector<int> region_nodes(Region region) const;
  /// Elements [first, last) covering `region`; element e spans nodes e, e+1.
  std::pair<int, int> region_elements(Region region) const;
  /// Position of the interface node inside region_nodes(region); -1 for Whole.
  int interface_local(Region region) const;
  double region_length(Region region) const;

 private:
  int num_elements_;
  int interface_node_;
};

SpatialMesh build_mesh(int num_elements, double interface_pos);

/// Spatial FEM matrices over the free dofs of one region (row = test node).
struct SpatialMatrices {
  Region region;
  std::vector<int> nodes;  // mesh node of each local dof
  int interface_index;     // local index of the interface dof, -1 for Whole
  SparseMatrix stiffness;  // int phi_k' phi_l'
  SparseMatrix mass;       // int phi_k phi_l
};

SpatialMatrices assemble_spatial(const SpatialMesh& mesh, Region region);

/// x-dependent coefficients of an affine flux/reaction pair
///   alpha = a(x) z,  beta = b(x) z + c(x) y.
struct AffineCoefficients {
  std::function<double(double)> a;
  std::function<double(double)> b;
  std::function<double(double)> c;
};

/// Spatial matrix of int a phi_l' phi_k' + b phi_l' phi_k + c phi_l phi_k
/// (row k = test), three-point Gauss per element.
SparseMatrix assemble_affine(const SpatialMesh& mesh, Region region, const AffineCoefficients& coeffs);

/// Values of the discrete harmonic extension (w.r.t. the region stiffness) of
/// a unit interface value, one entry per local dof.  Empty for Whole.
Eigen::VectorXd harmonic_extension(const SpatialMatrices& mats);

}  // namespace stdd
