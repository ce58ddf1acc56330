#include "stdd/spatial_fem.hpp"

#include <Eigen/SparseCholesky>
#include <array>
#include <cmath>
#include <string>

#include "stdd/error.hpp"
#include "stdd/quadrature.hpp"

namespace stdd {

const char* to_string(Region region) {
  switch (region) {
    case Region::Whole: return "whole";
    case Region::Sub1: return "subdomain1";
    case Region::Sub2: return "subdomain2";
  }
  return "?";
}

SpatialMesh::SpatialMesh(int num_elements, double interface_pos) : num_elements_(num_elements) {
  if (num_elements < 2 || num_elements % 2 != 0) {
    throw Error(ErrorKind::InvalidParameter, "num_elements must be an even integer >= 2");
  }
  if (!(interface_pos > 0.0 && interface_pos < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "interface position must lie in (0, 1)");
  }
  const double scaled = interface_pos * num_elements;
  const long nearest = std::lround(scaled);
  if (std::abs(scaled - static_cast<double>(nearest)) > 1e-9 * num_elements) {
    throw Error(ErrorKind::InterfaceNotOnGrid,
                "interface " + std::to_string(interface_pos) + " is not a node of the uniform mesh with " +
                    std::to_string(num_elements) + " elements");
  }
  interface_node_ = static_cast<int>(nearest);
}

SpatialMesh build_mesh(int num_elements, double interface_pos) {
  return SpatialMesh(num_elements, interface_pos);
}

NodeKind SpatialMesh::kind(int node) const {
  if (node <= 0 || node >= num_elements_) return NodeKind::Boundary;
  if (node == interface_node_) return NodeKind::Interface;
  return node < interface_node_ ? NodeKind::Interior1 : NodeKind::Interior2;
}

std::vector<int> SpatialMesh::region_nodes(Region region) const {
  int first = 1;
  int last = num_elements_ - 1;
  if (region == Region::Sub1) last = interface_node_;
  if (region == Region::Sub2) first = interface_node_;
  std::vector<int> nodes;
  for (int i = first; i <= last; ++i) nodes.push_back(i);
  return nodes;
}

std::pair<int, int> SpatialMesh::region_elements(Region region) const {
  switch (region) {
    case Region::Whole: return {0, num_elements_};
    case Region::Sub1: return {0, interface_node_};
    case Region::Sub2: return {interface_node_, num_elements_};
  }
  return {0, 0};
}

int SpatialMesh::interface_local(Region region) const {
  switch (region) {
    case Region::Whole: return -1;
    case Region::Sub1: return interface_node_ - 1;
    case Region::Sub2: return 0;
  }
  return -1;
}

double SpatialMesh::region_length(Region region) const {
  const auto [first, last] = region_elements(region);
  return (last - first) * h();
}

namespace {

// Local dof index of mesh node `node` in a region whose first dof is `first_node`.
struct LocalNumbering {
  int first_node;
  int last_node;
  int operator()(int node) const {
    return (node < first_node || node > last_node) ? -1 : node - first_node;
  }
};

LocalNumbering numbering(const SpatialMesh& mesh, Region region) {
  const auto nodes = mesh.region_nodes(region);
  return {nodes.front(), nodes.back()};
}

template <typename ElementFn>
SparseMatrix assemble(const SpatialMesh& mesh, Region region, ElementFn element_matrix) {
  const auto nodes = mesh.region_nodes(region);
  const LocalNumbering local = numbering(mesh, region);
  const auto [first, last] = mesh.region_elements(region);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int e = first; e < last; ++e) {
    const std::array<int, 2> dofs = {local(e), local(e + 1)};
    const std::array<std::array<double, 2>, 2> ke = element_matrix(e);
    for (int a = 0; a < 2; ++a) {
      if (dofs[a] < 0 || mesh.kind(e + a) == NodeKind::Boundary) continue;
      for (int b = 0; b < 2; ++b) {
        if (dofs[b] < 0 || mesh.kind(e + b) == NodeKind::Boundary) continue;
        triplets.emplace_back(dofs[a], dofs[b], ke[a][b]);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(nodes.size());
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace

SpatialMatrices assemble_spatial(const SpatialMesh& mesh, Region region) {
  const double h = mesh.h();
  SpatialMatrices out;
  out.region = region;
  out.nodes = mesh.region_nodes(region);
  out.interface_index = mesh.interface_local(region);
  out.stiffness = assemble(mesh, region, [h](int) {
    return std::array<std::array<double, 2>, 2>{{{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}}};
  });
  out.mass = assemble(mesh, region, [h](int) {
    return std::array<std::array<double, 2>, 2>{{{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}}};
  });
  return out;
}

SparseMatrix assemble_affine(const SpatialMesh& mesh, Region region, const AffineCoefficients& coeffs) {
  const double h = mesh.h();
  const QuadratureRule ref = gauss_legendre(3);
  return assemble(mesh, region, [&](int e) {
    std::array<std::array<double, 2>, 2> ke{};
    const double x0 = mesh.node(e);
    for (std::size_t q = 0; q < ref.size(); ++q) {
      const double xi = 0.5 * (ref.nodes[q] + 1.0);
      const double x = x0 + xi * h;
      const double w = 0.5 * ref.weights[q] * h;
      const std::array<double, 2> phi = {1.0 - xi, xi};
      const std::array<double, 2> dphi = {-1.0 / h, 1.0 / h};
      const double a = coeffs.a ? coeffs.a(x) : 0.0;
      const double b = coeffs.b ? coeffs.b(x) : 0.0;
      const double c = coeffs.c ? coeffs.c(x) : 0.0;
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          ke[k][l] += w * (a * dphi[l] * dphi[k] + b * dphi[l] * phi[k] + c * phi[l] * phi[k]);
        }
      }
    }
    return ke;
  });
}

Eigen::VectorXd harmonic_extension(const SpatialMatrices& mats) {
  if (mats.interface_index < 0) return {};
  const Eigen::Index n = mats.stiffness.rows();
  const Eigen::Index g = mats.interface_index;
  Eigen::VectorXd ext = Eigen::VectorXd::Zero(n);
  ext[g] = 1.0;
  if (n == 1) return ext;
  std::vector<int> interior;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k != g) interior.push_back(static_cast<int>(k));
  }
  std::vector<Eigen::Triplet<double>> t_ii;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(interior.size()));
  for (Eigen::Index col = 0; col < mats.stiffness.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(mats.stiffness, col); it; ++it) {
      const auto r = it.row();
      if (r == g) continue;
      const int ri = static_cast<int>(r < g ? r : r - 1);
      if (it.col() == g) {
        rhs[ri] -= it.value();
      } else {
        const int ci = static_cast<int>(it.col() < g ? it.col() : it.col() - 1);
        t_ii.emplace_back(ri, ci, it.value());
      }
    }
  }
  SparseMatrix k_ii(rhs.size(), rhs.size());
  k_ii.setFromTriplets(t_ii.begin(), t_ii.end());
  Eigen::SimplicialLDLT<SparseMatrix> solver(k_ii);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularSystem, "interior stiffness block is not SPD");
  }
  const Eigen::VectorXd interior_values = solver.solve(rhs);
  for (std::size_t i = 0; i < interior.size(); ++i) ext[interior[i]] = interior_values[static_cast<Eigen::Index>(i)];
  return ext;
}

}  // namespace stdd
