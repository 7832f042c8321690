#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "c1h/hierarchy.hpp"
#include "c1h/problems.hpp"
#include "c1h/quadrature.hpp"

namespace c1h {

using SpMatC = Eigen::SparseMatrix<double>;

enum class Edge { Xi1Lo, Xi1Hi, Xi2Lo, Xi2Hi };

// Quadrature point inside a leaf with physical derivatives of its functions.
struct LeafSample {
  PointContext ctx;
  double weight = 0;  // includes |det J| and the element area
  std::vector<Derivs> d;
};

struct EdgeSample {
  PointContext ctx;
  double weight = 0;  // includes the arc-length factor
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();  // outward for the leaf
  std::vector<Derivs> d;
};

void sample_leaf(const HierarchicalSpace& H, const LeafBasis& lb, const QuadratureRule& q,
                 std::vector<LeafSample>& out);
void sample_edge(const HierarchicalSpace& H, const LeafBasis& lb, Edge edge,
                 const QuadratureRule& q, std::vector<EdgeSample>& out);
// Edges of the leaf on the outer boundary (xi1 = 1, xi2 = 0, xi2 = 1).
std::vector<Edge> boundary_edges(const HierarchicalSpace& H, const Element& e);
// Longer physical diagonal of the element.
double element_diameter(const HierarchicalSpace& H, const Element& e);
// Element extent normal to a boundary edge: area / edge length. This is the
// size entering the Nitsche penalties.
double boundary_height(const HierarchicalSpace& H, const Element& e, Edge edge);

struct AssemblyOptions {
  int quad_points = 0;  // per direction; 0 means p + 1
  bool parallel = true;
};

struct AssembledSystem {
  SpMatC A;
  Eigen::VectorXd b;
  double penalty = 0;   // gamma for Poisson, sigma1 for the bilaplacian
  double penalty2 = 0;  // sigma2 for the bilaplacian
};

// Symmetric Nitsche form for -Lap u = f, u = g on the outer boundary.
AssembledSystem assemble_poisson(const HierarchicalSpace& H, const ScalarField& f,
                                 const ExactField& g, const AssemblyOptions& opt = {});
// int Lap u Lap v with symmetric weak enforcement of dn u = dn g and a
// penalty for u = g.
AssembledSystem assemble_bilaplacian(const HierarchicalSpace& H, const ScalarField& f,
                                     const ExactField& g, const AssemblyOptions& opt = {});

// Jacobi-scaled sparse LDL^T; throws SolverError unless the matrix is
// positive definite and the relative residual is below 1e-10.
Eigen::VectorXd solve(const AssembledSystem& sys);

struct ErrorNorms {
  double l2 = 0, h1 = 0, h2 = 0;              // of u_h - u
  double u_l2 = 0, u_h1 = 0, u_h2 = 0;        // of u
};

ErrorNorms error_norms(const HierarchicalSpace& H, const Eigen::VectorXd& u,
                       const ExactField& exact, int quad_points = 0, bool parallel = true);

}  // namespace c1h
