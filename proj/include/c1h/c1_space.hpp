#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "c1h/bspline.hpp"
#include "c1h/geometry.hpp"

namespace c1h {

enum class Smoothness { C1, C0 };

// Value and parametric (or physical) first/second derivatives.
struct Derivs {
  double v = 0, d1 = 0, d2 = 0, d11 = 0, d12 = 0, d22 = 0;
};

// Inverse-Jacobian data for the chain rule at one point.
struct PhysicalMap {
  Eigen::Matrix2d jinv;
  double det = 0;
  std::array<Eigen::Matrix2d, 2> hf;  // parametric Hessian of x and y

  explicit PhysicalMap(const GeometryPoint& gp);
  Derivs operator()(const Derivs& p) const;
};

struct TensorTerm {
  Index a, b;  // N_a(xi1) N_b(xi2)
  double c;
};

struct SupportBox {
  Patch patch;
  Index e1lo, e1hi, e2lo, e2hi;  // inclusive element ranges
};

enum class Coordinates { Parametric, Physical };

struct BasisEvalResult {
  struct Entry {
    Index index;
    double value;
    Eigen::Vector2d grad;
    Eigen::Matrix2d hess;
  };
  Coordinates coords = Coordinates::Parametric;
  std::vector<Entry> entries;
};

// One level of the space W: interface trace block, interface derivative block,
// then interior tensor functions of L and R. In C0 mode the two interface
// blocks are replaced by a single block N_0(xi1) N_j(xi2) glued across.
class C1Space {
 public:
  enum class Kind { Gamma0, Gamma1, Interior };
  struct FunctionId {
    Kind kind;
    Patch patch;  // interior only
    Index i, j;   // interface: i; interior: (i, j)
  };

  C1Space(std::shared_ptr<const TwoPatchGeometry> geom, GluingData gluing,
          SplineSpace space, Smoothness sm = Smoothness::C1);

  const TwoPatchGeometry& geometry() const { return *geom_; }
  std::shared_ptr<const TwoPatchGeometry> geometry_ptr() const { return geom_; }
  const GluingData& gluing() const { return gluing_; }
  const SplineSpace& space() const { return space_; }
  const SplineSpace& smooth() const { return smooth_; }
  const SplineSpace& lower() const { return lower_; }
  Smoothness smoothness() const { return sm_; }
  int level() const { return space_.level(); }
  int degree() const { return space_.degree(); }

  Index n() const { return n_; }
  Index n_gamma0() const { return ng0_; }
  Index n_gamma1() const { return ng1_; }
  int first_band() const { return band_; }
  Index n_interior() const { return (n_ - band_) * n_; }
  Index dimension() const { return ng0_ + ng1_ + 2 * n_interior(); }
  double tau1() const { return space_.breakpoint(1); }

  FunctionId decode(Index k) const;
  Index interior_index(Patch s, Index i, Index j) const;
  Index gamma1_offset() const { return ng0_; }

  // Rows of the coupling matrices, computed on first use.
  const SparseRow& b_hat(Index i) const;
  const SparseRow& b_tilde(Patch s, Index i) const;
  const SparseRow& b_bar(Patch s, Index i) const;

  // phi_k o F^(s) as a combination of N_a(xi1) N_b(xi2).
  std::vector<TensorTerm> tensor_terms(Index k, Patch s) const;
  std::vector<SupportBox> support(Index k) const;
  // Sorted indices of the functions not vanishing on element (s, e1, e2).
  void functions_on_element(Patch s, Index e1, Index e2, std::vector<Index>& out) const;

  // Parametric derivatives of the listed functions at a point of element
  // (s, e1, e2). Functions not supported on the element get zeros.
  void eval_on_element(Patch s, Index e1, Index e2, double xi1, double xi2,
                       const std::vector<Index>& funcs, std::vector<Derivs>& out) const;

  // Coupling matrix of patch s: dimension() x n^2, tensor index a*n + b.
  SpMat patch_matrix(Patch s) const;

  C1Space refined() const;

 private:
  std::shared_ptr<const TwoPatchGeometry> geom_;
  GluingData gluing_;
  SplineSpace space_, smooth_, lower_;
  Smoothness sm_;
  Index n_ = 0, ng0_ = 0, ng1_ = 0;
  int band_ = 2;

  using RowCache = std::unordered_map<Index, SparseRow>;
  mutable std::shared_mutex mu_;
  mutable RowCache hat_;
  mutable std::array<RowCache, 2> tilde_, bar_;

  const SparseRow& cached(RowCache& cache, Index i,
                          const std::function<SparseRow()>& make) const;
};

BasisEvalResult eval_c1_basis(const C1Space& W, Patch s, double xi1, double xi2,
                              int max_deriv, Coordinates coords);

// (d1 f - beta_s d2 f) / alpha_s of phi_k at (0, xi2), evaluated from patch s.
double directional_interface_derivative(const C1Space& W, Index k, double xi2,
                                        Patch s = Patch::L);

Eigen::VectorXd to_tensor_coeffs(const C1Space& W, const Eigen::VectorXd& coeffs, Patch s);

// Tensor-product spline value on patch s from coefficients (index a*n + b).
Derivs eval_tensor(const SplineSpace& sp, const Eigen::VectorXd& coeffs, double xi1,
                   double xi2);

}  // namespace c1h
