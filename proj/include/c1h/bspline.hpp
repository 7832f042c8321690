#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace c1h {

using Index = std::int64_t;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// S_p^r on [0,1]: open knot vector, every interior breakpoint repeated p-r
// times. `level` splits each base interval into 2^level equal parts, so the
// knots of deep levels are computed on demand instead of being stored.
class SplineSpace {
 public:
  SplineSpace() = default;
  SplineSpace(int degree, int regularity, std::vector<double> breakpoints,
              int level = 0);

  int degree() const { return p_; }
  int regularity() const { return r_; }
  int multiplicity() const { return p_ - r_; }
  int level() const { return level_; }
  // Interior breakpoints of level 0.
  const std::vector<double>& base_breakpoints() const { return interior_; }

  Index num_elements() const { return (Index(interior_.size()) + 1) << level_; }
  Index num_interior_breakpoints() const { return num_elements() - 1; }
  Index dimension() const {
    return p_ + 1 + num_interior_breakpoints() * multiplicity();
  }
  Index num_knots() const { return dimension() + p_ + 1; }

  // Element boundaries, e = 0..num_elements().
  double breakpoint(Index e) const;
  double knot(Index i) const;
  Index knot_breakpoint(Index i) const;
  // Element containing xi; xi = 1 belongs to the last element.
  Index find_element(double xi) const;
  // Index e with breakpoint(e) == x; throws if x is not a breakpoint.
  Index breakpoint_index(double x) const;
  // Inclusive element range of supp N_i.
  std::pair<Index, Index> support(Index i) const;
  // Lowest function index that is nonzero on element e (p+1 in total).
  Index first_on_element(Index e) const { return e * multiplicity(); }

  double greville(Index i) const;
  std::vector<double> knot_vector() const;
  std::vector<double> interior_breakpoints() const;

  SplineSpace refined() const;
  SplineSpace with(int degree, int regularity) const;
  bool same_space(const SplineSpace& o) const;

 private:
  int p_ = 0;
  int r_ = 0;
  int level_ = 0;
  std::vector<double> interior_;
  std::vector<double> base_;  // 0, interior_..., 1
};

SplineSpace make_space(int p, int r, const std::vector<double>& T);

struct DerivedSpaces {
  SplineSpace smooth;  // S_p^{r+1}
  SplineSpace lower;   // S_{p-1}^r
  Index n0 = 0, n1 = 0;
};

DerivedSpaces derived_spaces(const SplineSpace& s);

// Values and derivatives of the p+1 functions nonzero at xi.
struct BasisWindow {
  Index first = 0;
  Eigen::MatrixXd ders;  // (max_deriv+1) x (p+1)
};

BasisWindow eval_basis(const SplineSpace& s, double xi, int max_deriv);

// Same, on a given element (useful at breakpoints). Writes row-major
// (max_deriv+1) x (p+1) into out.
void eval_basis_on_element(const SplineSpace& s, Index e, double xi,
                           int max_deriv, double* out);

// Single function value/derivative.
double eval_function(const SplineSpace& s, Index i, double xi, int deriv = 0);

std::vector<double> greville(const SplineSpace& s);

// Sparse row: coefficients c[k] belong to index first + k.
struct SparseRow {
  Index first = 0;
  std::vector<double> c;
  Index last() const { return first + Index(c.size()) - 1; }
};

// Coefficients in `target` of a function g supported in [lo, hi] (breakpoints
// of target) and lying in target. Greville collocation over the functions whose
// support meets (lo, hi); coefficients of functions reaching outside [lo, hi]
// vanish exactly and are dropped.
SparseRow collocate(const SplineSpace& target, double lo, double hi,
                    const std::function<double(double)>& g);

// N_i of `source` written in `target` (target must contain source).
SparseRow express_in(const SplineSpace& target, const SplineSpace& source,
                     Index i);

// Row i of the dyadic refinement matrix, by local collocation.
SparseRow refinement_row(const SplineSpace& coarse, Index i);

// Boehm insertion of all knots in `fine` that are missing from `coarse`.
// Result is coarse-dim x fine-dim with N_coarse = Lambda N_fine.
SpMat knot_insertion_matrix(int p, const std::vector<double>& coarse_knots,
                            const std::vector<double>& fine_knots);

struct Refinement {
  SplineSpace fine;
  SpMat lambda;
};

Refinement refine_dyadic(const SplineSpace& s);

}  // namespace c1h
