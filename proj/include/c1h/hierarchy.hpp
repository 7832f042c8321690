#pragma once

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "c1h/c1_space.hpp"

namespace c1h {

// Dyadic element of one patch; ordered by (level, patch, i1, i2).
struct Element {
  int level = 0;
  Patch patch = Patch::L;
  Index i1 = 0, i2 = 0;

  auto operator<=>(const Element&) const = default;
  Element parent() const { return {level - 1, patch, i1 >> 1, i2 >> 1}; }
  Element ancestor(int l) const {
    const int d = level - l;
    return {l, patch, i1 >> d, i2 >> d};
  }
  std::array<Element, 4> children() const {
    return {{{level + 1, patch, 2 * i1, 2 * i2},
             {level + 1, patch, 2 * i1, 2 * i2 + 1},
             {level + 1, patch, 2 * i1 + 1, 2 * i2},
             {level + 1, patch, 2 * i1 + 1, 2 * i2 + 1}}};
  }
};

struct ActiveFunction {
  int level;
  Index index;  // level-local index in the level's C1Space
  Index dof;    // global index
};

// Active functions on one leaf, grouped by level (ascending), for evaluation.
struct LeafBasis {
  Element element;
  std::vector<Index> dofs;
  struct Group {
    int level;
    Element ancestor;
    std::vector<Index> local;
  };
  std::vector<Group> groups;
};

using TwoLevelRow = std::vector<std::pair<Index, double>>;

// Coarse function k written in the basis of the dyadically refined space.
TwoLevelRow two_level_row(const C1Space& coarse, const C1Space& fine, Index k);
SpMat two_level_matrix(const C1Space& coarse, const C1Space& fine);

// Hierarchical space over nested subdomains Omega^0 = Omega, Omega^{l+1} the
// union of the children of refined level-l elements.
class HierarchicalSpace {
 public:
  HierarchicalSpace(std::shared_ptr<const TwoPatchGeometry> geom, GluingData gluing,
                    SplineSpace space, Smoothness sm = Smoothness::C1);

  int num_levels() const { return int(levels_.size()); }
  const C1Space& level(int l) const { return *levels_.at(l); }
  const C1Space& base() const { return *levels_.front(); }
  int degree() const { return base().degree(); }
  Smoothness smoothness() const { return base().smoothness(); }
  const TwoPatchGeometry& geometry() const { return base().geometry(); }

  bool in_domain(const Element& e) const;
  bool is_refined(const Element& e) const;
  bool is_leaf(const Element& e) const { return in_domain(e) && !is_refined(e); }
  const std::set<Element>& refined(int l) const;

  // Adds the children of the given elements to the next level's subdomain.
  // Every element must lie in its level's subdomain.
  void refine(const std::vector<Element>& elements);
  void refine_uniform();

  Index num_dofs() const { return Index(dofs_.size()); }
  const std::vector<ActiveFunction>& dofs() const { return dofs_; }
  const std::vector<Index>& active(int l) const { return active_.at(l); }
  // Level-l functions with support inside Omega^l that are not active.
  std::vector<Index> deactivated(int l) const;
  // Global index of (level, local) or -1 if inactive.
  Index dof_index(int l, Index k) const;

  const std::vector<Element>& leaves() const { return leaves_; }
  Element locate_leaf(Patch s, double xi1, double xi2) const;

  std::vector<ActiveFunction> active_on_element(const Element& e) const;
  void leaf_basis(const Element& e, LeafBasis& out) const;
  // Parametric derivatives of the leaf's functions (order of out.dofs).
  void eval_leaf(const LeafBasis& lb, double xi1, double xi2,
                 std::vector<Derivs>& out) const;
  // Parametric or physical derivatives of sum_k c_k phi_k.
  Derivs eval(const Eigen::VectorXd& coeffs, Patch s, double xi1, double xi2,
              bool physical) const;

  // Parametric box [x0,x1] x [y0,y1] of an element.
  std::array<double, 4> element_box(const Element& e) const;

  std::string to_json() const;

 private:
  std::vector<std::unique_ptr<C1Space>> levels_;
  std::vector<std::set<Element>> refined_;
  std::vector<std::vector<Index>> active_;
  std::vector<Index> offsets_;
  std::vector<ActiveFunction> dofs_;
  std::vector<Element> leaves_;

  std::vector<Element> domain_elements(int l) const;
  bool support_inside(const C1Space& W, Index k, bool refined_only) const;
  void rebuild();
};


}  // namespace c1h
