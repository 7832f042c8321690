#include "c1h/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "c1h/errors.hpp"

namespace c1h {

TwoLevelRow two_level_row(const C1Space& coarse, const C1Space& fine, Index k) {
  std::map<Index, double> acc;
  const auto id = coarse.decode(k);
  auto add_row = [&](const SparseRow& row, Index offset, double f) {
    for (std::size_t t = 0; t < row.c.size(); ++t) {
      if (row.c[t] != 0.0) acc[offset + row.first + Index(t)] += f * row.c[t];
    }
  };
  // Interface coefficients follow from the trace and the transversal
  // derivative, the only data fine interface functions carry. tau1 halves,
  // hence the factor 1/2 on the derivative block.
  if (id.kind == C1Space::Kind::Gamma0) {
    add_row(refinement_row(coarse.smooth(), id.i), 0, 1.0);
  } else if (id.kind == C1Space::Kind::Gamma1) {
    add_row(refinement_row(coarse.lower(), id.i), fine.gamma1_offset(), 0.5);
  }
  // Interior coefficients are the refined tensor coefficients off the bands.
  std::unordered_map<Index, SparseRow> rows;
  auto row_of = [&](Index a) -> const SparseRow& {
    auto it = rows.find(a);
    if (it == rows.end()) it = rows.emplace(a, refinement_row(coarse.space(), a)).first;
    return it->second;
  };
  const int band = fine.first_band();
  for (Patch s : kPatches) {
    for (const auto& t : coarse.tensor_terms(k, s)) {
      const SparseRow ra = row_of(t.a);
      const SparseRow& rb = row_of(t.b);
      for (std::size_t u = 0; u < ra.c.size(); ++u) {
        const Index A = ra.first + Index(u);
        if (A < band || ra.c[u] == 0.0) continue;
        for (std::size_t v = 0; v < rb.c.size(); ++v) {
          if (rb.c[v] == 0.0) continue;
          acc[fine.interior_index(s, A, rb.first + Index(v))] += t.c * ra.c[u] * rb.c[v];
        }
      }
    }
  }
  TwoLevelRow out;
  for (const auto& [j, c] : acc) {
    if (c != 0.0) out.emplace_back(j, c);
  }
  return out;
}

SpMat two_level_matrix(const C1Space& coarse, const C1Space& fine) {
  if (coarse.smoothness() != fine.smoothness() ||
      !fine.space().same_space(coarse.space().refined())) {
    throw ValidationError("two_level_matrix: fine space is not the dyadic refinement");
  }
  std::vector<Eigen::Triplet<double, Index>> trip;
  for (Index k = 0; k < coarse.dimension(); ++k) {
    for (const auto& [j, c] : two_level_row(coarse, fine, k)) trip.emplace_back(k, j, c);
  }
  SpMat m(coarse.dimension(), fine.dimension());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

HierarchicalSpace::HierarchicalSpace(std::shared_ptr<const TwoPatchGeometry> geom,
                                     GluingData gluing, SplineSpace space, Smoothness sm) {
  levels_.push_back(std::make_unique<C1Space>(std::move(geom), gluing, std::move(space), sm));
  refined_.resize(1);
  rebuild();
}

bool HierarchicalSpace::in_domain(const Element& e) const {
  if (e.level < 0 || e.level >= num_levels()) return false;
  const Index ne = level(e.level).space().num_elements();
  if (e.i1 < 0 || e.i2 < 0 || e.i1 >= ne || e.i2 >= ne) return false;
  return e.level == 0 || refined_[e.level - 1].count(e.parent()) > 0;
}

bool HierarchicalSpace::is_refined(const Element& e) const {
  return e.level >= 0 && e.level < num_levels() && refined_[e.level].count(e) > 0;
}

const std::set<Element>& HierarchicalSpace::refined(int l) const { return refined_.at(l); }

void HierarchicalSpace::refine(const std::vector<Element>& elements) {
  for (const auto& e : elements) {
    if (!in_domain(e)) {
      throw ValidationError("refine: element outside its level's subdomain (level " +
                            std::to_string(e.level) + ")");
    }
  }
  if (elements.empty()) return;
  for (const auto& e : elements) refined_[e.level].insert(e);
  while (!refined_.back().empty()) {
    const C1Space& top = *levels_.back();
    levels_.push_back(std::make_unique<C1Space>(top.geometry_ptr(), top.gluing(),
                                                top.space().refined(), top.smoothness()));
    refined_.emplace_back();
  }
  rebuild();
}

void HierarchicalSpace::refine_uniform() { refine(leaves_); }

std::vector<Element> HierarchicalSpace::domain_elements(int l) const {
  std::vector<Element> out;
  if (l == 0) {
    const Index ne = base().space().num_elements();
    for (Patch s : kPatches) {
      for (Index i = 0; i < ne; ++i) {
        for (Index j = 0; j < ne; ++j) out.push_back({0, s, i, j});
      }
    }
    return out;
  }
  for (const auto& e : refined_[l - 1]) {
    for (const auto& c : e.children()) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool HierarchicalSpace::support_inside(const C1Space& W, Index k, bool refined_only) const {
  const int l = W.level();
  for (const auto& b : W.support(k)) {
    for (Index i = b.e1lo; i <= b.e1hi; ++i) {
      for (Index j = b.e2lo; j <= b.e2hi; ++j) {
        const Element e{l, b.patch, i, j};
        if (refined_only ? !is_refined(e) : !in_domain(e)) return false;
      }
    }
  }
  return true;
}

void HierarchicalSpace::rebuild() {
  const int L = num_levels();
  active_.assign(L, {});
  leaves_.clear();
  std::vector<Index> fs;
  for (int l = 0; l < L; ++l) {
    const C1Space& W = level(l);
    const auto elems = domain_elements(l);
    std::vector<Index> cand;
    for (const auto& e : elems) {
      W.functions_on_element(e.patch, e.i1, e.i2, fs);
      cand.insert(cand.end(), fs.begin(), fs.end());
      if (!is_refined(e)) leaves_.push_back(e);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (Index k : cand) {
      if (support_inside(W, k, false) && !support_inside(W, k, true)) {
        active_[l].push_back(k);
      }
    }
  }
  offsets_.assign(L + 1, 0);
  dofs_.clear();
  for (int l = 0; l < L; ++l) {
    offsets_[l + 1] = offsets_[l] + Index(active_[l].size());
    for (Index k : active_[l]) dofs_.push_back({l, k, Index(dofs_.size())});
  }
}

std::vector<Index> HierarchicalSpace::deactivated(int l) const {
  const C1Space& W = level(l);
  std::vector<Index> fs, cand;
  for (const auto& e : domain_elements(l)) {
    W.functions_on_element(e.patch, e.i1, e.i2, fs);
    cand.insert(cand.end(), fs.begin(), fs.end());
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::vector<Index> out;
  for (Index k : cand) {
    if (support_inside(W, k, false) && support_inside(W, k, true)) out.push_back(k);
  }
  return out;
}

Index HierarchicalSpace::dof_index(int l, Index k) const {
  if (l < 0 || l >= num_levels()) return -1;
  const auto& a = active_[l];
  auto it = std::lower_bound(a.begin(), a.end(), k);
  if (it == a.end() || *it != k) return -1;
  return offsets_[l] + Index(it - a.begin());
}

Element HierarchicalSpace::locate_leaf(Patch s, double xi1, double xi2) const {
  const auto& sp0 = base().space();
  Element e{0, s, sp0.find_element(xi1), sp0.find_element(xi2)};
  while (is_refined(e)) {
    const auto& sp = level(e.level + 1).space();
    e = Element{e.level + 1, s, sp.find_element(xi1), sp.find_element(xi2)};
  }
  return e;
}

void HierarchicalSpace::leaf_basis(const Element& e, LeafBasis& out) const {
  if (!is_leaf(e)) throw ValidationError("leaf_basis: element is not a leaf");
  out.element = e;
  out.dofs.clear();
  out.groups.clear();
  std::vector<Index> fs;
  for (int l = 0; l <= e.level; ++l) {
    const Element a = e.ancestor(l);
    level(l).functions_on_element(a.patch, a.i1, a.i2, fs);
    LeafBasis::Group g{l, a, {}};
    for (Index k : fs) {
      const Index d = dof_index(l, k);
      if (d < 0) continue;
      g.local.push_back(k);
      out.dofs.push_back(d);
    }
    if (!g.local.empty()) out.groups.push_back(std::move(g));
  }
}

std::vector<ActiveFunction> HierarchicalSpace::active_on_element(const Element& e) const {
  LeafBasis lb;
  leaf_basis(e, lb);
  std::vector<ActiveFunction> out;
  std::size_t t = 0;
  for (const auto& g : lb.groups) {
    for (Index k : g.local) out.push_back({g.level, k, lb.dofs[t++]});
  }
  return out;
}

void HierarchicalSpace::eval_leaf(const LeafBasis& lb, double xi1, double xi2,
                                  std::vector<Derivs>& out) const {
  out.clear();
  std::vector<Derivs> tmp;
  for (const auto& g : lb.groups) {
    level(g.level).eval_on_element(g.ancestor.patch, g.ancestor.i1, g.ancestor.i2, xi1,
                                   xi2, g.local, tmp);
    out.insert(out.end(), tmp.begin(), tmp.end());
  }
}

Derivs HierarchicalSpace::eval(const Eigen::VectorXd& coeffs, Patch s, double xi1,
                               double xi2, bool physical) const {
  if (coeffs.size() != num_dofs()) throw ValidationError("eval: wrong coefficient length");
  LeafBasis lb;
  leaf_basis(locate_leaf(s, xi1, xi2), lb);
  std::vector<Derivs> ds;
  eval_leaf(lb, xi1, xi2, ds);
  Derivs r;
  for (std::size_t t = 0; t < ds.size(); ++t) {
    const double c = coeffs[lb.dofs[t]];
    r.v += c * ds[t].v;
    r.d1 += c * ds[t].d1;
    r.d2 += c * ds[t].d2;
    r.d11 += c * ds[t].d11;
    r.d12 += c * ds[t].d12;
    r.d22 += c * ds[t].d22;
  }
  if (!physical) return r;
  return PhysicalMap(geometry().eval(s, xi1, xi2, 2))(r);
}

std::array<double, 4> HierarchicalSpace::element_box(const Element& e) const {
  const auto& sp = level(e.level).space();
  return {sp.breakpoint(e.i1), sp.breakpoint(e.i1 + 1), sp.breakpoint(e.i2),
          sp.breakpoint(e.i2 + 1)};
}

std::string HierarchicalSpace::to_json() const {
  nlohmann::ordered_json j;
  j["degree"] = degree();
  j["regularity"] = base().space().regularity();
  j["smoothness"] = smoothness() == Smoothness::C1 ? "C1" : "C0";
  j["ndof"] = num_dofs();
  j["num_leaves"] = leaves_.size();
  auto& lv = j["levels"] = nlohmann::ordered_json::array();
  for (int l = 0; l < num_levels(); ++l) {
    const C1Space& W = level(l);
    nlohmann::ordered_json o;
    o["level"] = l;
    o["elements_per_direction"] = W.space().num_elements();
    o["dimension"] = W.dimension();
    o["n_gamma0"] = W.n_gamma0();
    o["n_gamma1"] = W.n_gamma1();
    auto& ref = o["refined"] = nlohmann::ordered_json::array();
    for (const auto& e : refined_[l]) ref.push_back({patch_name(e.patch), e.i1, e.i2});
    o["active"] = active_[l];
    lv.push_back(std::move(o));
  }
  return j.dump(1);
}

}  // namespace c1h
