#include "c1h/adaptivity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "c1h/errors.hpp"

namespace c1h {

double ElementIndicators::total() const {
  double s = 0;
  for (double e : eta) s += e * e;
  return std::sqrt(s);
}

ElementIndicators estimate_residual(const HierarchicalSpace& H, const Eigen::VectorXd& u,
                                    const ScalarField& f, const ExactField& g,
                                    bool parallel) {
  if (u.size() != H.num_dofs()) throw ValidationError("estimate_residual: wrong length");
  const double gamma = 10.0 * (H.degree() + 1);
  const QuadratureRule q = gauss_legendre(H.degree() + 1);
  const auto& leaves = H.leaves();
  ElementIndicators ind;
  ind.elements = leaves;
  ind.eta.assign(leaves.size(), 0.0);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(leaves.size()); ++i) {
    try {
      const Element& e = leaves[i];
      LeafBasis lb;
      H.leaf_basis(e, lb);
      const double h = element_diameter(H, e);
      auto combine = [&](const std::vector<Derivs>& d) {
        Derivs r;
        for (std::size_t k = 0; k < d.size(); ++k) {
          const double c = u[lb.dofs[k]];
          r.v += c * d[k].v;
          r.d1 += c * d[k].d1;
          r.d2 += c * d[k].d2;
          r.d11 += c * d[k].d11;
          r.d22 += c * d[k].d22;
        }
        return r;
      };
      double interior = 0, jump = 0, bnd = 0;
      std::vector<LeafSample> pts;
      sample_leaf(H, lb, q, pts);
      for (const auto& s : pts) {
        const Derivs uh = combine(s.d);
        const double r = f(s.ctx) + uh.d11 + uh.d22;
        interior += s.weight * r * r;
      }
      std::vector<EdgeSample> es;
      if (e.i1 == 0) {
        // Interface edge: normal-derivative jump against the other patch.
        const Patch other = e.patch == Patch::L ? Patch::R : Patch::L;
        sample_edge(H, lb, Edge::Xi1Lo, q, es);
        for (const auto& s : es) {
          const Derivs mine = combine(s.d);
          const Derivs theirs = H.eval(u, other, 0.0, s.ctx.xi2, true);
          const double jmp = (mine.d1 - theirs.d1) * s.normal.x() +
                             (mine.d2 - theirs.d2) * s.normal.y();
          jump += s.weight * jmp * jmp;
        }
      }
      for (Edge edge : boundary_edges(H, e)) {
        const double hb = boundary_height(H, e, edge);
        sample_edge(H, lb, edge, q, es);
        double m2 = 0;
        for (const auto& s : es) {
          const double m = combine(s.d).v - g(s.ctx).v;
          m2 += s.weight * m * m;
        }
        bnd += gamma / hb * m2;
      }
      ind.eta[i] = std::sqrt(h * h * interior + 0.5 * h * jump + bnd);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return ind;
}

bool doerfler_reached(double marked_sq, double total_sq, double theta) {
  return marked_sq >= theta * theta * total_sq * (1.0 - 1e-12);
}

std::vector<std::size_t> mark_doerfler(const std::vector<double>& eta, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in (0, 1]");
  std::vector<std::size_t> order(eta.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eta[a] > eta[b]; });
  double total = 0;
  for (std::size_t k : order) total += eta[k] * eta[k];
  std::vector<std::size_t> out;
  if (total == 0.0) return out;
  double acc = 0;
  for (std::size_t k : order) {
    out.push_back(k);
    acc += eta[k] * eta[k];
    if (doerfler_reached(acc, total, theta)) break;
  }
  return out;
}

std::vector<Element> mark_doerfler(const ElementIndicators& ind, double theta) {
  std::vector<Element> out;
  for (std::size_t k : mark_doerfler(ind.eta, theta)) out.push_back(ind.elements[k]);
  return out;
}

void refine_marked(HierarchicalSpace& H, const std::vector<Element>& marked) {
  for (const auto& e : marked) {
    if (!H.is_leaf(e)) throw ValidationError("refine_marked: element is not active");
  }
  H.refine(marked);
}

std::vector<Element> corner_block(const HierarchicalSpace& H) {
  std::vector<Element> out;
  for (Patch s : kPatches) {
    const Element c = H.locate_leaf(s, 0.0, 0.0);
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 4; ++j) {
        const Element e{c.level, s, i, j};
        if (H.is_leaf(e)) out.push_back(e);
      }
    }
  }
  return out;
}

HierarchicalSpace initial_space(const Problem& problem, int degree, Smoothness sm) {
  if (degree < 3) throw ValidationError("degree must be at least 3");
  auto geom = std::make_shared<TwoPatchGeometry>(load_geometry(data_path(problem.geometry_file)));
  const GluingData glue = compute_gluing(*geom);
  std::vector<double> T;
  for (int i = 1; i < problem.initial_elements; ++i) T.push_back(double(i) / problem.initial_elements);
  return HierarchicalSpace(geom, glue, make_space(degree, degree - 2, T), sm);
}

std::vector<AdaptiveRecord> adaptive_loop(
    const LoopConfig& cfg, const std::function<void(const AdaptiveRecord&)>& on_record) {
  const Problem& P = cfg.problem;
  const bool bilap = P.kind == PdeKind::Bilaplacian;
  if (bilap && cfg.mode == RefineMode::Adaptive) {
    throw ValidationError("the bilaplacian example supports uniform and corner modes only");
  }
  if (cfg.mode == RefineMode::Corner && P.geometry_file != "lshape.json") {
    throw ValidationError("corner mode needs the L-shaped domain (examples 1 and 4)");
  }
  if (cfg.mode == RefineMode::Adaptive && !(cfg.theta > 0 && cfg.theta <= 1)) {
    throw ValidationError("theta must lie in (0, 1]");
  }
  if (cfg.budget <= 0) throw ValidationError("budget must be positive");
  HierarchicalSpace H = initial_space(P, cfg.degree, cfg.smoothness);
  AssemblyOptions opt;
  opt.parallel = cfg.parallel;

  std::vector<AdaptiveRecord> out;
  for (int it = 0;; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    AdaptiveRecord rec;
    rec.iteration = it;
    rec.ndof = H.num_dofs();
    const AssembledSystem sys = bilap ? assemble_bilaplacian(H, P.source, P.exact, opt)
                                      : assemble_poisson(H, P.source, P.exact, opt);
    const Eigen::VectorXd u = solve(sys);
    const ErrorNorms en = error_norms(H, u, P.exact, 0, cfg.parallel);
    rec.l2 = en.l2;
    rec.h1 = en.h1;
    rec.h2 = en.h2;
    const double scale = P.relative_error ? (bilap ? en.u_h2 : en.u_h1) : 1.0;
    rec.error = (bilap ? en.h2 : en.h1) / scale;
    rec.estimator = std::numeric_limits<double>::quiet_NaN();
    std::vector<Element> marked;
    if (!bilap) {
      const auto ind = estimate_residual(H, u, P.source, P.exact, cfg.parallel);
      rec.estimator = ind.total() / scale;
      if (cfg.mode == RefineMode::Adaptive) marked = mark_doerfler(ind, cfg.theta);
    }
    if (cfg.mode == RefineMode::Uniform) marked = H.leaves();
    if (cfg.mode == RefineMode::Corner) marked = corner_block(H);
    rec.marked = Index(marked.size());
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(rec);
    if (on_record) on_record(rec);
    if (rec.ndof >= cfg.budget || it >= cfg.max_iter || marked.empty()) break;
    refine_marked(H, marked);
  }
  return out;
}

}  // namespace c1h
