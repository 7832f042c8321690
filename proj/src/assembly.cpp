#include "c1h/assembly.hpp"

#include <cmath>
#include <exception>

#include <Eigen/SparseCholesky>

#include "c1h/errors.hpp"

namespace c1h {

void sample_leaf(const HierarchicalSpace& H, const LeafBasis& lb, const QuadratureRule& q,
                 std::vector<LeafSample>& out) {
  const Element& e = lb.element;
  const auto box = H.element_box(e);
  const double w1 = box[1] - box[0], w2 = box[3] - box[2];
  const std::size_t nq = q.points.size();
  out.resize(nq * nq);
  std::vector<Derivs> par;
  for (std::size_t a = 0; a < nq; ++a) {
    for (std::size_t b = 0; b < nq; ++b) {
      LeafSample& s = out[a * nq + b];
      const double xi1 = box[0] + w1 * q.points[a];
      const double xi2 = box[2] + w2 * q.points[b];
      const GeometryPoint gp = H.geometry().eval(e.patch, xi1, xi2, 2);
      const PhysicalMap map(gp);
      s.ctx = {e.patch, xi1, xi2, gp.x};
      s.weight = q.weights[a] * q.weights[b] * w1 * w2 * std::abs(map.det);
      H.eval_leaf(lb, xi1, xi2, par);
      s.d.resize(par.size());
      for (std::size_t k = 0; k < par.size(); ++k) s.d[k] = map(par[k]);
    }
  }
}

void sample_edge(const HierarchicalSpace& H, const LeafBasis& lb, Edge edge,
                 const QuadratureRule& q, std::vector<EdgeSample>& out) {
  const Element& e = lb.element;
  const auto box = H.element_box(e);
  const bool along1 = edge == Edge::Xi2Lo || edge == Edge::Xi2Hi;  // edge runs along xi1
  const double len = along1 ? box[1] - box[0] : box[3] - box[2];
  out.resize(q.points.size());
  std::vector<Derivs> par;
  for (std::size_t a = 0; a < q.points.size(); ++a) {
    double xi1, xi2;
    if (along1) {
      xi1 = box[0] + len * q.points[a];
      xi2 = edge == Edge::Xi2Lo ? box[2] : box[3];
    } else {
      xi1 = edge == Edge::Xi1Lo ? box[0] : box[1];
      xi2 = box[2] + len * q.points[a];
    }
    const GeometryPoint gp = H.geometry().eval(e.patch, xi1, xi2, 2);
    const PhysicalMap map(gp);
    const Eigen::Vector2d t = gp.jac.col(along1 ? 0 : 1);
    Eigen::Vector2d inward = gp.jac.col(along1 ? 1 : 0);
    if (edge == Edge::Xi1Hi || edge == Edge::Xi2Hi) inward = -inward;
    Eigen::Vector2d n(t.y(), -t.x());
    n /= t.norm();
    if (n.dot(inward) > 0) n = -n;
    EdgeSample& s = out[a];
    s.ctx = {e.patch, xi1, xi2, gp.x};
    s.weight = q.weights[a] * len * t.norm();
    s.normal = n;
    H.eval_leaf(lb, xi1, xi2, par);
    s.d.resize(par.size());
    for (std::size_t k = 0; k < par.size(); ++k) s.d[k] = map(par[k]);
  }
}

std::vector<Edge> boundary_edges(const HierarchicalSpace& H, const Element& e) {
  const Index ne = H.level(e.level).space().num_elements();
  std::vector<Edge> out;
  if (e.i1 == ne - 1) out.push_back(Edge::Xi1Hi);
  if (e.i2 == 0) out.push_back(Edge::Xi2Lo);
  if (e.i2 == ne - 1) out.push_back(Edge::Xi2Hi);
  return out;
}

double element_diameter(const HierarchicalSpace& H, const Element& e) {
  const auto b = H.element_box(e);
  auto F = [&](double u, double v) { return H.geometry().eval(e.patch, u, v, 0).x; };
  return std::max((F(b[0], b[2]) - F(b[1], b[3])).norm(), (F(b[1], b[2]) - F(b[0], b[3])).norm());
}

double boundary_height(const HierarchicalSpace& H, const Element& e, Edge edge) {
  const auto b = H.element_box(e);
  const QuadratureRule q = gauss_legendre(H.degree() + 1);
  const bool along1 = edge == Edge::Xi2Lo || edge == Edge::Xi2Hi;
  double area = 0, len = 0;
  for (std::size_t a = 0; a < q.points.size(); ++a) {
    const double u = b[0] + (b[1] - b[0]) * q.points[a];
    const double v = b[2] + (b[3] - b[2]) * q.points[a];
    for (std::size_t c = 0; c < q.points.size(); ++c) {
      const double vv = b[2] + (b[3] - b[2]) * q.points[c];
      area += q.weights[a] * q.weights[c] *
              std::abs(H.geometry().eval(e.patch, u, vv, 1).jac.determinant());
    }
    const double eu = along1 ? u : (edge == Edge::Xi1Lo ? b[0] : b[1]);
    const double ev = along1 ? (edge == Edge::Xi2Lo ? b[2] : b[3]) : v;
    const auto gp = H.geometry().eval(e.patch, eu, ev, 1);
    len += q.weights[a] * gp.jac.col(along1 ? 0 : 1).norm();
  }
  area *= (b[1] - b[0]) * (b[3] - b[2]);
  len *= along1 ? b[1] - b[0] : b[3] - b[2];
  return area / len;
}

namespace {

struct LocalSystem {
  std::vector<Index> dofs;
  Eigen::MatrixXd K;
  Eigen::VectorXd F;
};

// Runs `kernel` on every leaf and merges in leaf order, chunk by chunk, so the
// parallel and serial paths produce bit-identical matrices.
template <class Kernel>
AssembledSystem assemble_leaves(const HierarchicalSpace& H, const Kernel& kernel,
                                bool parallel) {
  const auto& leaves = H.leaves();
  const Index N = H.num_dofs();
  AssembledSystem sys;
  sys.A.resize(N, N);
  sys.b = Eigen::VectorXd::Zero(N);
  constexpr std::size_t kChunk = 1024;
  std::vector<LocalSystem> local;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t start = 0; start < leaves.size(); start += kChunk) {
    const std::size_t end = std::min(leaves.size(), start + kChunk);
    local.assign(end - start, {});
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(end - start); ++i) {
      try {
        local[i] = kernel(leaves[start + i]);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    trip.clear();
    for (const auto& L : local) {
      const auto n = L.dofs.size();
      for (std::size_t a = 0; a < n; ++a) {
        sys.b[L.dofs[a]] += L.F[a];
        for (std::size_t b = 0; b < n; ++b) {
          if (L.K(a, b) != 0.0) trip.emplace_back(L.dofs[a], L.dofs[b], L.K(a, b));
        }
      }
    }
    SpMatC part(N, N);
    part.setFromTriplets(trip.begin(), trip.end());
    sys.A += part;
  }
  sys.A.makeCompressed();
  return sys;
}

int default_points(const HierarchicalSpace& H, int q) { return q > 0 ? q : H.degree() + 1; }

}  // namespace

AssembledSystem assemble_poisson(const HierarchicalSpace& H, const ScalarField& f,
                                 const ExactField& g, const AssemblyOptions& opt) {
  const double gamma = 10.0 * (H.degree() + 1);
  const QuadratureRule q = gauss_legendre(default_points(H, opt.quad_points));
  auto kernel = [&](const Element& e) {
    LocalSystem L;
    LeafBasis lb;
    H.leaf_basis(e, lb);
    const auto n = lb.dofs.size();
    L.dofs = lb.dofs;
    L.K = Eigen::MatrixXd::Zero(n, n);
    L.F = Eigen::VectorXd::Zero(n);
    std::vector<LeafSample> pts;
    sample_leaf(H, lb, q, pts);
    for (const auto& s : pts) {
      const double fv = f(s.ctx);
      for (std::size_t a = 0; a < n; ++a) {
        const auto& da = s.d[a];
        L.F[a] += s.weight * fv * da.v;
        for (std::size_t b = 0; b < n; ++b) {
          L.K(a, b) += s.weight * (da.d1 * s.d[b].d1 + da.d2 * s.d[b].d2);
        }
      }
    }
    const auto edges = boundary_edges(H, e);
    if (edges.empty()) return L;
    std::vector<EdgeSample> es;
    std::vector<double> dn(n);
    for (Edge edge : edges) {
      const double h = boundary_height(H, e, edge);
      sample_edge(H, lb, edge, q, es);
      for (const auto& s : es) {
        const double gv = g(s.ctx).v;
        for (std::size_t a = 0; a < n; ++a) {
          dn[a] = s.d[a].d1 * s.normal.x() + s.d[a].d2 * s.normal.y();
        }
        for (std::size_t a = 0; a < n; ++a) {
          const double va = s.d[a].v;
          L.F[a] += s.weight * (-gv * dn[a] + gamma / h * gv * va);
          for (std::size_t b = 0; b < n; ++b) {
            const double vb = s.d[b].v;
            L.K(a, b) += s.weight * (-dn[b] * va - vb * dn[a] + gamma / h * va * vb);
          }
        }
      }
    }
    return L;
  };
  auto sys = assemble_leaves(H, kernel, opt.parallel);
  sys.penalty = gamma;
  return sys;
}

AssembledSystem assemble_bilaplacian(const HierarchicalSpace& H, const ScalarField& f,
                                     const ExactField& g, const AssemblyOptions& opt) {
  const double p1 = H.degree() + 1;
  const double sigma1 = 10.0 * p1 * p1, sigma2 = sigma1;
  const QuadratureRule q = gauss_legendre(default_points(H, opt.quad_points));
  auto kernel = [&](const Element& e) {
    LocalSystem L;
    LeafBasis lb;
    H.leaf_basis(e, lb);
    const auto n = lb.dofs.size();
    L.dofs = lb.dofs;
    L.K = Eigen::MatrixXd::Zero(n, n);
    L.F = Eigen::VectorXd::Zero(n);
    std::vector<LeafSample> pts;
    sample_leaf(H, lb, q, pts);
    std::vector<double> lap(n);
    for (const auto& s : pts) {
      const double fv = f(s.ctx);
      for (std::size_t a = 0; a < n; ++a) lap[a] = s.d[a].d11 + s.d[a].d22;
      for (std::size_t a = 0; a < n; ++a) {
        L.F[a] += s.weight * fv * s.d[a].v;
        for (std::size_t b = 0; b < n; ++b) L.K(a, b) += s.weight * lap[a] * lap[b];
      }
    }
    const auto edges = boundary_edges(H, e);
    if (edges.empty()) return L;
    std::vector<EdgeSample> es;
    std::vector<double> dn(n);
    for (Edge edge : edges) {
      const double h = boundary_height(H, e, edge);
      const double c1 = sigma1 / (h * h * h), c2 = sigma2 / h;
      sample_edge(H, lb, edge, q, es);
      for (const auto& s : es) {
        const ExactValue gv = g(s.ctx);
        const double g1 = gv.v, g2 = gv.grad.dot(s.normal);
        for (std::size_t a = 0; a < n; ++a) {
          dn[a] = s.d[a].d1 * s.normal.x() + s.d[a].d2 * s.normal.y();
          lap[a] = s.d[a].d11 + s.d[a].d22;
        }
        for (std::size_t a = 0; a < n; ++a) {
          const double va = s.d[a].v;
          L.F[a] += s.weight * (-g2 * lap[a] + c2 * g2 * dn[a] + c1 * g1 * va);
          for (std::size_t b = 0; b < n; ++b) {
            L.K(a, b) += s.weight * (-lap[b] * dn[a] - dn[b] * lap[a] + c2 * dn[a] * dn[b] +
                                     c1 * va * s.d[b].v);
          }
        }
      }
    }
    return L;
  };
  auto sys = assemble_leaves(H, kernel, opt.parallel);
  sys.penalty = sigma1;
  sys.penalty2 = sigma2;
  return sys;
}

Eigen::VectorXd solve(const AssembledSystem& sys) {
  const Index n = sys.A.rows();
  if (sys.A.cols() != n || sys.b.size() != n) throw ValidationError("solve: size mismatch");
  if (n == 0) return Eigen::VectorXd();
  Eigen::VectorXd d = sys.A.diagonal();
  for (Index i = 0; i < n; ++i) {
    if (!(d[i] > 0)) {
      throw SolverError("solve: non-positive diagonal entry " + std::to_string(d[i]) +
                        " at row " + std::to_string(i));
    }
    d[i] = 1.0 / std::sqrt(d[i]);
  }
  const SpMatC S = d.asDiagonal() * sys.A * d.asDiagonal();
  Eigen::SimplicialLDLT<SpMatC> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw SolverError("solve: factorization failed");
  const Eigen::VectorXd piv = ldlt.vectorD();
  if (piv.minCoeff() <= 0) {
    throw SolverError("solve: matrix is not positive definite (smallest pivot " +
                      std::to_string(piv.minCoeff()) + ")");
  }
  const double bnorm = sys.b.norm();
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(n);
  Eigen::VectorXd x = d.asDiagonal() * ldlt.solve(d.asDiagonal() * sys.b);
  // One step of iterative refinement keeps the residual check meaningful on
  // badly scaled hierarchies.
  Eigen::VectorXd r = sys.b - sys.A * x;
  x += d.asDiagonal() * ldlt.solve(d.asDiagonal() * r);
  r = sys.b - sys.A * x;
  const double rel = r.norm() / bnorm;
  if (!std::isfinite(rel) || rel > 1e-10) {
    throw SolverError("solve: relative residual " + std::to_string(rel) + " exceeds 1e-10");
  }
  return x;
}

ErrorNorms error_norms(const HierarchicalSpace& H, const Eigen::VectorXd& u,
                       const ExactField& exact, int quad_points, bool parallel) {
  if (u.size() != H.num_dofs()) throw ValidationError("error_norms: wrong length");
  const QuadratureRule q = gauss_legendre(quad_points > 0 ? quad_points : H.degree() + 3);
  const auto& leaves = H.leaves();
  std::vector<std::array<double, 6>> part(leaves.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(leaves.size()); ++i) {
    try {
      LeafBasis lb;
      H.leaf_basis(leaves[i], lb);
      std::vector<LeafSample> pts;
      sample_leaf(H, lb, q, pts);
      std::array<double, 6> acc{};
      for (const auto& s : pts) {
        Derivs uh;
        for (std::size_t k = 0; k < lb.dofs.size(); ++k) {
          const double c = u[lb.dofs[k]];
          uh.v += c * s.d[k].v;
          uh.d1 += c * s.d[k].d1;
          uh.d2 += c * s.d[k].d2;
          uh.d11 += c * s.d[k].d11;
          uh.d12 += c * s.d[k].d12;
          uh.d22 += c * s.d[k].d22;
        }
        const ExactValue ex = exact(s.ctx);
        const double ev = uh.v - ex.v;
        const double e1 = uh.d1 - ex.grad.x(), e2 = uh.d2 - ex.grad.y();
        const double h11 = uh.d11 - ex.hess(0, 0), h22 = uh.d22 - ex.hess(1, 1);
        const double h12 = uh.d12 - 0.5 * (ex.hess(0, 1) + ex.hess(1, 0));
        acc[0] += s.weight * ev * ev;
        acc[1] += s.weight * (e1 * e1 + e2 * e2);
        acc[2] += s.weight * (h11 * h11 + 2 * h12 * h12 + h22 * h22);
        acc[3] += s.weight * ex.v * ex.v;
        acc[4] += s.weight * ex.grad.squaredNorm();
        acc[5] += s.weight * ex.hess.squaredNorm();
      }
      part[i] = acc;
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  std::array<double, 6> tot{};
  for (const auto& a : part) {
    for (int k = 0; k < 6; ++k) tot[k] += a[k];
  }
  return {std::sqrt(tot[0]), std::sqrt(tot[1]), std::sqrt(tot[2]),
          std::sqrt(tot[3]), std::sqrt(tot[4]), std::sqrt(tot[5])};
}

}  // namespace c1h
