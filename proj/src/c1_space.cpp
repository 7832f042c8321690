#include "c1h/c1_space.hpp"

#include <algorithm>
#include <mutex>

#include "c1h/errors.hpp"

namespace c1h {

namespace {
// Flat function indices grow like n^2; beyond this level they overflow int64.
constexpr int kMaxLevel = 26;
}  // namespace

PhysicalMap::PhysicalMap(const GeometryPoint& gp) {
  det = gp.jac.determinant();
  jinv = gp.jac.inverse();
  for (int c = 0; c < 2; ++c) {
    hf[c] << gp.d11[c], gp.d12[c], gp.d12[c], gp.d22[c];
  }
}

Derivs PhysicalMap::operator()(const Derivs& p) const {
  const Eigen::Vector2d gx = jinv.transpose() * Eigen::Vector2d(p.d1, p.d2);
  Eigen::Matrix2d h;
  h << p.d11, p.d12, p.d12, p.d22;
  h -= gx[0] * hf[0] + gx[1] * hf[1];
  const Eigen::Matrix2d hx = jinv.transpose() * h * jinv;
  return {p.v, gx[0], gx[1], hx(0, 0), 0.5 * (hx(0, 1) + hx(1, 0)), hx(1, 1)};
}

C1Space::C1Space(std::shared_ptr<const TwoPatchGeometry> geom, GluingData gluing,
                 SplineSpace space, Smoothness sm)
    : geom_(std::move(geom)), gluing_(gluing), space_(std::move(space)), sm_(sm) {
  if (!geom_) throw ValidationError("C1Space: null geometry");
  if (space_.level() > kMaxLevel) {
    throw ValidationError("C1Space: level " + std::to_string(space_.level()) +
                          " exceeds the supported maximum of " +
                          std::to_string(kMaxLevel));
  }
  n_ = space_.dimension();
  if (sm_ == Smoothness::C1) {
    auto d = derived_spaces(space_);
    smooth_ = d.smooth;
    lower_ = d.lower;
    ng0_ = d.n0;
    ng1_ = d.n1;
    band_ = 2;
  } else {
    smooth_ = space_;
    lower_ = space_;
    ng0_ = n_;
    ng1_ = 0;
    band_ = 1;
  }
  if (n_ <= band_) throw ValidationError("C1Space: space too small");
}

C1Space C1Space::refined() const {
  return C1Space(geom_, gluing_, space_.refined(), sm_);
}

C1Space::FunctionId C1Space::decode(Index k) const {
  if (k < 0 || k >= dimension()) throw ValidationError("C1Space: index out of range");
  if (k < ng0_) return {Kind::Gamma0, Patch::L, k, 0};
  if (k < ng0_ + ng1_) return {Kind::Gamma1, Patch::L, k - ng0_, 0};
  const Index r = k - ng0_ - ng1_;
  const Index ni = n_interior();
  const Patch s = r < ni ? Patch::L : Patch::R;
  const Index loc = r % ni;
  return {Kind::Interior, s, band_ + loc / n_, loc % n_};
}

Index C1Space::interior_index(Patch s, Index i, Index j) const {
  return ng0_ + ng1_ + pidx(s) * n_interior() + (i - band_) * n_ + j;
}

const SparseRow& C1Space::cached(RowCache& cache, Index i,
                                 const std::function<SparseRow()>& make) const {
  {
    std::shared_lock lock(mu_);
    auto it = cache.find(i);
    if (it != cache.end()) return it->second;
  }
  SparseRow row = make();
  std::unique_lock lock(mu_);
  return cache.emplace(i, std::move(row)).first->second;
}

const SparseRow& C1Space::b_hat(Index i) const {
  return cached(hat_, i, [&] { return express_in(space_, smooth_, i); });
}

const SparseRow& C1Space::b_tilde(Patch s, Index i) const {
  return cached(tilde_[pidx(s)], i, [&] {
    const int p = space_.degree();
    const double scale = tau1() / p;
    const int q = smooth_.degree();
    return collocate(space_, smooth_.knot(i), smooth_.knot(i + q + 1), [&](double x) {
      return eval_function(smooth_, i, x, 0) +
             gluing_.beta_s_at(s, x) * scale * eval_function(smooth_, i, x, 1);
    });
  });
}

const SparseRow& C1Space::b_bar(Patch s, Index i) const {
  return cached(bar_[pidx(s)], i, [&] {
    const int q = lower_.degree();
    return collocate(space_, lower_.knot(i), lower_.knot(i + q + 1), [&](double x) {
      return gluing_.alpha_at(s, x) * eval_function(lower_, i, x, 0);
    });
  });
}

std::vector<TensorTerm> C1Space::tensor_terms(Index k, Patch s) const {
  std::vector<TensorTerm> out;
  const auto id = decode(k);
  auto push_row = [&](Index a, const SparseRow& row, double f) {
    for (std::size_t t = 0; t < row.c.size(); ++t) {
      if (row.c[t] != 0.0) out.push_back({a, row.first + Index(t), f * row.c[t]});
    }
  };
  switch (id.kind) {
    case Kind::Interior:
      if (id.patch == s) out.push_back({id.i, id.j, 1.0});
      break;
    case Kind::Gamma0:
      if (sm_ == Smoothness::C0) {
        out.push_back({0, id.i, 1.0});
      } else {
        push_row(0, b_hat(id.i), 1.0);
        push_row(1, b_tilde(s, id.i), 1.0);
      }
      break;
    case Kind::Gamma1:
      push_row(1, b_bar(s, id.i), 1.0);
      break;
  }
  return out;
}

std::vector<SupportBox> C1Space::support(Index k) const {
  const auto id = decode(k);
  if (id.kind == Kind::Interior) {
    auto [a0, a1] = space_.support(id.i);
    auto [b0, b1] = space_.support(id.j);
    return {{id.patch, a0, a1, b0, b1}};
  }
  const SplineSpace& sp = id.kind == Kind::Gamma1 ? lower_ : smooth_;
  auto [b0, b1] = sp.support(id.i);
  return {{Patch::L, 0, 0, b0, b1}, {Patch::R, 0, 0, b0, b1}};
}

void C1Space::functions_on_element(Patch s, Index e1, Index e2,
                                   std::vector<Index>& out) const {
  out.clear();
  const int p = space_.degree();
  if (e1 == 0) {
    const Index f0 = smooth_.first_on_element(e2);
    for (Index i = f0; i <= f0 + smooth_.degree(); ++i) out.push_back(i);
    if (sm_ == Smoothness::C1) {
      const Index f1 = lower_.first_on_element(e2);
      for (Index i = f1; i <= f1 + lower_.degree(); ++i) out.push_back(ng0_ + i);
    }
  }
  const Index fa = space_.first_on_element(e1);
  const Index fb = space_.first_on_element(e2);
  for (Index a = std::max<Index>(band_, fa); a <= fa + p; ++a) {
    for (Index b = fb; b <= fb + p; ++b) out.push_back(interior_index(s, a, b));
  }
}

void C1Space::eval_on_element(Patch s, Index e1, Index e2, double xi1, double xi2,
                              const std::vector<Index>& funcs,
                              std::vector<Derivs>& out) const {
  const int p = space_.degree();
  const int w = p + 1;
  // Row-major 3 x (p+1): value, first, second derivative.
  double U[3 * 13], V[3 * 13];
  eval_basis_on_element(space_, e1, xi1, 2, U);
  eval_basis_on_element(space_, e2, xi2, 2, V);
  const Index f1 = space_.first_on_element(e1);
  const Index f2 = space_.first_on_element(e2);

  auto add = [&](Derivs& d, double c, Index a, Index b) {
    const Index la = a - f1, lb = b - f2;
    if (la < 0 || la > p || lb < 0 || lb > p) return;
    const double u0 = U[la], u1 = U[w + la], u2 = U[2 * w + la];
    const double v0 = V[lb], v1 = V[w + lb], v2 = V[2 * w + lb];
    d.v += c * u0 * v0;
    d.d1 += c * u1 * v0;
    d.d2 += c * u0 * v1;
    d.d11 += c * u2 * v0;
    d.d12 += c * u1 * v1;
    d.d22 += c * u0 * v2;
  };
  auto add_row = [&](Derivs& d, Index a, const SparseRow& row) {
    const Index lo = std::max(row.first, f2), hi = std::min(row.last(), f2 + p);
    for (Index b = lo; b <= hi; ++b) add(d, row.c[b - row.first], a, b);
  };

  out.assign(funcs.size(), Derivs{});
  for (std::size_t t = 0; t < funcs.size(); ++t) {
    const auto id = decode(funcs[t]);
    Derivs& d = out[t];
    switch (id.kind) {
      case Kind::Interior:
        if (id.patch == s) add(d, 1.0, id.i, id.j);
        break;
      case Kind::Gamma0:
        if (e1 != 0) break;
        if (sm_ == Smoothness::C0) {
          add(d, 1.0, 0, id.i);
        } else {
          add_row(d, 0, b_hat(id.i));
          add_row(d, 1, b_tilde(s, id.i));
        }
        break;
      case Kind::Gamma1:
        if (e1 == 0) add_row(d, 1, b_bar(s, id.i));
        break;
    }
  }
}

SpMat C1Space::patch_matrix(Patch s) const {
  std::vector<Eigen::Triplet<double, Index>> trip;
  for (Index k = 0; k < dimension(); ++k) {
    for (const auto& t : tensor_terms(k, s)) trip.emplace_back(k, t.a * n_ + t.b, t.c);
  }
  SpMat m(dimension(), n_ * n_);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

BasisEvalResult eval_c1_basis(const C1Space& W, Patch s, double xi1, double xi2,
                              int max_deriv, Coordinates coords) {
  if (max_deriv < 0 || max_deriv > 2) throw ValidationError("max_deriv must be 0..2");
  const auto& sp = W.space();
  const Index e1 = sp.find_element(xi1), e2 = sp.find_element(xi2);
  std::vector<Index> funcs;
  std::vector<Derivs> ds;
  W.functions_on_element(s, e1, e2, funcs);
  W.eval_on_element(s, e1, e2, xi1, xi2, funcs, ds);

  BasisEvalResult res;
  res.coords = coords;
  std::optional<PhysicalMap> map;
  if (coords == Coordinates::Physical) {
    map.emplace(W.geometry().eval(s, xi1, xi2, max_deriv >= 2 ? 2 : 1));
  }
  for (std::size_t t = 0; t < funcs.size(); ++t) {
    const Derivs d = map ? (*map)(ds[t]) : ds[t];
    BasisEvalResult::Entry e{funcs[t], d.v, Eigen::Vector2d::Zero(),
                             Eigen::Matrix2d::Zero()};
    if (max_deriv >= 1) e.grad << d.d1, d.d2;
    if (max_deriv >= 2) e.hess << d.d11, d.d12, d.d12, d.d22;
    res.entries.push_back(e);
  }
  return res;
}

double directional_interface_derivative(const C1Space& W, Index k, double xi2, Patch s) {
  const Index e2 = W.space().find_element(xi2);
  std::vector<Derivs> ds;
  W.eval_on_element(s, 0, e2, 0.0, xi2, {k}, ds);
  const auto& g = W.gluing();
  return (ds[0].d1 - g.beta_s_at(s, xi2) * ds[0].d2) / g.alpha_at(s, xi2);
}

Eigen::VectorXd to_tensor_coeffs(const C1Space& W, const Eigen::VectorXd& coeffs,
                                 Patch s) {
  if (coeffs.size() != W.dimension()) {
    throw ValidationError("to_tensor_coeffs: coefficient vector has wrong length");
  }
  const Index n = W.n();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n * n);
  for (Index k = 0; k < W.dimension(); ++k) {
    if (coeffs[k] == 0.0) continue;
    for (const auto& t : W.tensor_terms(k, s)) out[t.a * n + t.b] += coeffs[k] * t.c;
  }
  return out;
}

Derivs eval_tensor(const SplineSpace& sp, const Eigen::VectorXd& coeffs, double xi1,
                   double xi2) {
  const Index n = sp.dimension();
  if (coeffs.size() != n * n) throw ValidationError("eval_tensor: wrong length");
  const auto u = eval_basis(sp, xi1, 2);
  const auto v = eval_basis(sp, xi2, 2);
  Derivs d;
  for (Index la = 0; la < u.ders.cols(); ++la) {
    for (Index lb = 0; lb < v.ders.cols(); ++lb) {
      const double c = coeffs[(u.first + la) * n + v.first + lb];
      if (c == 0.0) continue;
      d.v += c * u.ders(0, la) * v.ders(0, lb);
      d.d1 += c * u.ders(1, la) * v.ders(0, lb);
      d.d2 += c * u.ders(0, la) * v.ders(1, lb);
      d.d11 += c * u.ders(2, la) * v.ders(0, lb);
      d.d12 += c * u.ders(1, la) * v.ders(1, lb);
      d.d22 += c * u.ders(0, la) * v.ders(2, lb);
    }
  }
  return d;
}

}  // namespace c1h
