#include "c1h/bspline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "c1h/errors.hpp"

namespace c1h {

namespace {

constexpr int kMaxDegree = 12;
constexpr int kMaxLevel = 50;
constexpr double kBreakTol = 1e-12;

}  // namespace

SplineSpace::SplineSpace(int degree, int regularity,
                         std::vector<double> breakpoints, int level)
    : p_(degree), r_(regularity), level_(level), interior_(std::move(breakpoints)) {
  if (p_ < 1 || p_ > kMaxDegree)
    throw ValidationError("degree must lie in [1, " + std::to_string(kMaxDegree) + "]");
  if (r_ < 0 || r_ >= p_)
    throw ValidationError("regularity must satisfy 0 <= r <= p-1");
  if (level_ < 0 || level_ > kMaxLevel)
    throw ValidationError("refinement level out of range");
  double prev = 0.0;
  for (double t : interior_) {
    if (!(t > prev + kBreakTol) || !(t < 1.0 - kBreakTol))
      throw ValidationError("breakpoints must be strictly increasing inside (0,1)");
    prev = t;
  }
  base_.reserve(interior_.size() + 2);
  base_.push_back(0.0);
  base_.insert(base_.end(), interior_.begin(), interior_.end());
  base_.push_back(1.0);
}

SplineSpace make_space(int p, int r, const std::vector<double>& T) {
  return SplineSpace(p, r, T, 0);
}

double SplineSpace::breakpoint(Index e) const {
  const Index q = e >> level_;
  const Index s = e & ((Index(1) << level_) - 1);
  if (s == 0) return base_[q];
  return base_[q] + (base_[q + 1] - base_[q]) * std::ldexp(double(s), -level_);
}

Index SplineSpace::knot_breakpoint(Index i) const {
  const Index m = multiplicity();
  if (i <= p_) return 0;
  if (i >= p_ + 1 + num_interior_breakpoints() * m) return num_elements();
  return (i - p_ - 1) / m + 1;
}

double SplineSpace::knot(Index i) const { return breakpoint(knot_breakpoint(i)); }

Index SplineSpace::find_element(double xi) const {
  if (!(xi >= 0.0 && xi <= 1.0)) throw DomainError("parameter outside [0,1]");
  const Index nb = Index(base_.size());
  Index q = Index(std::upper_bound(base_.begin(), base_.end(), xi) - base_.begin()) - 1;
  q = std::clamp<Index>(q, 0, nb - 2);
  const Index per = Index(1) << level_;
  const double t = (xi - base_[q]) / (base_[q + 1] - base_[q]);
  Index s = Index(std::floor(t * double(per)));
  s = std::clamp<Index>(s, 0, per - 1);
  Index e = q * per + s;
  const Index E = num_elements();
  while (e > 0 && xi < breakpoint(e)) --e;
  while (e < E - 1 && xi >= breakpoint(e + 1)) ++e;
  return e;
}

Index SplineSpace::breakpoint_index(double x) const {
  const Index e = find_element(x);
  if (std::abs(breakpoint(e) - x) <= 1e-14) return e;
  if (std::abs(breakpoint(e + 1) - x) <= 1e-14) return e + 1;
  throw ValidationError("value is not a breakpoint of the space");
}

std::pair<Index, Index> SplineSpace::support(Index i) const {
  return {knot_breakpoint(i), knot_breakpoint(i + p_ + 1) - 1};
}

double SplineSpace::greville(Index i) const {
  double s = 0.0;
  for (int k = 1; k <= p_; ++k) s += knot(i + k);
  return s / p_;
}

std::vector<double> SplineSpace::knot_vector() const {
  std::vector<double> t(num_knots());
  for (Index i = 0; i < Index(t.size()); ++i) t[i] = knot(i);
  return t;
}

std::vector<double> SplineSpace::interior_breakpoints() const {
  std::vector<double> b;
  for (Index e = 1; e < num_elements(); ++e) b.push_back(breakpoint(e));
  return b;
}

SplineSpace SplineSpace::refined() const {
  return SplineSpace(p_, r_, interior_, level_ + 1);
}

SplineSpace SplineSpace::with(int degree, int regularity) const {
  return SplineSpace(degree, regularity, interior_, level_);
}

bool SplineSpace::same_space(const SplineSpace& o) const {
  return p_ == o.p_ && r_ == o.r_ && level_ == o.level_ && interior_ == o.interior_;
}

DerivedSpaces derived_spaces(const SplineSpace& s) {
  const int p = s.degree(), r = s.regularity();
  if (r + 1 > p - 1)
    throw ValidationError("derived spaces need r+1 <= p-1");
  DerivedSpaces d;
  d.smooth = s.with(p, r + 1);
  d.lower = s.with(p - 1, r);
  d.n0 = d.smooth.dimension();
  d.n1 = d.lower.dimension();
  return d;
}

void eval_basis_on_element(const SplineSpace& s, Index e, double xi, int max_deriv,
                           double* out) {
  const int p = s.degree();
  const Index mu = p + e * s.multiplicity();
  std::array<double, 2 * kMaxDegree + 2> U;
  for (int k = 0; k < 2 * p + 2; ++k) U[k] = s.knot(mu - p + k);
  auto knot = [&](Index i) { return U[i - (mu - p)]; };

  std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> ndu{};
  std::array<double, kMaxDegree + 1> left{}, right{};
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - knot(mu + 1 - j);
    right[j] = knot(mu + j) - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  const int cols = p + 1;
  for (int i = 0; i < (max_deriv + 1) * cols; ++i) out[i] = 0.0;
  for (int j = 0; j <= p; ++j) out[j] = ndu[j][p];

  const int n = std::min(max_deriv, p);
  std::array<std::array<double, kMaxDegree + 1>, 2> a{};
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= n; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      out[k * cols + r] = d;
      std::swap(s1, s2);
    }
  }
  double f = p;
  for (int k = 1; k <= n; ++k) {
    for (int j = 0; j <= p; ++j) out[k * cols + j] *= f;
    f *= (p - k);
  }
}

BasisWindow eval_basis(const SplineSpace& s, double xi, int max_deriv) {
  if (max_deriv < 0) throw ValidationError("negative derivative order");
  const Index e = s.find_element(xi);
  BasisWindow w;
  w.first = s.first_on_element(e);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(
      max_deriv + 1, s.degree() + 1);
  eval_basis_on_element(s, e, xi, max_deriv, m.data());
  w.ders = m;
  return w;
}

double eval_function(const SplineSpace& s, Index i, double xi, int deriv) {
  const BasisWindow w = eval_basis(s, xi, deriv);
  if (i < w.first || i > w.first + s.degree()) return 0.0;
  return w.ders(deriv, i - w.first);
}

std::vector<double> greville(const SplineSpace& s) {
  std::vector<double> z(s.dimension());
  for (Index i = 0; i < Index(z.size()); ++i) z[i] = s.greville(i);
  return z;
}

SparseRow collocate(const SplineSpace& target, double lo, double hi,
                    const std::function<double(double)>& g) {
  const Index elo = target.breakpoint_index(lo);
  const Index ehi = target.breakpoint_index(hi);
  if (ehi <= elo) throw ValidationError("empty collocation interval");
  const Index m = target.multiplicity();
  const int p = target.degree();
  const Index j0 = elo * m;
  const Index j1 = (ehi - 1) * m + p;
  const int nj = int(j1 - j0 + 1);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nj, nj);
  Eigen::VectorXd b(nj);
  for (int row = 0; row < nj; ++row) {
    const double z = target.greville(j0 + row);
    const BasisWindow w = eval_basis(target, z, 0);
    for (int k = 0; k <= p; ++k) {
      const Index j = w.first + k;
      if (j >= j0 && j <= j1) A(row, int(j - j0)) = w.ders(0, k);
    }
    b(row) = g(z);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < nj)
    throw ConstructionError("singular Greville collocation system");
  const Eigen::VectorXd c = lu.solve(b);

  SparseRow out;
  Index first = -1;
  for (Index j = j0; j <= j1; ++j) {
    const auto [a, z] = target.support(j);
    if (a < elo || z > ehi - 1) continue;
    if (first < 0) first = j;
    out.c.push_back(c(int(j - j0)));
  }
  out.first = first;
  return out;
}

SparseRow express_in(const SplineSpace& target, const SplineSpace& source, Index i) {
  const double lo = source.knot(i);
  const double hi = source.knot(i + source.degree() + 1);
  return collocate(target, lo, hi,
                   [&](double x) { return eval_function(source, i, x, 0); });
}

SparseRow refinement_row(const SplineSpace& coarse, Index i) {
  return express_in(coarse.refined(), coarse, i);
}

SpMat knot_insertion_matrix(int p, const std::vector<double>& coarse_knots,
                            const std::vector<double>& fine_knots) {
  std::vector<double> insert;
  {
    std::size_t a = 0;
    for (double x : fine_knots) {
      if (a < coarse_knots.size() && std::abs(coarse_knots[a] - x) <= 1e-14) {
        ++a;
      } else {
        insert.push_back(x);
      }
    }
    if (a != coarse_knots.size())
      throw ValidationError("fine knot vector does not contain the coarse one");
  }
  const Index n0 = Index(coarse_knots.size()) - p - 1;
  if (n0 > 8192 || Index(fine_knots.size()) > 16384)
    throw ValidationError("space too large for an assembled refinement matrix");

  std::vector<double> t = coarse_knots;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n0, n0);
  for (double x : insert) {
    const Index n = Index(t.size()) - p - 1;
    Index k = Index(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
    k = std::min(k, n - 1);
    Eigen::MatrixXd B(n + 1, n0);
    for (Index i = 0; i <= n; ++i) {
      if (i <= k - p) {
        B.row(i) = A.row(i);
      } else if (i <= k) {
        const double alpha = (x - t[i]) / (t[i + p] - t[i]);
        B.row(i) = alpha * A.row(i) + (1.0 - alpha) * A.row(i - 1);
      } else {
        B.row(i) = A.row(i - 1);
      }
    }
    A.swap(B);
    t.insert(t.begin() + k + 1, x);
  }
  SpMat L = A.transpose().sparseView(0.0, 0.0);
  L.makeCompressed();
  return L;
}

Refinement refine_dyadic(const SplineSpace& s) {
  Refinement r{s.refined(), {}};
  r.lambda = knot_insertion_matrix(s.degree(), s.knot_vector(), r.fine.knot_vector());
  return r;
}

}  // namespace c1h
