#include "c1h/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "c1h/errors.hpp"
#include "c1h/quadrature.hpp"

namespace c1h {

using Eigen::Vector2d;
using json = nlohmann::json;

TwoPatchGeometry::TwoPatchGeometry(PatchMapping left, PatchMapping right, bool check)
    : patches_{std::move(left), std::move(right)} {
  for (const auto& pm : patches_) {
    const Index n = pm.n();
    if (Index(pm.cp.size()) != n * n)
      throw GeometryError("control net of patch " + pm.id + " does not match the space");
  }
  if (!patches_[0].space.same_space(patches_[1].space))
    throw GeometryError("both patches must use the same spline space");
  if (!check) return;
  const double gap = interface_gap();
  if (gap > 1e-10) {
    std::ostringstream os;
    os << "patches do not share the interface xi1=0 (max deviation " << gap << ")";
    throw GeometryError(os.str());
  }
  for (Patch s : kPatches) {
    const auto [lo, hi] = jacobian_range(s);
    double scale = 0.0;
    for (const auto& c : patch(s).cp) scale = std::max(scale, c.norm());
    const double tol = 1e-12 * std::max(scale * scale, 1e-300);
    if (!((lo > tol) || (hi < -tol)))
      throw GeometryError(std::string("singular Jacobian sample on patch ") + patch_name(s));
  }
}

GeometryPoint TwoPatchGeometry::eval(Patch s, double xi1, double xi2, int max_deriv) const {
  const PatchMapping& pm = patch(s);
  const SplineSpace& sp = pm.space;
  const int p = sp.degree();
  const int nd = std::min(max_deriv, 2);
  const BasisWindow u = eval_basis(sp, xi1, nd);
  const BasisWindow v = eval_basis(sp, xi2, nd);
  GeometryPoint out;
  for (int b = 0; b <= p; ++b) {
    for (int a = 0; a <= p; ++a) {
      const Vector2d& c = pm.c(u.first + a, v.first + b);
      out.x += c * (u.ders(0, a) * v.ders(0, b));
      if (nd >= 1) {
        out.jac.col(0) += c * (u.ders(1, a) * v.ders(0, b));
        out.jac.col(1) += c * (u.ders(0, a) * v.ders(1, b));
      }
      if (nd >= 2) {
        out.d11 += c * (u.ders(2, a) * v.ders(0, b));
        out.d12 += c * (u.ders(1, a) * v.ders(1, b));
        out.d22 += c * (u.ders(0, a) * v.ders(2, b));
      }
    }
  }
  return out;
}

GeometryPoint eval_patch(const TwoPatchGeometry& g, Patch s, double xi1, double xi2,
                         int max_deriv) {
  if (xi1 < 0 || xi1 > 1 || xi2 < 0 || xi2 > 1)
    throw DomainError("parametric point outside [0,1]^2");
  return g.eval(s, xi1, xi2, max_deriv);
}

double TwoPatchGeometry::interface_gap(int samples) const {
  double gap = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = samples == 1 ? 0.5 : double(k) / (samples - 1);
    const Vector2d a = eval(Patch::L, 0.0, t, 0).x;
    const Vector2d b = eval(Patch::R, 0.0, t, 0).x;
    gap = std::max(gap, (a - b).norm());
  }
  return gap;
}

std::pair<double, double> TwoPatchGeometry::jacobian_range(Patch s, int per_element) const {
  const SplineSpace& sp = patch(s).space;
  double lo = INFINITY, hi = -INFINITY;
  for (Index e2 = 0; e2 < sp.num_elements(); ++e2) {
    for (Index e1 = 0; e1 < sp.num_elements(); ++e1) {
      for (int a = 0; a < per_element; ++a) {
        for (int b = 0; b < per_element; ++b) {
          const double t1 = (a + 0.5) / per_element, t2 = (b + 0.5) / per_element;
          const double x1 = sp.breakpoint(e1) + t1 * (sp.breakpoint(e1 + 1) - sp.breakpoint(e1));
          const double x2 = sp.breakpoint(e2) + t2 * (sp.breakpoint(e2 + 1) - sp.breakpoint(e2));
          const double d = eval(s, x1, x2, 1).jac.determinant();
          lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
      }
    }
  }
  // corners are where nets usually degenerate
  for (double x1 : {0.0, 1.0})
    for (double x2 : {0.0, 1.0}) {
      const double d = eval(s, x1, x2, 1).jac.determinant();
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  return {lo, hi};
}

TwoPatchGeometry parse_geometry(const std::string& text, bool check) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("geometry file is not valid JSON: ") + e.what());
  }
  try {
    const int p = j.at("degree").get<int>();
    const int r = j.at("regularity").get<int>();
    const auto T = j.at("breakpoints").get<std::vector<double>>();
    const SplineSpace sp = make_space(p, r, T);
    const Index n = sp.dimension();
    const auto& patches = j.at("patches");
    if (!patches.is_array() || patches.size() != 2)
      throw GeometryError("geometry needs exactly two patches");
    std::array<PatchMapping, 2> pm;
    std::array<bool, 2> seen{false, false};
    for (const auto& pj : patches) {
      const std::string id = pj.at("id").get<std::string>();
      int k;
      if (id == "L") k = 0;
      else if (id == "R") k = 1;
      else throw GeometryError("patch id must be L or R, got " + id);
      if (seen[k]) throw GeometryError("duplicate patch id " + id);
      seen[k] = true;
      const auto& rows = pj.at("control_points");
      if (!rows.is_array() || Index(rows.size()) != n)
        throw GeometryError("patch " + id + ": expected " + std::to_string(n) + " rows");
      pm[k].id = id;
      pm[k].space = sp;
      pm[k].cp.resize(n * n);
      for (Index jj = 0; jj < n; ++jj) {
        const auto& row = rows[jj];
        if (!row.is_array() || Index(row.size()) != n)
          throw GeometryError("patch " + id + ": ragged control net");
        for (Index ii = 0; ii < n; ++ii) {
          const auto& pt = row[ii];
          if (!pt.is_array() || pt.size() != 2)
            throw GeometryError("patch " + id + ": control points must be [x, y]");
          pm[k].cp[ii + n * jj] = Vector2d(pt[0].get<double>(), pt[1].get<double>());
        }
      }
    }
    return TwoPatchGeometry(std::move(pm[0]), std::move(pm[1]), check);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed geometry file: ") + e.what());
  }
}

TwoPatchGeometry load_geometry(const std::string& path, bool check) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open geometry file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_geometry(ss.str(), check);
}

std::string geometry_to_json(const TwoPatchGeometry& g) {
  const SplineSpace& sp = g.patch(Patch::L).space;
  json j;
  j["degree"] = sp.degree();
  j["regularity"] = sp.regularity();
  j["breakpoints"] = sp.base_breakpoints();
  j["patches"] = json::array();
  for (Patch s : kPatches) {
    const PatchMapping& pm = g.patch(s);
    json rows = json::array();
    for (Index jj = 0; jj < pm.n(); ++jj) {
      json row = json::array();
      for (Index ii = 0; ii < pm.n(); ++ii) row.push_back({pm.c(ii, jj).x(), pm.c(ii, jj).y()});
      rows.push_back(row);
    }
    j["patches"].push_back({{"id", patch_name(s)}, {"control_points", rows}});
  }
  return j.dump(2);
}

std::string data_path(const std::string& name) {
  return std::string(C1H_DATA_DIR) + "/" + name;
}

namespace {

struct InterfaceDerivs {
  Vector2d d1L, d1R, d2;
};

InterfaceDerivs interface_derivs(const TwoPatchGeometry& g, double t) {
  const GeometryPoint a = g.eval(Patch::L, 0.0, t, 1);
  const GeometryPoint b = g.eval(Patch::R, 0.0, t, 1);
  return {a.jac.col(0), b.jac.col(0), a.jac.col(1)};
}

double interface_scale(const TwoPatchGeometry& g, int samples) {
  double s = 0.0;
  for (int k = 0; k < samples; ++k) {
    const InterfaceDerivs d = interface_derivs(g, double(k) / (samples - 1));
    s = std::max({s, d.d1L.norm(), d.d1R.norm(), d.d2.norm()});
  }
  return s;
}

}  // namespace

double gluing_residual(const TwoPatchGeometry& g, const GluingData& d, int samples) {
  double r = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = double(k) / (samples - 1);
    const InterfaceDerivs D = interface_derivs(g, t);
    const Vector2d res = d.alpha_at(Patch::R, t) * D.d1L - d.alpha_at(Patch::L, t) * D.d1R +
                         d.beta_at(t) * D.d2;
    r = std::max(r, res.norm());
  }
  return r / interface_scale(g, std::min(samples, 201));
}

double beta_split_residual(const GluingData& d, int samples) {
  double r = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = double(k) / (samples - 1);
    const double split = d.alpha_at(Patch::L, t) * d.beta_s_at(Patch::R, t) -
                         d.alpha_at(Patch::R, t) * d.beta_s_at(Patch::L, t);
    r = std::max(r, std::abs(d.beta_at(t) - split));
  }
  return r;
}

GluingData compute_gluing(const TwoPatchGeometry& g, double tol) {
  using Mat7 = Eigen::Matrix<double, 7, 7>;
  using Vec7 = Eigen::Matrix<double, 7, 1>;
  const SplineSpace& sp = g.patch(Patch::L).space;
  const double scale = interface_scale(g, 201);
  const QuadratureRule q = gauss_legendre(sp.degree() + 4);

  // unknowns: alpha_L (2), alpha_R (2), beta (3), monomial coefficients
  Mat7 G = Mat7::Zero();
  for (Index e = 0; e < sp.num_elements(); ++e) {
    const double a = sp.breakpoint(e), b = sp.breakpoint(e + 1);
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const double t = a + (b - a) * q.points[k];
      const InterfaceDerivs D = interface_derivs(g, t);
      Eigen::Matrix<double, 2, 7> M;
      M.col(0) = -D.d1R;
      M.col(1) = -t * D.d1R;
      M.col(2) = D.d1L;
      M.col(3) = t * D.d1L;
      M.col(4) = D.d2;
      M.col(5) = t * D.d2;
      M.col(6) = t * t * D.d2;
      M /= scale;
      G += (b - a) * q.weights[k] * M.transpose() * M;
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat7> es(G);
  const Vec7 lam = es.eigenvalues();
  const double lmax = std::max(lam.maxCoeff(), 1e-300);
  int dim = 0;
  while (dim < 7 && lam(dim) <= 1e-12 * lmax) ++dim;
  const Eigen::MatrixXd V = es.eigenvectors().leftCols(std::max(dim, 1));

  // min ||alpha_L + 1||^2 + ||alpha_R - 1||^2 over the null space
  Eigen::Matrix2d Mm;
  Mm << 1.0, 0.5, 0.5, 1.0 / 3.0;
  const Eigen::MatrixXd VL = V.topRows(2), VR = V.middleRows(2, 2);
  const Eigen::Vector2d e0(1.0, 0.0);
  const Eigen::MatrixXd N = VL.transpose() * Mm * VL + VR.transpose() * Mm * VR;
  const Eigen::VectorXd rhs = -VL.transpose() * Mm * e0 + VR.transpose() * Mm * e0;
  const Eigen::VectorXd y = N.completeOrthogonalDecomposition().solve(rhs);
  const Vec7 u = V * y;

  GluingData d;
  d.alpha[0] = {u(0), u(0) + u(1)};
  d.alpha[1] = {u(2), u(2) + u(3)};
  d.beta = {u(4), u(5), u(6)};

  // beta_L, beta_R: min L2 norm with alpha_L beta_R - alpha_R beta_L = beta
  const double l0 = u(0), l1 = u(1), r0 = u(2), r1 = u(3);
  Eigen::Matrix<double, 3, 4> C;  // unknowns (bL0, bL1, bR0, bR1)
  C << -r0, 0.0, l0, 0.0,
       -r1, -r0, l1, l0,
       0.0, -r1, 0.0, l1;
  Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
  H.topLeftCorner<2, 2>() = Mm;
  H.bottomRightCorner<2, 2>() = Mm;
  const Eigen::Matrix4d Hinv = H.inverse();
  const Eigen::Matrix3d K = C * Hinv * C.transpose();
  const Eigen::Vector3d bet(u(4), u(5), u(6));
  const Eigen::Vector3d w = K.completeOrthogonalDecomposition().solve(bet);
  const Eigen::Vector4d bs = Hinv * C.transpose() * w;
  d.beta_s[0] = {bs(0), bs(0) + bs(1)};
  d.beta_s[1] = {bs(2), bs(2) + bs(3)};

  d.residual = gluing_residual(g, d);
  if (!(d.residual <= tol)) {
    std::ostringstream os;
    os << "geometry is not analysis-suitable G1: gluing residual " << d.residual;
    throw NotAnalysisSuitable(os.str(), d.residual);
  }
  for (int k = 0; k <= 200; ++k) {
    const double t = k / 200.0;
    if (!(d.alpha_at(Patch::L, t) * d.alpha_at(Patch::R, t) < 0.0))
      throw NotAnalysisSuitable("gluing functions violate alpha_L * alpha_R < 0", d.residual);
  }
  const double split = beta_split_residual(d);
  if (split > 1e-10) {
    std::ostringstream os;
    os << "beta cannot be split with linear beta_L, beta_R (residual " << split << ")";
    throw NotAnalysisSuitable(os.str(), split);
  }
  return d;
}

Eigen::Vector2d transversal_direction(const TwoPatchGeometry& g, const GluingData& d,
                                      double xi2, Patch s) {
  if (xi2 < 0 || xi2 > 1) throw DomainError("xi2 outside [0,1]");
  const GeometryPoint gp = g.eval(s, 0.0, xi2, 1);
  const double a = d.alpha_at(s, xi2);
  if (a == 0.0) throw NumericalError("alpha vanishes on the interface");
  return (gp.jac.col(0) - d.beta_s_at(s, xi2) * gp.jac.col(1)) / a;
}

}  // namespace c1h
