#include "c1h/problems.hpp"

#include <cmath>
#include <numbers>

#include "c1h/errors.hpp"

namespace c1h {

namespace {

using std::numbers::pi;

// u(rho, theta) with its polar partials -> Cartesian value, gradient, Hessian.
struct Polar {
  double u, ur, ut, urr, urt, utt;
};

ExactValue from_polar(const Polar& p, double rho, double th) {
  ExactValue e;
  e.v = p.u;
  if (rho == 0.0) return e;
  const double c = std::cos(th), s = std::sin(th);
  const double r2 = rho * rho;
  e.grad << c * p.ur - s / rho * p.ut, s * p.ur + c / rho * p.ut;
  const double xx = c * c * p.urr - 2 * s * c / rho * p.urt + s * s / r2 * p.utt +
                    s * s / rho * p.ur + 2 * s * c / r2 * p.ut;
  const double yy = s * s * p.urr + 2 * s * c / rho * p.urt + c * c / r2 * p.utt +
                    c * c / rho * p.ur - 2 * s * c / r2 * p.ut;
  const double xy = s * c * p.urr + (c * c - s * s) / rho * p.urt - s * c / r2 * p.utt -
                    s * c / rho * p.ur - (c * c - s * s) / r2 * p.ut;
  e.hess << xx, xy, xy, yy;
  return e;
}

double angle(const Eigen::Vector2d& x) {
  double th = std::atan2(x.y(), x.x());
  if (th < 0) th += 2 * pi;
  return th;
}

// |q|^a * c for a polynomial q and a smooth factor c, a > 2.
ExactValue power_times(double a, double q, const Eigen::Vector2d& dq,
                       const Eigen::Matrix2d& hq, double c, const Eigen::Vector2d& dc,
                       const Eigen::Matrix2d& hc) {
  const double aq = std::abs(q);
  const double w = std::pow(aq, a);
  const double k = aq == 0.0 ? 0.0 : a * std::pow(aq, a - 2);  // a |q|^(a-2)
  const Eigen::Vector2d dw = k * q * dq;
  const Eigen::Matrix2d hw = (a - 1) * k * dq * dq.transpose() + k * q * hq;
  ExactValue e;
  e.v = w * c;
  e.grad = c * dw + w * dc;
  e.hess = c * hw + dw * dc.transpose() + dc * dw.transpose() + w * hc;
  return e;
}

}  // namespace

ExactValue ex1_solution(const Eigen::Vector2d& x) {
  const double l = 4.0 / 3.0;
  const double rho = x.norm(), th = angle(x);
  const double s = std::sin(l * th), c = std::cos(l * th);
  const double rl = std::pow(rho, l);
  const double rl1 = rho == 0.0 ? 0.0 : rl / rho;
  const double rl2 = rho == 0.0 ? 0.0 : rl1 / rho;
  return from_polar({rl * s, l * rl1 * s, l * rl * c, l * (l - 1) * rl2 * s, l * l * rl1 * c,
                     -l * l * rl * s},
                    rho, th);
}

ExactValue ex2_solution(const Eigen::Vector2d& p) {
  const double x = p.x(), y = p.y();
  const double q = -120 * x + x * x - 96 * y - 8 * x * y + 16 * y * y;
  const Eigen::Vector2d dq(-120 + 2 * x - 8 * y, -96 - 8 * x + 32 * y);
  Eigen::Matrix2d hq;
  hq << 2, -8, -8, 32;
  const double k = pi / 20;
  const double c = std::cos(k * y);
  const Eigen::Vector2d dc(0, -k * std::sin(k * y));
  Eigen::Matrix2d hc;
  hc << 0, 0, 0, -k * k * c;
  return power_times(2.4, q, dq, hq, c, dc, hc);
}

ExactValue ex3_solution(const Eigen::Vector2d& p) {
  const double q = p.y() - 1.7;
  const Eigen::Vector2d dq(0, 1);
  const Eigen::Matrix2d hq = Eigen::Matrix2d::Zero();
  const double c = std::cos(p.x() / 4);
  const Eigen::Vector2d dc(-std::sin(p.x() / 4) / 4, 0);
  Eigen::Matrix2d hc;
  hc << -c / 16, 0, 0, 0;
  return power_times(2.4, q, dq, hq, c, dc, hc);
}

ExactValue ex4_solution(const Eigen::Vector2d& x) {
  const double z = kEx4Z;
  const double zm = z - 1, zp = z + 1;
  const double C1 = (std::sin(1.5 * zm * pi) - std::sin(1.5 * zp * pi)) / zm;
  const double C2 = std::cos(1.5 * zm * pi) - std::cos(1.5 * zp * pi);
  const double rho = x.norm(), th = angle(x);
  const double sm = std::sin(zm * th), cm = std::cos(zm * th);
  const double sp = std::sin(zp * th), cp = std::cos(zp * th);
  const double F1 = cm - cp, F2 = sm / zm - sp / zp;
  const double F1t = -zm * sm + zp * sp, F2t = cm - cp;
  const double F1tt = -zm * zm * cm + zp * zp * cp, F2tt = -zm * sm + zp * sp;
  const double G = C1 * F1 - C2 * F2, Gt = C1 * F1t - C2 * F2t, Gtt = C1 * F1tt - C2 * F2tt;
  const double rz1 = std::pow(rho, zp);
  const double rz = rho == 0.0 ? 0.0 : rz1 / rho;
  const double rzm = rho == 0.0 ? 0.0 : rz / rho;
  return from_polar({rz1 * G, zp * rz * G, rz1 * Gt, zp * z * rzm * G, zp * rz * Gt, rz1 * Gtt},
                    rho, th);
}

Problem make_problem(int example) {
  Problem p;
  p.example = example;
  auto wrap = [](ExactValue (*fn)(const Eigen::Vector2d&)) {
    return ExactField([fn](const PointContext& c) { return fn(c.x); });
  };
  auto minus_laplacian = [](ExactValue (*fn)(const Eigen::Vector2d&)) {
    return ScalarField([fn](const PointContext& c) { return -fn(c.x).hess.trace(); });
  };
  const ScalarField zero = [](const PointContext&) { return 0.0; };
  switch (example) {
    case 1:
      p.geometry_file = "lshape.json";
      p.initial_elements = 4;
      p.theta = 0.90;
      p.exact = wrap(ex1_solution);
      p.source = zero;  // harmonic
      break;
    case 2:
      p.geometry_file = "curved_asg1.json";
      p.initial_elements = 8;
      p.relative_error = true;
      p.exact = wrap(ex2_solution);
      p.source = minus_laplacian(ex2_solution);
      break;
    case 3:
      p.geometry_file = "curved_asg1.json";
      p.initial_elements = 8;
      p.exact = wrap(ex3_solution);
      p.source = minus_laplacian(ex3_solution);
      break;
    case 4:
      p.kind = PdeKind::Bilaplacian;
      p.geometry_file = "lshape.json";
      p.initial_elements = 8;
      p.exact = wrap(ex4_solution);
      p.source = zero;  // biharmonic
      break;
    default:
      throw ValidationError("example must be 1, 2, 3 or 4");
  }
  return p;
}

}  // namespace c1h
