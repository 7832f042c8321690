#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "c1h/bspline.hpp"

namespace c1h {

enum class Patch : int { L = 0, R = 1 };
inline constexpr std::array<Patch, 2> kPatches{Patch::L, Patch::R};
inline int pidx(Patch s) { return static_cast<int>(s); }
inline const char* patch_name(Patch s) { return s == Patch::L ? "L" : "R"; }

// Tensor-product spline map [0,1]^2 -> R^2, same space in both directions.
struct PatchMapping {
  std::string id;
  SplineSpace space;
  std::vector<Eigen::Vector2d> cp;  // cp[i + n*j], i along xi1

  Index n() const { return space.dimension(); }
  const Eigen::Vector2d& c(Index i, Index j) const { return cp[i + n() * j]; }
};

struct GeometryPoint {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();  // columns d/dxi1, d/dxi2
  Eigen::Vector2d d11 = Eigen::Vector2d::Zero();
  Eigen::Vector2d d12 = Eigen::Vector2d::Zero();
  Eigen::Vector2d d22 = Eigen::Vector2d::Zero();
};

// Two patches glued along xi1 = 0 on both sides.
class TwoPatchGeometry {
 public:
  TwoPatchGeometry() = default;
  // Validates interface match and Jacobian regularity unless `check` is false.
  TwoPatchGeometry(PatchMapping left, PatchMapping right, bool check = true);

  const PatchMapping& patch(Patch s) const { return patches_[pidx(s)]; }
  GeometryPoint eval(Patch s, double xi1, double xi2, int max_deriv = 2) const;

  double interface_gap(int samples = 1000) const;
  // Min and max of det J over a sampling grid of each element.
  std::pair<double, double> jacobian_range(Patch s, int per_element = 6) const;

 private:
  std::array<PatchMapping, 2> patches_;
};

GeometryPoint eval_patch(const TwoPatchGeometry& g, Patch s, double xi1, double xi2,
                         int max_deriv);

TwoPatchGeometry parse_geometry(const std::string& json_text, bool check = true);
TwoPatchGeometry load_geometry(const std::string& path, bool check = true);
std::string geometry_to_json(const TwoPatchGeometry& g);

// Path of a bundled geometry file (data/ directory).
std::string data_path(const std::string& name);

// alpha^(S), beta^(S) linear; beta quadratic.
struct GluingData {
  std::array<std::array<double, 2>, 2> alpha{};   // [patch] endpoint values
  std::array<std::array<double, 2>, 2> beta_s{};  // [patch] endpoint values
  std::array<double, 3> beta{};                   // monomial coefficients
  double residual = 0.0;

  double alpha_at(Patch s, double t) const {
    const auto& a = alpha[pidx(s)];
    return a[0] + (a[1] - a[0]) * t;
  }
  double beta_s_at(Patch s, double t) const {
    const auto& b = beta_s[pidx(s)];
    return b[0] + (b[1] - b[0]) * t;
  }
  double beta_at(double t) const { return beta[0] + t * (beta[1] + t * beta[2]); }
};

// Sup over samples of |alpha_R d1F_L - alpha_L d1F_R + beta d2F|, divided by
// the largest interface derivative norm.
double gluing_residual(const TwoPatchGeometry& g, const GluingData& d, int samples = 1001);
// Sup of |beta - (alpha_L beta_R - alpha_R beta_L)|.
double beta_split_residual(const GluingData& d, int samples = 1001);

GluingData compute_gluing(const TwoPatchGeometry& g, double tol = 1e-9);

Eigen::Vector2d transversal_direction(const TwoPatchGeometry& g, const GluingData& d,
                                      double xi2, Patch s = Patch::L);

}  // namespace c1h
