#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "c1h/geometry.hpp"

namespace c1h {

// Where a field is sampled: physical point plus the patch coordinates it came
// from, so discrete functions can be used as data too.
struct PointContext {
  Patch patch = Patch::L;
  double xi1 = 0, xi2 = 0;
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
};

struct ExactValue {
  double v = 0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

using ScalarField = std::function<double(const PointContext&)>;
using ExactField = std::function<ExactValue(const PointContext&)>;

enum class PdeKind { Poisson, Bilaplacian };

struct Problem {
  int example = 0;
  PdeKind kind = PdeKind::Poisson;
  std::string geometry_file;  // name inside the data directory
  int initial_elements = 0;   // per direction and patch
  double theta = 0.75;        // default marking parameter
  bool relative_error = false;
  ExactField exact;
  ScalarField source;  // -Lap u or Lap^2 u
};

// Examples 1-4. Throws ValidationError for other ids.
Problem make_problem(int example);

// Exact solutions with gradient and Hessian. Polar angles are taken in
// [0, 2pi), so the L-shape occupies theta in [0, 3pi/2].
ExactValue ex1_solution(const Eigen::Vector2d& x);
ExactValue ex2_solution(const Eigen::Vector2d& x);
ExactValue ex3_solution(const Eigen::Vector2d& x);
ExactValue ex4_solution(const Eigen::Vector2d& x);

inline constexpr double kEx4Z = 0.544483736782464;

}  // namespace c1h
