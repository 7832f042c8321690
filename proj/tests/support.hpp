// Helpers shared by the unit tests and the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "c1h/c1_space.hpp"

namespace c1h::testing {

struct Box {
  Patch patch;
  double a0, a1, b0, b1;
};

// Random parametric box. Edges closer than a quarter element to a breakpoint
// are moved onto it: a sliver of an element carries polynomials that are
// independent in exact arithmetic but numerically degenerate at 1e-8.
inline Box random_box(const SplineSpace& sp, std::mt19937& rng, bool touch_interface) {
  std::uniform_real_distribution<double> u(0, 1);
  auto snap = [&](double x) {
    const Index e = sp.find_element(x);
    const double lo = sp.breakpoint(e), hi = sp.breakpoint(e + 1), w = hi - lo;
    if (x - lo < 0.25 * w) return lo;
    if (hi - x < 0.25 * w) return hi;
    return x;
  };
  Box b{u(rng) < 0.5 ? Patch::L : Patch::R, snap(u(rng)), snap(u(rng)), snap(u(rng)),
        snap(u(rng))};
  if (b.a0 > b.a1) std::swap(b.a0, b.a1);
  if (b.b0 > b.b1) std::swap(b.b0, b.b1);
  if (touch_interface) b.a0 = 0;
  const double w = 1.0 / double(sp.num_elements());
  if (b.a1 - b.a0 < w) b.a1 = std::min(1.0, b.a0 + w);
  if (b.b1 - b.b0 < w) b.b1 = std::min(1.0, b.b0 + w);
  if (b.a1 - b.a0 < w) b.a0 = b.a1 - w;
  if (b.b1 - b.b0 < w) b.b0 = b.b1 - w;
  return b;
}

struct RankResult {
  Index functions = 0, rank = 0;
};

// Rank of the functions not vanishing on the box, sampled on every element
// piece of the box; columns normalised, threshold relative to the largest
// singular value.
inline RankResult local_rank(const C1Space& W, const Box& box, std::mt19937& rng,
                             double threshold = 1e-8) {
  const SplineSpace& sp = W.space();
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Index> funcs, tmp;
  struct Piece {
    double x0, x1, y0, y1;
  };
  std::vector<Piece> pieces;
  const Index ea = sp.find_element(box.a0), eb = sp.find_element(box.a1);
  const Index fa = sp.find_element(box.b0), fb = sp.find_element(box.b1);
  for (Index e1 = ea; e1 <= eb; ++e1) {
    const double x0 = std::max(box.a0, sp.breakpoint(e1)), x1 = std::min(box.a1, sp.breakpoint(e1 + 1));
    if (x1 <= x0) continue;
    for (Index e2 = fa; e2 <= fb; ++e2) {
      const double y0 = std::max(box.b0, sp.breakpoint(e2)), y1 = std::min(box.b1, sp.breakpoint(e2 + 1));
      if (y1 <= y0) continue;
      pieces.push_back({x0, x1, y0, y1});
      W.functions_on_element(box.patch, e1, e2, tmp);
      funcs.insert(funcs.end(), tmp.begin(), tmp.end());
    }
  }
  std::sort(funcs.begin(), funcs.end());
  funcs.erase(std::unique(funcs.begin(), funcs.end()), funcs.end());
  const int per = (sp.degree() + 1) * (sp.degree() + 1) + 2 * (sp.degree() + 1) + 4;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(Index(pieces.size()) * per, Index(funcs.size()));
  Index row = 0;
  for (const auto& pc : pieces) {
    for (int q = 0; q < per; ++q, ++row) {
      const double x1 = pc.x0 + (pc.x1 - pc.x0) * u(rng), x2 = pc.y0 + (pc.y1 - pc.y0) * u(rng);
      const auto r = eval_c1_basis(W, box.patch, x1, x2, 0, Coordinates::Parametric);
      for (const auto& e : r.entries) {
        const auto it = std::lower_bound(funcs.begin(), funcs.end(), e.index);
        M(row, it - funcs.begin()) = e.value;
      }
    }
  }
  for (Index c = 0; c < M.cols(); ++c) {
    const double nrm = M.col(c).norm();
    if (nrm > 0) M.col(c) /= nrm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  svd.setThreshold(threshold);
  return {Index(funcs.size()), svd.rank()};
}

}  // namespace c1h::testing
