#pragma once

#include <functional>
#include <vector>

#include "c1h/assembly.hpp"

namespace c1h {

struct ElementIndicators {
  std::vector<Element> elements;  // the leaves, in hierarchy order
  std::vector<double> eta;        // eta_e >= 0
  double total() const;           // (sum eta_e^2)^(1/2)
};

// Residual indicators for -Lap u = f with Nitsche data g:
//   eta_e^2 = h_e^2 |f + Lap u_h|^2_e + 1/2 sum_{e cap Gamma} h_e |[dn u_h]|^2
//             + sum_{boundary edges} (gamma/h_b) |u_h - g|^2_edge,
// h_e the element diameter and h_b its height normal to the edge.
ElementIndicators estimate_residual(const HierarchicalSpace& H, const Eigen::VectorXd& u,
                                    const ScalarField& f, const ExactField& g,
                                    bool parallel = true);

// Smallest prefix of the indicators sorted by descending value (ties by
// position) whose squared sum reaches theta^2 of the total.
std::vector<std::size_t> mark_doerfler(const std::vector<double>& eta, double theta);
std::vector<Element> mark_doerfler(const ElementIndicators& ind, double theta);
// Shared threshold test, relative slack 1e-12 for rounding in the sums.
bool doerfler_reached(double marked_sq, double total_sq, double theta);

// Marked elements must be leaves.
void refine_marked(HierarchicalSpace& H, const std::vector<Element>& marked);

// Leaves of the 4x4 finest-level block at parametric (0,0) of both patches.
std::vector<Element> corner_block(const HierarchicalSpace& H);

enum class RefineMode { Adaptive, Uniform, Corner };

struct LoopConfig {
  Problem problem;
  int degree = 3;
  Smoothness smoothness = Smoothness::C1;
  RefineMode mode = RefineMode::Adaptive;
  double theta = 0.75;
  Index budget = 2000;  // stop once NDOF reaches this
  int max_iter = 60;
  bool parallel = true;
};

struct AdaptiveRecord {
  int iteration = 0;
  Index ndof = 0;
  double error = 0;      // reported norm (H1 or H2 seminorm, relative for Ex. 2)
  double estimator = 0;  // NaN when not computed
  double l2 = 0, h1 = 0, h2 = 0;
  Index marked = 0;
  double seconds = 0;
};

HierarchicalSpace initial_space(const Problem& problem, int degree, Smoothness sm);

std::vector<AdaptiveRecord> adaptive_loop(
    const LoopConfig& cfg, const std::function<void(const AdaptiveRecord&)>& on_record = {});

}  // namespace c1h
