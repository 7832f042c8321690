// Timings of the parallel kernels against their serial paths.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include <omp.h>

#include "c1h/adaptivity.hpp"

using namespace c1h;

namespace {
template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}
}  // namespace

int main(int argc, char** argv) {
  const int levels = argc > 1 ? std::atoi(argv[1]) : 2;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  const Problem P = make_problem(3);
  HierarchicalSpace H = initial_space(P, 3, Smoothness::C1);
  for (int l = 0; l < levels; ++l) H.refine_uniform();
  std::printf("ndof %lld  leaves %zu  threads %d\n", (long long)H.num_dofs(), H.leaves().size(),
              omp_get_max_threads());

  for (bool par : {false, true}) {
    AssemblyOptions opt;
    opt.parallel = par;
    AssembledSystem sys;
    const double ta = best_of(reps, [&] { sys = assemble_poisson(H, P.source, P.exact, opt); });
    Eigen::VectorXd u;
    const double ts = best_of(reps, [&] { u = solve(sys); });
    const double te = best_of(reps, [&] { estimate_residual(H, u, P.source, P.exact, par); });
    const double tn = best_of(reps, [&] { error_norms(H, u, P.exact, 0, par); });
    std::printf("%-8s assemble %.3f s  solve %.3f s  estimate %.3f s  norms %.3f s\n",
                par ? "parallel" : "serial", ta, ts, te, tn);
  }
  return 0;
}
