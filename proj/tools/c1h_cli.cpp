// c1h: run the convergence studies, check geometries, inspect spaces.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "c1h/adaptivity.hpp"
#include "c1h/errors.hpp"
#include "c1h/report.hpp"

using namespace c1h;

namespace {

int cmd_run(int example, int degree, const std::string& smooth, const std::string& mode,
            double theta, long long budget, int max_iter, const std::string& out, bool quiet) {
  LoopConfig cfg;
  cfg.problem = make_problem(example);
  cfg.degree = degree;
  cfg.smoothness = smooth == "c1" ? Smoothness::C1 : Smoothness::C0;
  cfg.mode = mode == "adaptive" ? RefineMode::Adaptive
             : mode == "uniform" ? RefineMode::Uniform
                                 : RefineMode::Corner;
  cfg.theta = theta > 0 ? theta : cfg.problem.theta;
  cfg.budget = budget;
  cfg.max_iter = max_iter;
  const RunResult r = run_example(cfg, out, quiet ? nullptr : &std::cout);
  std::cout << "wrote " << r.csv_path << "\nwrote " << r.svg_path << "\nwrote " << r.eoc_path
            << "\n";
  return 0;
}

int cmd_verify(const std::string& path) {
  const TwoPatchGeometry g = load_geometry(path, false);
  std::printf("interface gap      %.3e\n", g.interface_gap());
  bool ok = true;
  for (Patch s : kPatches) {
    const auto [lo, hi] = g.jacobian_range(s);
    std::printf("det J patch %s     [%.6g, %.6g]\n", patch_name(s), lo, hi);
    ok = ok && (lo > 0 || hi < 0);
  }
  if (!ok) std::printf("jacobian changes sign\n");
  try {
    const GluingData d = compute_gluing(g);
    std::printf("alpha_L            %.12g -> %.12g\n", d.alpha[0][0], d.alpha[0][1]);
    std::printf("alpha_R            %.12g -> %.12g\n", d.alpha[1][0], d.alpha[1][1]);
    std::printf("beta               %.12g + %.12g t + %.12g t^2\n", d.beta[0], d.beta[1],
                d.beta[2]);
    std::printf("gluing residual    %.3e\n", d.residual);
  } catch (const NotAnalysisSuitable& e) {
    std::printf("gluing residual    %.3e\nnot analysis-suitable G1: %s\n", e.residual, e.what());
    return 3;
  }
  if (!ok) return 3;
  std::printf("analysis-suitable G1\n");
  return 0;
}

int cmd_dump(int example, int degree, const std::string& smooth, int levels, bool json) {
  const Problem P = make_problem(example);
  HierarchicalSpace H =
      initial_space(P, degree, smooth == "c1" ? Smoothness::C1 : Smoothness::C0);
  for (int l = 0; l < levels; ++l) H.refine_uniform();
  if (json) {
    std::cout << H.to_json() << "\n";
    return 0;
  }
  std::cout << "geometry " << P.geometry_file << "  p=" << degree << " r=" << degree - 2
            << "  " << smooth << "\n";
  std::cout << "level  n  gamma0  gamma1  interior/patch  dim  active\n";
  for (int l = 0; l < H.num_levels(); ++l) {
    const C1Space& W = H.level(l);
    std::cout << l << "  " << W.n() << "  " << W.n_gamma0() << "  " << W.n_gamma1() << "  "
              << W.n_interior() << "  " << W.dimension() << "  " << H.active(l).size() << "\n";
  }
  std::cout << "leaves " << H.leaves().size() << "  ndof " << H.num_dofs() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"C1 hierarchical isogeometric spaces on two-patch domains"};
  app.require_subcommand(1);

  int example = 1, degree = 3, max_iter = 60, levels = 0;
  std::string smooth = "c1", mode = "adaptive", out = "out", path;
  double theta = 0;
  long long budget = 2000;
  bool quiet = false, json = false;

  auto* run = app.add_subcommand("run", "solve one example and write CSV, SVG and EOC files");
  run->add_option("--example", example)->required()->check(CLI::Range(1, 4));
  run->add_option("--degree", degree)->check(CLI::IsMember({3, 4}));
  run->add_option("--smoothness", smooth)->check(CLI::IsMember({"c1", "c0"}));
  run->add_option("--mode", mode)->check(CLI::IsMember({"adaptive", "uniform", "corner"}));
  run->add_option("--theta", theta, "marking parameter, default per example")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--budget", budget, "stop once NDOF reaches this")->check(CLI::PositiveNumber);
  run->add_option("--max-iter", max_iter)->check(CLI::NonNegativeNumber);
  run->add_option("--out", out);
  run->add_flag("--quiet", quiet);

  auto* verify = app.add_subcommand("verify-geometry", "check a geometry file for AS-G1");
  verify->add_option("path", path)->required();

  auto* dump = app.add_subcommand("dump-space", "dimensions of the hierarchical space");
  dump->add_option("--example", example)->check(CLI::Range(1, 4));
  dump->add_option("--degree", degree)->check(CLI::IsMember({3, 4}));
  dump->add_option("--smoothness", smooth)->check(CLI::IsMember({"c1", "c0"}));
  dump->add_option("--levels", levels, "uniform refinements")->check(CLI::Range(0, 6));
  dump->add_flag("--json", json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(example, degree, smooth, mode, theta, budget, max_iter, out, quiet);
    if (*verify) return cmd_verify(path);
    if (*dump) return cmd_dump(example, degree, smooth, levels, json);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
