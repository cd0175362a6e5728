#include "geocert/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace geocert::cli;

  CLI::App app{"geocert: geodesic convexity certification on the SPD manifold"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "geocert 0.1.0");

  std::string problem;
  std::string report_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("problem", problem, "Problem file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", report_path, "Write the report document to this file");
  };

  auto* analyze = app.add_subcommand("analyze", "Certify the objective's geodesic curvature");
  add_common(analyze);

  FuzzOptions fuzz_opts;
  auto* fuzz = app.add_subcommand("fuzz", "Cross-validate the verdict with the geodesic fuzzing oracle");
  add_common(fuzz);
  fuzz->add_option("--trials", fuzz_opts.trials, "Number of random trials");
  fuzz->add_option("--seed", fuzz_opts.seed, "Base seed (default: problem file, then $GEOCERT_SEED)");
  fuzz->add_option("--tol", fuzz_opts.tol, "Relative violation tolerance");
  fuzz->add_option("--dim", fuzz_opts.dim, "Redeclare every variable at this dimension");
  fuzz->add_option("--cond", fuzz_opts.cond, "Largest condition number of sampled endpoints");

  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Minimize a certified objective by Riemannian gradient descent");
  add_common(solve);
  solve->add_option("--max-iter", solve_opts.max_iter, "Iteration cap");
  solve->add_option("--grad-tol", solve_opts.grad_tol, "Riemannian gradient norm tolerance");
  solve->add_option("--x0", solve_opts.x0, "Initial point: 'identity' or a CSV matrix file");
  solve->add_flag("--force", solve_opts.force, "Solve even when the objective is not certified");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  Output io{std::cout, std::cerr, std::nullopt};
  if (!report_path.empty()) io.report_path = report_path;

  if (analyze->parsed()) return cmd_analyze(problem, io);
  if (fuzz->parsed()) return cmd_fuzz(problem, fuzz_opts, io);
  return cmd_solve(problem, solve_opts, io);
}
