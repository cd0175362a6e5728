#include "geocert/cli/commands.hpp"

#include "geocert/cli/dsl.hpp"
#include "geocert/cli/problem.hpp"
#include "geocert/cli/report.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <ostream>

namespace geocert::cli {

namespace {

bool certified(GCurvature g) { return g == GCurvature::GConvex || g == GCurvature::GLinear; }

void print_verdict(std::ostream& out, const AnalysisReport& r) {
  out << "[ Info: Objective Euclidean curvature: " << to_string(r.ecurvature) << "\n";
  out << "[ Info: Objective Geodesic curvature: " << to_string(r.gcurvature) << "\n";
}

void emit(const Output& io, const Json& doc) {
  const std::string text = serialize(doc);
  if (!io.report_path) {
    io.out << text;
    return;
  }
  std::ofstream f(*io.report_path, std::ios::binary);
  if (!f) throw ConfigError("cannot write report to '" + io.report_path->string() + "'");
  f << text;
}

struct Analyzed {
  ProblemFile problem;
  Expression objective;
  AnalysisReport report;
};

Analyzed load_and_analyze(const std::filesystem::path& path) {
  ProblemFile p = load_problem(path);
  Expression e = objective_of(p);
  AnalysisReport r = analyze(e, manifold_of(p));
  return {std::move(p), std::move(e), std::move(r)};
}

template <class Body>
int guarded(const Output& io, Body&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    io.err << "error: parse: " << e.what() << "\n";
  } catch (const InconclusiveError& e) {
    io.err << "error: inconclusive: " << e.what() << "\n";
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    io.err << "error: " << e.what() << "\n";
  }
  return kExitInputError;
}

spd::SPDMatrix initial_point(const ProblemFile& p, const SolveOptions& opts, Eigen::Index dim) {
  std::optional<spd::Matrix> x0;
  if (opts.x0) {
    if (*opts.x0 != "identity") x0 = read_csv_matrix(*opts.x0);
  } else if (p.solver.x0 && *p.solver.x0 != "identity") {
    x0 = constant_matrix(p, *p.solver.x0);
  }
  if (!x0) return spd::SPDMatrix::identity(dim);
  if (x0->rows() != dim || x0->cols() != dim)
    throw ConfigError("x0 must be " + std::to_string(dim) + "x" + std::to_string(dim));
  if (!spd::is_spd(*x0)) throw ConfigError("x0 is not symmetric positive definite");
  return spd::SPDMatrix(*x0);
}

}  // namespace

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> file) {
  if (flag) return *flag;
  if (file) return *file;
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || *env == '-')
      throw ConfigError(std::string(kSeedEnv) + " must be an unsigned integer, got '" + env + "'");
    return v;
  }
  return kDefaultSeed;
}

int cmd_analyze(const std::filesystem::path& problem, const Output& io) {
  return guarded(io, [&] {
    const Analyzed a = load_and_analyze(problem);
    print_verdict(io.out, a.report);
    emit(io, analysis_json(a.objective, a.report));
    return certified(a.report.gcurvature) ? kExitOk : kExitNotCertified;
  });
}

int cmd_fuzz(const std::filesystem::path& problem, const FuzzOptions& opts, const Output& io) {
  return guarded(io, [&] {
    ProblemFile p = load_problem(problem);
    if (opts.dim) {
      if (*opts.dim < 1) throw ConfigError("--dim must be positive");
      for (auto& v : p.variables) v.manifold = Manifold::spd(*opts.dim);
      for (auto& [name, m] : p.env.variables) m = Manifold::spd(*opts.dim);
    }
    const Expression e = objective_of(p);
    const AnalysisReport report = analyze(e, manifold_of(p));

    oracle::FuzzConfig cfg;
    cfg.trials = opts.trials.value_or(p.fuzz.trials.value_or(cfg.trials));
    cfg.seed = resolve_seed(opts.seed, p.fuzz.seed);
    cfg.tol = opts.tol.value_or(p.fuzz.tol.value_or(cfg.tol));
    cfg.cond_max = opts.cond.value_or(p.fuzz.cond.value_or(cfg.cond_max));
    cfg.t_samples = p.fuzz.t_samples.value_or(cfg.t_samples);
    cfg.dim = manifold_of(p).dim;
    const std::size_t arity = collect_variables(e).size();
    for (const auto& s : p.fuzz.seeds) {
      if (s.a.size() != arity || s.b.size() != arity)
        throw ConfigError("each fuzz seed needs one matrix per variable (" + std::to_string(arity) + ")");
      oracle::SeedPair pair;
      for (const auto& n : s.a) pair.a.push_back(constant_matrix(p, n));
      for (const auto& n : s.b) pair.b.push_back(constant_matrix(p, n));
      cfg.seeds.push_back(std::move(pair));
    }
    oracle::validate(cfg);

    const oracle::CrossValidation cv = oracle::cross_validate(e, cfg);
    print_verdict(io.out, report);
    Json doc = analysis_json(e, report);
    doc["fuzz"] = fuzz_json(cv, cfg);
    emit(io, doc);

    const bool convex_violated = cv.convex && cv.convex->verdict == oracle::FuzzVerdict::ViolationFound;
    if (cv.verdict == oracle::Consistency::SoundnessBug) return kExitCounterexample;
    if (cv.verdict == oracle::Consistency::Informational && convex_violated) return kExitCounterexample;
    return kExitOk;
  });
}

int cmd_solve(const std::filesystem::path& problem, const SolveOptions& opts, const Output& io) {
  return guarded(io, [&] {
    const Analyzed a = load_and_analyze(problem);
    print_verdict(io.out, a.report);
    if (!certified(a.report.gcurvature) && !opts.force) {
      io.err << "error: objective is " << to_string(a.report.gcurvature)
             << "; refusing to solve without a geodesic convexity certificate (use --force)\n";
      return kExitRefusedSolve;
    }
    if (a.problem.variables.size() != 1) throw ConfigError("solve supports exactly one variable");

    const solver::Objective obj = solver::make_expression_objective(a.objective);
    solver::SolverParams params;
    params.max_iter = opts.max_iter.value_or(a.problem.solver.max_iter.value_or(params.max_iter));
    params.grad_tol = opts.grad_tol.value_or(a.problem.solver.grad_tol.value_or(params.grad_tol));
    if (params.grad_tol <= 0.0) throw ConfigError("grad_tol must be positive");
    const spd::SPDMatrix x0 = initial_point(a.problem, opts, obj.dim);

    const solver::SolveResult result = solver::gradient_descent(obj, x0, params);
    Json doc = analysis_json(a.objective, a.report);
    doc["solve"] = solve_json(result);
    emit(io, doc);
    return result.converged ? kExitOk : kExitNoConvergence;
  });
}

}  // namespace geocert::cli
