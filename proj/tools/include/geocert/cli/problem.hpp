#pragma once

// Problem files: JSON documents declaring variables, constants, the objective
// and optional solver / fuzz settings.
//
//   {
//     "variables": [{"name": "X", "manifold": "SPD", "dim": 2}],
//     "constants": {
//       "A": [[4, 0], [0, 9]],                       // matrix
//       "h": [1, 2],                                 // vector
//       "k": 2,                                      // scalar
//       "M": {"value": [[2, 1], [1, 2]], "definiteness": "PD"},
//       "C": {"file": "c.csv", "format": "csv"},     // relative to the problem file
//       "I": {"identity": 2},
//       "xs": {"vectors": [[1, 0], [0, 1]]},
//       "Ys": {"matrices": [[[1, 0], [0, 1]]]}
//     },
//     "objective": "sdivergence(X, A) + sdivergence(X, I)",
//     "solver": {"max_iter": 500, "grad_tol": 1e-8, "x0": "identity"},
//     "fuzz": {"trials": 1000, "seed": 7, "tol": 1e-9, "cond": 100,
//              "t_samples": 5, "seeds": [{"a": ["I"], "b": ["A"]}]}
//   }

#include "geocert/cli/dsl.hpp"
#include "geocert/oracle.hpp"
#include "geocert/solver.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace geocert::cli {

struct VariableDecl {
  std::string name;
  Manifold manifold;
};

struct SolverBlock {
  std::optional<std::size_t> max_iter;
  std::optional<double> grad_tol;
  /// "identity", a constant name, or unset.
  std::optional<std::string> x0;
};

struct SeedNames {
  std::vector<std::string> a;
  std::vector<std::string> b;
};

struct FuzzBlock {
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> cond;
  std::optional<std::size_t> t_samples;
  std::vector<SeedNames> seeds;
};

struct ProblemFile {
  std::vector<VariableDecl> variables;
  Environment env;
  std::string objective;
  SolverBlock solver;
  FuzzBlock fuzz;
  std::filesystem::path base_dir;
};

/// ConfigError (exit 1) on schema violations, missing files or bad CSV.
ProblemFile parse_problem(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ProblemFile load_problem(const std::filesystem::path& path);

/// Parses the objective in the problem environment.
Expression objective_of(const ProblemFile& p);

/// The manifold shared by the declared variables (ConfigError when they
/// differ or none are declared).
Manifold manifold_of(const ProblemFile& p);

/// Reads a CSV matrix: one row per line, comma-separated, no header.
spd::Matrix read_csv_matrix(const std::filesystem::path& path);

/// Resolves a named matrix constant (ConfigError when absent or not a matrix).
spd::Matrix constant_matrix(const ProblemFile& p, const std::string& name);

}  // namespace geocert::cli
