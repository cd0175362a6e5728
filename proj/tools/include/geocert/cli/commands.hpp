#pragma once

// Subcommands. Each prints the two verdict lines and the report document to
// `out` (or writes the document to `report_path`), diagnostics to `err`, and
// returns the process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace geocert::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitNotCertified = 2,
  kExitCounterexample = 3,
  kExitNoConvergence = 4,
  kExitRefusedSolve = 5,
};

inline constexpr std::uint64_t kDefaultSeed = 20240611;
inline constexpr const char* kSeedEnv = "GEOCERT_SEED";

struct Output {
  std::ostream& out;
  std::ostream& err;
  std::optional<std::filesystem::path> report_path;
};

struct FuzzOptions {
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  /// Redeclares every variable at this dimension before fuzzing.
  std::optional<long> dim;
  std::optional<double> cond;
};

struct SolveOptions {
  std::optional<std::size_t> max_iter;
  std::optional<double> grad_tol;
  /// "identity" or a CSV file path.
  std::optional<std::string> x0;
  bool force = false;
};

/// Seed precedence: explicit flag, problem file, GEOCERT_SEED, built-in default.
/// ConfigError when the environment value is not an unsigned integer.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> file);

int cmd_analyze(const std::filesystem::path& problem, const Output& io);
int cmd_fuzz(const std::filesystem::path& problem, const FuzzOptions& opts, const Output& io);
int cmd_solve(const std::filesystem::path& problem, const SolveOptions& opts, const Output& io);

}  // namespace geocert::cli
