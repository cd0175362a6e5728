#pragma once

// Machine-readable report documents. Field order is fixed and no
// wall-clock data is recorded, so identical inputs serialize to identical
// bytes. Doubles are written with round-trip precision.

#include "geocert/analysis.hpp"
#include "geocert/oracle.hpp"
#include "geocert/solver.hpp"

#include <string>

#include <json.hpp>

namespace geocert::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kReportVersion = 1;

Json matrix_json(const spd::Matrix& m);

/// Top-level document: version, objective, variables, verdicts and trace.
Json analysis_json(const Expression& objective, const AnalysisReport& report);

Json fuzz_json(const oracle::CrossValidation& cv, const oracle::FuzzConfig& cfg);

Json solve_json(const solver::SolveResult& result);

/// Canonical text: two-space indentation and a trailing newline.
std::string serialize(const Json& doc);

}  // namespace geocert::cli
