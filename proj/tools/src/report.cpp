#include "geocert/cli/report.hpp"

#include "geocert/cli/dsl.hpp"

namespace geocert::cli {

namespace {

Json report_json(const oracle::FuzzReport& r) {
  Json j;
  j["verdict"] = std::string(oracle::to_string(r.verdict));
  j["trials_run"] = r.trials_run;
  j["trials_skipped"] = r.trials_skipped;
  j["worst_residual"] = r.worst_residual;
  if (r.witness) {
    const auto& w = *r.witness;
    Json wj;
    wj["trial"] = w.trial;
    wj["t"] = w.t;
    wj["lhs"] = w.lhs;
    wj["rhs"] = w.rhs;
    wj["scale"] = w.scale;
    Json a = Json::array();
    Json b = Json::array();
    for (const auto& m : w.a) a.push_back(matrix_json(m));
    for (const auto& m : w.b) b.push_back(matrix_json(m));
    wj["a"] = std::move(a);
    wj["b"] = std::move(b);
    j["witness"] = std::move(wj);
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

}  // namespace

Json matrix_json(const spd::Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json analysis_json(const Expression& objective, const AnalysisReport& report) {
  Json doc;
  doc["version"] = kReportVersion;
  doc["objective"] = unparse(objective);
  Json vars = Json::array();
  for (const auto& [name, m] : collect_variables(objective)) {
    Json v;
    v["name"] = name;
    v["manifold"] = "SPD";
    v["dim"] = m.dim;
    vars.push_back(std::move(v));
  }
  doc["variables"] = std::move(vars);
  doc["sign"] = std::string(to_string(report.sign));
  doc["gcurvature"] = std::string(to_string(report.gcurvature));
  doc["ecurvature"] = std::string(to_string(report.ecurvature));
  doc["certified"] =
      report.gcurvature == GCurvature::GConvex || report.gcurvature == GCurvature::GLinear;
  Json trace = Json::array();
  for (const auto& t : report.trace) {
    Json e;
    e["path"] = t.path;
    e["label"] = t.label;
    e["rule"] = t.rule;
    Json inputs = Json::array();
    for (auto c : t.inputs) inputs.push_back(std::string(to_string(c)));
    e["inputs"] = std::move(inputs);
    e["sign"] = std::string(to_string(t.sign));
    e["gcurvature"] = std::string(to_string(t.gcurvature));
    e["ecurvature"] = std::string(to_string(t.ecurvature));
    if (!t.note.empty()) e["note"] = t.note;
    trace.push_back(std::move(e));
  }
  doc["trace"] = std::move(trace);
  return doc;
}

Json fuzz_json(const oracle::CrossValidation& cv, const oracle::FuzzConfig& cfg) {
  Json j;
  j["consistency"] = std::string(oracle::to_string(cv.verdict));
  j["claimed"] = std::string(to_string(cv.claimed));
  j["observed"] = cv.observed;
  Json config;
  config["trials"] = cfg.trials;
  config["seed"] = cfg.seed;
  config["tol"] = cfg.tol;
  config["cond_max"] = cfg.cond_max;
  config["t_samples"] = cfg.t_samples;
  config["seeded_pairs"] = cfg.seeds.size();
  j["config"] = std::move(config);
  j["gconvex_check"] = cv.convex ? report_json(*cv.convex) : Json(nullptr);
  j["gconcave_check"] = cv.concave ? report_json(*cv.concave) : Json(nullptr);
  return j;
}

Json solve_json(const solver::SolveResult& result) {
  Json j;
  j["status"] = std::string(solver::to_string(result.status));
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["value"] = result.value;
  j["grad_norm"] = result.grad_norm;
  j["gradient_kind"] =
      result.gradient_kind == solver::GradientKind::Analytic ? "analytic" : "finite_difference";
  j["minimizer"] = matrix_json(result.minimizer.matrix());
  j["trajectory"] = result.trajectory;
  return j;
}

std::string serialize(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace geocert::cli
