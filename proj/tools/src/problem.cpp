#include "geocert/cli/problem.hpp"

#include <fstream>
#include <sstream>

namespace geocert::cli {

namespace {

using nlohmann::json;
using spd::Matrix;
using spd::Vector;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("problem file: " + msg); }

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where + " must be a number");
  return j.get<double>();
}

Vector as_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where + " must be a nonempty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_number(j[i], where);
  return v;
}

Matrix as_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) bad(where + " must be a nonempty 2D array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  if (cols == 0) bad(where + " has an empty row");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad(where + " is ragged");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = as_number(row[static_cast<std::size_t>(c)], where);
  }
  return m;
}

Definiteness parse_definiteness(const json& j, const std::string& where) {
  if (!j.is_string()) bad(where + ".definiteness must be a string");
  const auto s = j.get<std::string>();
  if (s == "PD") return Definiteness::PD;
  if (s == "PSD") return Definiteness::PSD;
  if (s == "none") return Definiteness::None;
  bad(where + ".definiteness must be one of PD, PSD, none");
}

NamedConstant parse_constant(const std::string& name, const json& j, const std::filesystem::path& base) {
  const std::string where = "constant '" + name + "'";
  if (j.is_number()) return {as_number(j, where)};
  if (j.is_array()) {
    if (!j.empty() && j[0].is_array()) return {as_matrix(j, where)};
    return {as_vector(j, where)};
  }
  if (!j.is_object()) bad(where + " has an unsupported form");

  NamedConstant out;
  if (j.contains("definiteness")) out.definiteness = parse_definiteness(j["definiteness"], where);
  if (j.contains("value")) {
    out.value = parse_constant(name, j["value"], base).value;
  } else if (j.contains("identity")) {
    const json& n = j["identity"];
    if (!n.is_number_integer() || n.get<long>() < 1) bad(where + ".identity must be a positive integer");
    out.value = Matrix(Matrix::Identity(n.get<long>(), n.get<long>()));
    if (!j.contains("definiteness")) out.definiteness = Definiteness::PD;
  } else if (j.contains("file")) {
    if (!j["file"].is_string()) bad(where + ".file must be a string");
    const std::string format = j.value("format", std::string("csv"));
    if (format != "csv") bad(where + ": unsupported format '" + format + "'");
    std::filesystem::path p = j["file"].get<std::string>();
    if (p.is_relative()) p = base / p;
    out.value = read_csv_matrix(p);
  } else if (j.contains("vectors")) {
    const json& vs = j["vectors"];
    if (!vs.is_array() || vs.empty()) bad(where + ".vectors must be a nonempty array");
    std::vector<Vector> list;
    for (const auto& v : vs) list.push_back(as_vector(v, where));
    out.value = std::move(list);
  } else if (j.contains("matrices")) {
    const json& ms = j["matrices"];
    if (!ms.is_array() || ms.empty()) bad(where + ".matrices must be a nonempty array");
    std::vector<Matrix> list;
    for (const auto& m : ms) list.push_back(as_matrix(m, where));
    out.value = std::move(list);
  } else {
    bad(where + " needs one of value, identity, file, vectors, matrices");
  }
  if (out.definiteness != Definiteness::None) {
    const Matrix* m = std::get_if<Matrix>(&out.value);
    if (!m) bad(where + ": definiteness applies to matrices only");
    try {
      make_const_matrix(*m, out.definiteness, name);
    } catch (const Error& e) {
      bad(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> name_list(const json& j, const std::string& where) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) bad(where + " must be a constant name or a list of names");
  std::vector<std::string> out;
  for (const auto& n : j) {
    if (!n.is_string()) bad(where + " must contain constant names");
    out.push_back(n.get<std::string>());
  }
  return out;
}

template <class T>
std::optional<T> optional_field(const json& block, const char* key, const std::string& where) {
  if (!block.contains(key)) return std::nullopt;
  const json& v = block[key];
  if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
    if (!v.is_number_integer() || v.get<long long>() < 0) bad(where + "." + key + " must be a nonnegative integer");
    return static_cast<T>(v.get<long long>());
  } else {
    return as_number(v, where + "." + key);
  }
}

}  // namespace

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open matrix file '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        bad("malformed number '" + cell + "' in '" + path.string() + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) bad("ragged rows in '" + path.string() + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) bad("matrix file '" + path.string() + "' is empty");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

ProblemFile parse_problem(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) bad("top level must be an object");
  ProblemFile p;
  p.base_dir = base_dir;

  if (!doc.contains("variables") || !doc["variables"].is_array() || doc["variables"].empty())
    bad("'variables' must be a nonempty array");
  Scope scope;
  for (const auto& v : doc["variables"]) {
    if (!v.is_object() || !v.contains("name") || !v["name"].is_string()) bad("each variable needs a name");
    const std::string name = v["name"].get<std::string>();
    if (v.value("manifold", std::string("SPD")) != "SPD") bad("variable '" + name + "': only SPD manifolds are supported");
    if (!v.contains("dim") || !v["dim"].is_number_integer() || v["dim"].get<long>() < 1)
      bad("variable '" + name + "' needs a positive integer dim");
    const Manifold m = Manifold::spd(v["dim"].get<long>());
    scope.variable(name, m);  // DeclarationConflict on conflicting redeclaration
    if (!p.env.variables.count(name)) p.variables.push_back({name, m});
    p.env.variables.emplace(name, m);
  }

  if (doc.contains("constants")) {
    if (!doc["constants"].is_object()) bad("'constants' must be an object");
    for (const auto& [name, value] : doc["constants"].items()) {
      if (p.env.variables.count(name)) bad("'" + name + "' is declared both as variable and constant");
      p.env.constants.emplace(name, parse_constant(name, value, base_dir));
    }
  }

  if (!doc.contains("objective") || !doc["objective"].is_string()) bad("'objective' must be a string");
  p.objective = doc["objective"].get<std::string>();

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    if (!s.is_object()) bad("'solver' must be an object");
    p.solver.max_iter = optional_field<std::size_t>(s, "max_iter", "solver");
    p.solver.grad_tol = optional_field<double>(s, "grad_tol", "solver");
    if (s.contains("x0")) {
      if (!s["x0"].is_string()) bad("solver.x0 must be \"identity\" or a constant name");
      p.solver.x0 = s["x0"].get<std::string>();
    }
  }

  if (doc.contains("fuzz")) {
    const json& f = doc["fuzz"];
    if (!f.is_object()) bad("'fuzz' must be an object");
    p.fuzz.trials = optional_field<std::size_t>(f, "trials", "fuzz");
    p.fuzz.seed = optional_field<std::uint64_t>(f, "seed", "fuzz");
    p.fuzz.tol = optional_field<double>(f, "tol", "fuzz");
    p.fuzz.cond = optional_field<double>(f, "cond", "fuzz");
    p.fuzz.t_samples = optional_field<std::size_t>(f, "t_samples", "fuzz");
    if (f.contains("seeds")) {
      if (!f["seeds"].is_array()) bad("fuzz.seeds must be an array");
      for (const auto& s : f["seeds"]) {
        if (!s.is_object() || !s.contains("a") || !s.contains("b")) bad("each fuzz seed needs 'a' and 'b'");
        p.fuzz.seeds.push_back({name_list(s["a"], "fuzz.seeds.a"), name_list(s["b"], "fuzz.seeds.b")});
      }
    }
  }
  return p;
}

ProblemFile load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  return parse_problem(doc, path.parent_path());
}

Expression objective_of(const ProblemFile& p) { return parse_dsl(p.objective, p.env); }

Manifold manifold_of(const ProblemFile& p) {
  if (p.variables.empty()) bad("no variables declared");
  const Manifold m = p.variables.front().manifold;
  for (const auto& v : p.variables)
    if (!(v.manifold == m)) bad("all variables must live on the same manifold");
  return m;
}

Matrix constant_matrix(const ProblemFile& p, const std::string& name) {
  auto it = p.env.constants.find(name);
  if (it == p.env.constants.end()) bad("unknown constant '" + name + "'");
  if (const auto* m = std::get_if<Matrix>(&it->second.value)) return *m;
  bad("constant '" + name + "' is not a matrix");
}

}  // namespace geocert::cli
