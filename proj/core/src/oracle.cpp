#include "geocert/oracle.hpp"

#include "geocert/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace geocert::oracle {

using spd::Matrix;

namespace {

enum class Path { Geodesic, Euclidean };
enum class Side { Convex, Concave };

double value_scale(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) return std::abs(*d);
  const Matrix& m = std::get<Matrix>(v);
  return m.size() == 0 ? 0.0 : spd::sym_eig(spd::symmetrize(m)).lambda.cwiseAbs().maxCoeff();
}

double largest_eigenvalue(const Matrix& m) { return spd::sym_eig(spd::symmetrize(m)).lambda(0); }

std::vector<Eigen::Index> dims_of(const SpdFunction& f, const FuzzConfig& cfg) {
  if (!f.dims.empty()) {
    if (f.dims.size() != f.arity) throw ConfigError("SpdFunction: dims do not match arity");
    return f.dims;
  }
  return std::vector<Eigen::Index>(f.arity, cfg.dim);
}

struct Endpoints {
  std::vector<spd::SPDMatrix> a;
  std::vector<spd::SPDMatrix> b;
};

Endpoints endpoints_for(std::size_t trial, const std::vector<Eigen::Index>& dims, const FuzzConfig& cfg) {
  Endpoints e;
  if (trial < cfg.seeds.size()) {
    const SeedPair& s = cfg.seeds[trial];
    if (s.a.size() != dims.size() || s.b.size() != dims.size())
      throw ConfigError("seed pair arity does not match the function arity");
    for (std::size_t j = 0; j < dims.size(); ++j) {
      e.a.emplace_back(s.a[j]);
      e.b.emplace_back(s.b[j]);
    }
    return e;
  }
  const std::uint64_t ts = derive_seed(cfg.seed, trial);
  for (std::size_t j = 0; j < dims.size(); ++j) {
    e.a.push_back(spd::random_spd(dims[j], cfg.cond_max, derive_seed(ts, 2 * j)));
    e.b.push_back(spd::random_spd(dims[j], cfg.cond_max, derive_seed(ts, 2 * j + 1)));
  }
  return e;
}

std::vector<double> t_schedule(std::size_t trial, const FuzzConfig& cfg) {
  std::vector<double> ts{0.5, 0.25, 0.75};
  std::mt19937_64 rng(derive_seed(derive_seed(cfg.seed, trial), 0x7157ULL));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < cfg.t_samples; ++i) ts.push_back(u(rng));
  return ts;
}

std::vector<Matrix> as_matrices(const std::vector<spd::SPDMatrix>& v) {
  std::vector<Matrix> out;
  for (const auto& m : v) out.push_back(m.matrix());
  return out;
}

bool is_skippable(const std::exception& ex) {
  return dynamic_cast<const DomainError*>(&ex) != nullptr ||
         dynamic_cast<const NumericError*>(&ex) != nullptr;
}

struct Check {
  double residual;  // scale-normalized; > tol means violation
  double lhs;
  double rhs;
  double scale;
  double t;
};

class Tally {
 public:
  explicit Tally(const FuzzConfig& cfg) : cfg_(cfg) {}

  void commit(std::size_t trial, const Endpoints& ends, const std::vector<Check>& checks) {
    ++report_.trials_run;
    for (const Check& c : checks) {
      report_.worst_residual = std::max(report_.worst_residual, c.residual);
      if (c.residual > cfg_.tol && !report_.witness) {
        report_.verdict = FuzzVerdict::ViolationFound;
        report_.witness = Witness{as_matrices(ends.a), as_matrices(ends.b), c.t, c.lhs, c.rhs, c.scale, trial};
      }
    }
  }

  void skip() {
    ++report_.trials_run;
    ++report_.trials_skipped;
  }

  FuzzReport finish() {
    if (2 * report_.trials_skipped > report_.trials_run)
      throw InconclusiveError("fuzzing inconclusive: " + std::to_string(report_.trials_skipped) + " of " +
                              std::to_string(report_.trials_run) + " trials left the evaluator domain");
    return report_;
  }

 private:
  const FuzzConfig& cfg_;
  FuzzReport report_;
};

std::vector<Check> interpolation_checks(const SpdFunction& f, const Endpoints& ends,
                                        const std::vector<double>& ts, const FuzzConfig& cfg, Path path,
                                        Side side) {
  const std::vector<Matrix> a = as_matrices(ends.a);
  const std::vector<Matrix> b = as_matrices(ends.b);
  const Value fa = f.eval(a);
  const Value fb = f.eval(b);
  const double scale = std::max({1.0, value_scale(fa), value_scale(fb)});

  std::vector<spd::GeodesicSegment> segs;
  if (path == Path::Geodesic)
    for (std::size_t j = 0; j < a.size(); ++j) segs.emplace_back(ends.a[j], ends.b[j]);

  const bool scalar = std::holds_alternative<double>(fa);
  std::optional<spd::GeodesicSegment> value_seg;
  if (!scalar && path == Path::Geodesic)
    value_seg.emplace(spd::SPDMatrix(std::get<Matrix>(fa)), spd::SPDMatrix(std::get<Matrix>(fb)));

  std::vector<Check> out;
  for (double t : ts) {
    std::vector<Matrix> pt;
    for (std::size_t j = 0; j < a.size(); ++j)
      pt.push_back(path == Path::Geodesic ? segs[j].raw_at(t) : Matrix((1.0 - t) * a[j] + t * b[j]));
    const Value fx = f.eval(pt);
    if (scalar) {
      const double lhs = std::get<double>(fx);
      const double rhs = (1.0 - t) * std::get<double>(fa) + t * std::get<double>(fb);
      if (!std::isfinite(lhs)) throw NumericError("non-finite function value");
      const double gap = side == Side::Convex ? lhs - rhs : rhs - lhs;
      double residual = gap / scale;
      if (cfg.check_linear) {
        const double two_sided = std::abs(lhs - rhs) / scale;
        // Rescale so that the shared threshold tol flags linear_tol breaches.
        residual = std::max(residual, two_sided > cfg.linear_tol ? two_sided : std::min(two_sided, cfg.tol));
      }
      out.push_back({residual, lhs, rhs, scale, t});
    } else {
      const Matrix& gx = std::get<Matrix>(fx);
      const Matrix chord = path == Path::Geodesic
                               ? value_seg->raw_at(t)
                               : Matrix((1.0 - t) * std::get<Matrix>(fa) + t * std::get<Matrix>(fb));
      const Matrix diff = side == Side::Convex ? Matrix(gx - chord) : Matrix(chord - gx);
      const double top = largest_eigenvalue(diff);
      out.push_back({top / scale, top, 0.0, scale, t});
    }
  }
  return out;
}

FuzzReport run_interpolation(const SpdFunction& f, const FuzzConfig& cfg, Path path, Side side) {
  validate(cfg);
  const auto dims = dims_of(f, cfg);
  Tally tally(cfg);
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const Endpoints ends = endpoints_for(trial, dims, cfg);
    const auto ts = t_schedule(trial, cfg);
    std::vector<Check> checks;
    try {
      checks = interpolation_checks(f, ends, ts, cfg, path, side);
    } catch (const std::exception& ex) {
      if (!is_skippable(ex)) throw;
      tally.skip();
      continue;
    }
    tally.commit(trial, ends, checks);
  }
  return tally.finish();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate(const FuzzConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("fuzz: trials must be >= 1");
  if (cfg.dim < 1) throw ConfigError("fuzz: dim must be >= 1");
  if (!(cfg.cond_max >= 1.0)) throw ConfigError("fuzz: cond_max must be >= 1");
  if (!(cfg.tol > 0.0)) throw ConfigError("fuzz: tol must be > 0");
}

SpdFunction scalar_function(std::function<double(const Matrix&)> f) {
  return SpdFunction{1, {}, [f = std::move(f)](std::span<const Matrix> x) -> Value { return f(x[0]); }};
}

SpdFunction matrix_function(std::function<Matrix(const Matrix&)> f) {
  return SpdFunction{1, {}, [f = std::move(f)](std::span<const Matrix> x) -> Value { return f(x[0]); }};
}

SpdFunction from_expression(const Expression& e) {
  const auto vars = collect_variables(e);
  SpdFunction out;
  out.arity = vars.size();
  std::vector<std::string> names;
  for (const auto& [name, m] : vars) {
    names.push_back(name);
    out.dims.push_back(m.dim);
  }
  out.eval = [e, names](std::span<const Matrix> x) -> Value {
    Bindings b;
    for (std::size_t i = 0; i < names.size(); ++i) b.emplace(names[i], x[i]);
    return evaluate(e, b);
  };
  return out;
}

FuzzReport check_gconvex(const SpdFunction& f, const FuzzConfig& cfg) {
  return run_interpolation(f, cfg, Path::Geodesic, Side::Convex);
}

FuzzReport check_gconcave(const SpdFunction& f, const FuzzConfig& cfg) {
  return run_interpolation(f, cfg, Path::Geodesic, Side::Concave);
}

FuzzReport check_econvex(const SpdFunction& f, const FuzzConfig& cfg) {
  return run_interpolation(f, cfg, Path::Euclidean, Side::Convex);
}

FuzzReport check_monotone_loewner(const SpdFunction& f, Direction direction, const FuzzConfig& cfg) {
  validate(cfg);
  const auto dims = dims_of(f, cfg);
  Tally tally(cfg);
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t ts = derive_seed(cfg.seed, trial);
    Endpoints ends;
    std::vector<Check> checks;
    try {
      if (trial < cfg.seeds.size()) {
        ends = endpoints_for(trial, dims, cfg);
      } else {
        std::mt19937_64 rng(derive_seed(ts, 0x5CA1EULL));
        std::uniform_real_distribution<double> shrink(0.05, 0.95);
        for (std::size_t j = 0; j < dims.size(); ++j) {
          const spd::SPDMatrix a = spd::random_spd(dims[j], cfg.cond_max, derive_seed(ts, 2 * j));
          const spd::SPDMatrix r = spd::random_spd(dims[j], 100.0, derive_seed(ts, 2 * j + 1));
          const Matrix rn = r.matrix() * (shrink(rng) / r.lambda_max());
          const Matrix ah = spd::sqrt(a).matrix();
          const Matrix id = Matrix::Identity(dims[j], dims[j]);
          ends.a.push_back(a);
          ends.b.emplace_back(spd::symmetrize(ah * (id - rn) * ah));
        }
      }
      const Value fa = f.eval(as_matrices(ends.a));
      const Value fb = f.eval(as_matrices(ends.b));
      const double scale = std::max({1.0, value_scale(fa), value_scale(fb)});
      double lhs = 0.0;
      double rhs = 0.0;
      if (std::holds_alternative<double>(fa)) {
        // Violation when lhs > rhs.
        const double va = std::get<double>(fa);
        const double vb = std::get<double>(fb);
        lhs = direction == Direction::Increasing ? vb : va;
        rhs = direction == Direction::Increasing ? va : vb;
      } else {
        const Matrix& ma = std::get<Matrix>(fa);
        const Matrix& mb = std::get<Matrix>(fb);
        lhs = largest_eigenvalue(direction == Direction::Increasing ? Matrix(mb - ma) : Matrix(ma - mb));
      }
      checks.push_back({(lhs - rhs) / scale, lhs, rhs, scale, 0.0});
    } catch (const std::exception& ex) {
      if (!is_skippable(ex)) throw;
      tally.skip();
      continue;
    }
    tally.commit(trial, ends, checks);
  }
  return tally.finish();
}

CrossValidation cross_validate(const Expression& e, const FuzzConfig& cfg) {
  validate(cfg);
  const auto vars = collect_variables(e);
  const Manifold m = vars.empty() ? Manifold{cfg.dim} : vars.front().second;
  const AnalysisReport report = analyze(e, m);
  const SpdFunction f = from_expression(e);

  CrossValidation out;
  out.claimed = report.gcurvature;
  FuzzConfig linear = cfg;
  linear.check_linear = report.gcurvature == GCurvature::GLinear;

  switch (report.gcurvature) {
    case GCurvature::GConvex: out.convex = check_gconvex(f, cfg); break;
    case GCurvature::GConcave: out.concave = check_gconcave(f, cfg); break;
    case GCurvature::GLinear:
      out.convex = check_gconvex(f, linear);
      out.concave = check_gconcave(f, linear);
      break;
    case GCurvature::GUnknown:
      out.convex = check_gconvex(f, cfg);
      out.concave = check_gconcave(f, cfg);
      break;
  }

  const bool convex_violated = out.convex && out.convex->verdict == FuzzVerdict::ViolationFound;
  const bool concave_violated = out.concave && out.concave->verdict == FuzzVerdict::ViolationFound;
  if (report.gcurvature == GCurvature::GUnknown) {
    out.verdict = Consistency::Informational;
    if (convex_violated && concave_violated)
      out.observed = "neither g-convex nor g-concave on the samples";
    else if (convex_violated)
      out.observed = "g-convexity violated; no g-concavity violation found";
    else if (concave_violated)
      out.observed = "g-concavity violated; no g-convexity violation found";
    else
      out.observed = "no violation found in either direction";
  } else {
    out.verdict = (convex_violated || concave_violated) ? Consistency::SoundnessBug : Consistency::Consistent;
    out.observed = out.verdict == Consistency::Consistent ? "no violation of the certified curvature found"
                                                          : "certified curvature violated";
  }
  return out;
}

std::string_view to_string(FuzzVerdict v) {
  return v == FuzzVerdict::ViolationFound ? "ViolationFound" : "NoViolationFound";
}

std::string_view to_string(Consistency c) {
  switch (c) {
    case Consistency::Consistent: return "CONSISTENT";
    case Consistency::SoundnessBug: return "SOUNDNESS-BUG";
    case Consistency::Informational: return "INFORMATIONAL";
  }
  return "?";
}

}  // namespace geocert::oracle
