#pragma once

#include "mcdr/mcdr.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mcdr::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnconverged = 2;

struct InputFlags {
  std::string path;
  std::string group_col = "group";
  bool center = false;
  bool scale = false;
  bool drop_missing = false;
  bool no_normalize = false;
};

struct Loaded {
  CovarianceSet cov;
  std::optional<double> d;  // from an instance bundle
  std::vector<std::string> notes;
};

inline bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

inline Loaded load_input(const InputFlags& f) {
  Loaded out;
  if (ends_with(f.path, ".json")) {
    const json j = io::read_json_file(f.path);
    if (j.contains("groups")) {
      out.cov = io::covariances_from_json(j);
    } else {
      InstanceBundle b = io::bundle_from_json(j);
      if (!b.covariances) throw ParseError("'" + f.path + "' holds a constraint system, not covariances");
      out.cov = *b.covariances;
      out.d = b.d;
    }
    return out;
  }
  IngestOptions o;
  o.center = f.center;
  o.scale = f.scale;
  o.drop_missing = f.drop_missing;
  const GroupedDataset ds = ingest_csv(f.path, f.group_col, o);
  for (const auto& c : ds.unscaled_columns) out.notes.push_back("column '" + c + "' has zero variance, left unscaled");
  if (ds.dropped_rows) out.notes.push_back("dropped " + std::to_string(ds.dropped_rows) + " rows");
  out.cov = covariances(ds, !f.no_normalize);
  return out;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw Error("cannot write '" + path + "'");
  o << text;
  if (!o) throw Error("write to '" + path + "' failed");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct ObjectiveFlags {
  std::string name = "mm-var";
  double lambda = 1e-3;
  double p = 1.0;
};

inline Objective make_objective(const ObjectiveFlags& f, const CovarianceSet& cov, Eigen::Index d) {
  Objective o;
  o.kind = objective_from_string(f.name);
  o.lambda = f.lambda;
  o.p = f.p;
  if (o.kind == ObjectiveKind::MM_LOSS) o.beta = beta(cov, d);
  o.validate(cov.k());
  return o;
}

struct SolveFlags {
  InputFlags in;
  ObjectiveFlags obj;
  std::string solver = "auto";
  int d = 0;
  double eps = 0.0;  // 0: 1e-3 times the objective scale
  int max_iters = 1000000;
  std::string mode = "avg";
  double eta = 0.0;
  double eta_mult = 1.0;
  bool no_round = false;
  bool force_rank = false;
  std::string report, projection, solution;
  bool timing = false;
};

inline double default_eps(const CovarianceSet& cov, const Objective& obj) {
  return is_minmax(obj.kind) ? 1e-3 * std::max(cov.max_trace(), 1e-12) : 1e-3;
}

inline RelaxOptions relax_options(const SolveFlags& f, const CovarianceSet& cov, const Objective& obj) {
  RelaxOptions o;
  o.solver = solver_from_string(f.solver);
  o.eps = f.eps > 0.0 ? f.eps : default_eps(cov, obj);
  o.max_iters = f.max_iters;
  if (f.mode == "avg") o.mode = MwMode::AVERAGE;
  else if (f.mode == "last") o.mode = MwMode::LAST_ITERATE;
  else throw ParameterError("unknown mode '" + f.mode + "'");
  o.eta = f.eta;
  o.eta_multiplier = f.eta_mult;
  return o;
}

// Projection columns from a rounded point: the unit eigenvalues, then the
// largest fractional ones when rank allows.
struct Emitted {
  std::optional<Matrix> P;
  bool filled = false;
  Matrix X;
};

inline Emitted emit(const FantopePoint& x, Eigen::Index d) {
  Emitted e;
  e.X = x.X();
  if (x.rank() > d) return e;
  const Matrix V = x.eigenvectors().leftCols(d);
  e.filled = x.ones() < d;
  e.P = V;
  e.X = V * V.transpose();
  return e;
}

inline json utilities_json(const Objective& obj, const CovarianceSet& cov, const Matrix& x) {
  const GroupUtilities u = evaluate(obj, cov, x);
  json j;
  j["value"] = u.value;
  j["z"] = io::vector_to_json(u.z);
  if (u.losses.size()) j["losses"] = io::vector_to_json(u.losses);
  if (!std::isnan(u.max_loss)) j["max_loss"] = u.max_loss;
  if (!std::isnan(u.nsw_score)) j["nsw_score"] = u.nsw_score;
  return j;
}

struct Pipeline {
  RelaxResult rel;
  FantopePoint rounded;
  int target = 0;
  bool rounded_ok = false;
};

inline Pipeline run_pipeline(const CovarianceSet& cov, const Objective& obj, int d, const SolveFlags& f) {
  Pipeline p;
  for (int dd = d; dd >= 1; --dd) {
    const Objective o = dd == d ? obj : make_objective(f.obj, cov, dd);
    p.rel = solve_relaxation(cov, o, dd, relax_options(f, cov, o));
    p.target = dd;
    p.rounded = f.no_round ? p.rel.X : mcdr_round(cov, o, static_cast<double>(dd), p.rel.X);
    p.rounded_ok = p.rounded.rank() <= d;
    if (p.rounded_ok || !f.force_rank) break;
  }
  return p;
}

inline int cmd_solve(const SolveFlags& f, std::ostream& out, std::ostream& err, bool quiet, const std::string& format) {
  const Loaded in = load_input(f.in);
  for (const auto& n : in.notes)
    if (!quiet) err << "note: " << n << "\n";
  const CovarianceSet& cov = in.cov;
  const int d = f.d > 0 ? f.d : static_cast<int>(in.d.value_or(0.0));
  if (d < 1 || d > cov.n()) throw ParameterError("--d must be in [1, " + std::to_string(cov.n()) + "]");
  const Objective obj = make_objective(f.obj, cov, d);

  Stopwatch clock;
  const Pipeline p = run_pipeline(cov, obj, d, f);
  const Emitted e = emit(p.rounded, d);

  json rep;
  rep["command"] = "solve";
  rep["objective"] = f.obj.name;
  rep["n"] = cov.n();
  rep["k"] = cov.k();
  rep["d"] = d;
  rep["target_d"] = p.target;
  rep["relaxation"] = io::report_to_json(p.rel.report, f.timing);
  json sol = utilities_json(obj, cov, e.X);
  sol["rank"] = p.rounded.rank();
  sol["fractional"] = p.rounded.fractional();
  sol["rounded"] = !f.no_round;
  sol["rank_bound"] = d + rank_excess(cov.k());
  sol["form"] = e.P ? (e.filled ? "projection-filled" : "projection") : "fantope-point";
  rep["solution"] = sol;
  rep["status"] = to_string(p.rel.report.status);
  if (f.timing) rep["wall_seconds"] = clock.seconds();

  if (!e.P && !quiet)
    err << "warning: rounded solution has rank " << p.rounded.rank() << " > d = " << d
        << "; emitting X (use --force-rank to lower the target)\n";
  if (e.filled && !quiet) err << "warning: projection filled with fractional eigenvectors\n";

  if (!f.report.empty()) write_file(f.report, dump(rep));
  if (!f.solution.empty()) write_file(f.solution, dump(io::point_to_json(FantopePoint(e.X, static_cast<double>(d)))));
  if (!f.projection.empty()) {
    if (e.P) {
      std::ostringstream s;
      io::write_projection_csv(s, *e.P);
      write_file(f.projection, s.str());
    } else if (!quiet) {
      err << "warning: no projection written\n";
    }
  }
  if (format == "csv") {
    if (e.P) io::write_projection_csv(out, *e.P);
  } else {
    out << dump(rep);
  }
  if (!quiet) err << "value " << sol["value"].get<double>() << ", relaxation gap " << p.rel.report.gap << "\n";
  return p.rel.report.status == Status::CONVERGED ? kExitOk : kExitUnconverged;
}

struct SweepFlags {
  SolveFlags solve;
  std::string range = "1..1";
  std::string output;
};

inline std::pair<int, int> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(s);
      return {v, v};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ParameterError("bad d range '" + s + "' (expected a..b)");
  }
}

inline std::string cell(double v) { return std::isfinite(v) ? io::format_double(v) : ""; }

inline int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err, bool quiet) {
  const Loaded in = load_input(f.solve.in);
  const CovarianceSet& cov = in.cov;
  const auto [lo, hi] = parse_range(f.range);
  if (lo < 1 || hi > cov.n() || lo > hi) throw ParameterError("d range must lie within [1, " + std::to_string(cov.n()) + "]");

  Matrix pooled = Matrix::Zero(cov.n(), cov.n());
  for (std::size_t i = 0; i < cov.k(); ++i) pooled += cov.B[i] / cov.scale[i];

  std::ostringstream csv;
  csv << "d,objective,solver,row,group,variance,loss,nsw_score,rank,gap,status";
  if (f.solve.timing) csv << ",runtime";
  csv << "\n";
  bool unconverged = false;
  for (int d = lo; d <= hi; ++d) {
    const std::vector<double> b = beta(cov, d);
    const Objective obj = make_objective(f.solve.obj, cov, d);
    const OracleAnswer base = pca_oracle(pooled, d);
    const Vector zb = utilities(cov, base.X);

    std::optional<Pipeline> p;
    Vector zs;
    std::string status, solver = f.solve.solver;
    double runtime = 0.0;
    try {
      Stopwatch clock;
      p = run_pipeline(cov, obj, d, f.solve);
      runtime = clock.seconds();
      zs = utilities(cov, emit(p->rounded, d).X);
      status = to_string(p->rel.report.status);
      solver = p->rel.report.solver;
      if (p->rel.report.status != Status::CONVERGED) unconverged = true;
    } catch (const Error& e) {
      status = "ERROR";
      unconverged = true;
      if (!quiet) err << "d=" << d << ": " << e.what() << "\n";
    }
    auto nsw = [](const Vector& z) {
      if ((z.array() <= 0.0).any()) return std::numeric_limits<double>::quiet_NaN();
      return std::exp(z.array().log().mean());
    };
    for (std::size_t g = 0; g < cov.k(); ++g) {
      const auto gi = static_cast<Eigen::Index>(g);
      if (p) {
        csv << d << ',' << f.solve.obj.name << ',' << solver << ",solution," << cov.labels[g] << ','
            << cell(zs[gi]) << ',' << cell(b[g] - zs[gi]) << ',' << cell(nsw(zs)) << ',' << p->rounded.rank() << ','
            << cell(p->rel.report.gap) << ',' << status;
      } else {
        csv << d << ',' << f.solve.obj.name << ',' << solver << ",solution," << cov.labels[g] << ",,,,,," << status;
      }
      if (f.solve.timing) csv << ',' << cell(runtime);
      csv << "\n";
      csv << d << ',' << f.solve.obj.name << ",pca,baseline," << cov.labels[g] << ',' << cell(zb[gi]) << ','
          << cell(b[g] - zb[gi]) << ',' << cell(nsw(zb)) << ',' << d << ",0,CONVERGED";
      if (f.solve.timing) csv << ",0";
      csv << "\n";
    }
  }
  if (f.output.empty()) out << csv.str();
  else write_file(f.output, csv.str());
  return unconverged ? kExitUnconverged : kExitOk;
}

struct EvalFlags {
  InputFlags in;
  std::string solution;
  int d = 0;
  double lambda = 1e-3;
  double p = 1.0;
};

inline int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const Loaded in = load_input(f.in);
  const CovarianceSet& cov = in.cov;
  const Eigen::Index n = cov.n();
  Matrix X;
  json checks;
  std::string form;
  Eigen::Index d = f.d;
  if (ends_with(f.solution, ".json")) {
    const json j = io::read_json_file(f.solution);
    try {
      X = io::matrix_from_json(j.contains("X") ? j.at("X") : j);
      if (!d && j.contains("d")) d = static_cast<Eigen::Index>(std::llround(j.at("d").get<double>()));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad solution JSON: ") + e.what());
    }
    if (X.rows() != n || X.cols() != n) throw ParseError("solution is not " + std::to_string(n) + "x" + std::to_string(n));
    form = "fantope-point";
    const SymEigen eig = sym_eig(symmetrize(X));
    if (!d) d = std::max<Eigen::Index>(1, std::llround(X.trace()));
    checks["symmetry_error"] = max_abs(X - X.transpose());
    checks["min_eigenvalue"] = eig.values.minCoeff();
    checks["max_eigenvalue"] = eig.values.maxCoeff();
    checks["trace"] = X.trace();
    checks["trace_excess"] = std::max(0.0, X.trace() - static_cast<double>(d));
    checks["in_fantope"] = eig.values.minCoeff() >= -1e-8 && eig.values.maxCoeff() <= 1.0 + 1e-8 &&
                           X.trace() <= static_cast<double>(d) * (1.0 + 1e-8) &&
                           is_symmetric(X, 1e-10);
  } else {
    std::ifstream s(f.solution);
    if (!s) throw ParseError("cannot open '" + f.solution + "'");
    const Matrix P = io::read_projection_csv(s);
    if (P.rows() != n) throw ParseError("projection has " + std::to_string(P.rows()) + " rows, expected " + std::to_string(n));
    form = "projection";
    if (!d) d = P.cols();
    const double orth = max_abs(P.transpose() * P - Matrix::Identity(P.cols(), P.cols()));
    checks["orthonormality_error"] = orth;
    checks["orthonormal"] = orth <= 1e-8;
    X = P * P.transpose();
  }
  if (d < 1 || d > n) throw ParameterError("d outside [1, n]");

  json rep;
  rep["command"] = "eval";
  rep["form"] = form;
  rep["n"] = n;
  rep["k"] = cov.k();
  rep["d"] = d;
  rep["z"] = io::vector_to_json(utilities(cov, X));
  const std::vector<double> b = beta(cov, d);
  rep["beta"] = b;
  json values;
  values["mm-var"] = evaluate(Objective::mm_var(), cov, X).value;
  const GroupUtilities loss = evaluate(Objective::mm_loss(b), cov, X);
  values["mm-loss"] = loss.value;
  rep["losses"] = io::vector_to_json(loss.losses);
  rep["max_loss"] = loss.max_loss;
  try {
    values["nsw"] = evaluate(Objective::nsw(), cov, X).value;
  } catch (const DegenerateUtility&) {
    values["nsw"] = nullptr;
  }
  values["nsw-smoothed"] = evaluate(Objective::nsw_smoothed(f.lambda), cov, X).value;
  values["power-mean"] = evaluate(Objective::power_mean(f.p), cov, X).value;
  rep["values"] = values;
  rep["checks"] = checks;
  out << dump(rep);
  return kExitOk;
}

struct RoundFlags {
  std::string point, system, output;
  bool iterative = false;
};

inline int cmd_round(const RoundFlags& f, std::ostream& out) {
  json sj = io::read_json_file(f.system);
  if (sj.contains("system")) sj = sj.at("system");  // instance bundle
  const ConstraintSystem sys = io::system_from_json(sj);
  json rep;
  rep["command"] = "round";
  if (f.iterative) {
    const IterativeResult r = iterative_sdp(sys);
    rep["solution"] = io::point_to_json(r.X);
    rep["rank"] = r.X.rank();
    rep["objective"] = r.objective;
    rep["sdp_optimum"] = r.sdp_optimum;
    rep["violations"] = r.violations;
    rep["max_violation"] = r.max_violation;
    rep["delta"] = {{"value", r.delta.value}, {"exact", r.delta.exact}};
    json steps = json::array();
    for (const auto& s : r.steps)
      steps.push_back({{"r", s.r}, {"ones", s.ones}, {"zeros", s.zeros}, {"fractional", s.fractional},
                       {"dropped", s.dropped}, {"dropped_value", s.dropped_value}, {"below_delta", s.below_delta},
                       {"objective", s.objective}, {"fallback", s.fallback}});
    rep["steps"] = steps;
  } else {
    if (f.point.empty()) throw ParameterError("--point is required unless --iterative is given");
    const FantopePoint x0 = io::point_from_json(io::read_json_file(f.point));
    RoundingTrace trace;
    const FantopePoint x = extreme_round(sys, x0, &trace);
    rep["solution"] = io::point_to_json(x);
    rep["rank"] = x.rank();
    rep["objective"] = inner(sys.C, x.X());
    rep["rank_bound"] = extreme_rank_bound(sys.d, sys.m());
    std::vector<double> viol;
    for (std::size_t i = 0; i < sys.m(); ++i) viol.push_back(sys.violation(i, x.X()));
    rep["violations"] = viol;
    rep["trace"] = io::trace_to_json(trace);
  }
  if (f.output.empty()) out << dump(rep);
  else write_file(f.output, dump(rep));
  return kExitOk;
}

struct GenFlags {
  std::string kind = "gap";
  std::string graph;
  double b = 1.0;
  int n = 4, d = 1, s = 1, k = 3;
  bool equal = false;
  std::string output;
};

inline int cmd_gen(const GenFlags& f, std::uint64_t seed, std::ostream& out) {
  InstanceBundle b;
  if (f.kind == "gap") {
    b = gap_instance();
  } else if (f.kind == "maxcut") {
    if (f.graph.empty()) throw ParameterError("--graph is required for maxcut");
    b = maxcut_instance(read_edge_list(f.graph), f.b);
  } else if (f.kind == "tightness") {
    b = tightness_instance(f.n, f.d, f.s);
  } else if (f.kind == "orthogonal") {
    OrthogonalGroupsOptions o;
    o.equal = f.equal;
    b = orthogonal_groups_instance(f.n, seed, o);
  } else if (f.kind == "random") {
    if (f.k < 1) throw ParameterError("--k must be positive");
    b.kind = "random";
    b.seed = seed;
    b.d = f.d;
    b.covariances = random_covariances(static_cast<std::size_t>(f.k), f.n, seed);
  } else {
    throw ParameterError("unknown instance kind '" + f.kind + "'");
  }
  if (f.output.empty()) out << dump(io::bundle_to_json(b));
  else write_file(f.output, dump(io::bundle_to_json(b)));
  return kExitOk;
}

inline void add_input(CLI::App* c, InputFlags& f) {
  c->add_option("input,--input", f.path, "CSV data or JSON covariances / instance")->required();
  c->add_option("--group-col", f.group_col, "group column name (CSV)");
  c->add_flag("--center", f.center, "center each feature column");
  c->add_flag("--scale", f.scale, "scale each feature column to unit variance");
  c->add_flag("--drop-missing", f.drop_missing, "drop rows with missing or bad cells");
  c->add_flag("--no-normalize", f.no_normalize, "do not divide B_i by the group size");
}

inline void add_solve_options(CLI::App* c, SolveFlags& f) {
  add_input(c, f.in);
  c->add_option("--objective", f.obj.name, "mm-var, mm-loss, nsw, nsw-smoothed, power-mean");
  c->add_option("--lambda", f.obj.lambda, "smoothing for nsw-smoothed");
  c->add_option("--p", f.obj.p, "power-mean exponent (<= 1)");
  c->add_option("--solver", f.solver, "auto, mw, fw, bisect, sdp");
  c->add_option("--eps", f.eps, "gap tolerance (default 1e-3 times the objective scale)");
  c->add_option("--max-iters", f.max_iters, "iteration cap for mw and fw");
  c->add_option("--mode", f.mode, "mw iterate: avg or last");
  c->add_option("--eta", f.eta, "mw learning rate (0 = automatic)");
  c->add_option("--eta-mult", f.eta_mult, "multiplier on the mw learning rate");
  c->add_flag("--no-round", f.no_round, "report the relaxation without rounding");
  c->add_flag("--force-rank", f.force_rank, "lower the target until the rounded rank is at most d");
  c->add_flag("--timing", f.timing, "include wall times in reports");
}

/// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Multi-criteria dimensionality reduction"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  std::string format = "json";
  bool quiet = false;
  app.add_option("--seed", seed, "random seed");
  app.add_option("--format", format, "stdout format: json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--quiet", quiet, "suppress logs on stderr");

  SolveFlags sf;
  auto* solve = app.add_subcommand("solve", "solve the relaxation and round to a projection");
  add_solve_options(solve, sf);
  solve->add_option("--d", sf.d, "target dimension");
  solve->add_option("--report", sf.report, "write the report JSON here");
  solve->add_option("--projection", sf.projection, "write the n x d projection CSV here");
  solve->add_option("--solution", sf.solution, "write the solution point JSON here");

  SweepFlags wf;
  auto* sweep = app.add_subcommand("sweep", "solve over a range of d with a PCA baseline");
  add_solve_options(sweep, wf.solve);
  sweep->add_option("--d-range", wf.range, "a..b")->required();
  sweep->add_option("--output", wf.output, "CSV output path (default stdout)");

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "evaluate a projection or fantope point");
  add_input(eval, ef.in);
  eval->add_option("--solution", ef.solution, "projection CSV or point JSON")->required();
  eval->add_option("--d", ef.d, "target dimension (default from the solution)");
  eval->add_option("--lambda", ef.lambda, "smoothing for nsw-smoothed");
  eval->add_option("--p", ef.p, "power-mean exponent");

  RoundFlags rf;
  auto* round = app.add_subcommand("round", "round a fantope point on a constraint system");
  round->add_option("--system", rf.system, "constraint system or instance JSON")->required();
  round->add_option("--point", rf.point, "fantope point JSON");
  round->add_flag("--iterative", rf.iterative, "run iterative rounding from the SDP optimum");
  round->add_option("--output", rf.output, "output path (default stdout)");

  GenFlags gf;
  auto* gen = app.add_subcommand("gen", "generate an instance");
  gen->add_option("--kind", gf.kind, "gap, maxcut, tightness, orthogonal, random");
  gen->add_option("--graph", gf.graph, "edge list (maxcut)");
  gen->add_option("--b", gf.b, "cut threshold (maxcut)");
  gen->add_option("--n", gf.n, "dimension");
  gen->add_option("--d", gf.d, "target dimension");
  gen->add_option("--s", gf.s, "rank excess (tightness)");
  gen->add_option("--k", gf.k, "group count (random)");
  gen->add_flag("--equal", gf.equal, "equal variances (orthogonal)");
  gen->add_option("--output", gf.output, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve) return cmd_solve(sf, out, err, quiet, format);
    if (*sweep) return cmd_sweep(wf, out, err, quiet);
    if (*eval) return cmd_eval(ef, out);
    if (*round) return cmd_round(rf, out);
    if (*gen) return cmd_gen(gf, seed, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace mcdr::cli
