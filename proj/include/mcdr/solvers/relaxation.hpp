#pragma once

#include "mcdr/data_model.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/objectives.hpp"
#include "mcdr/report.hpp"
#include "mcdr/solvers/barrier_sdp.hpp"
#include "mcdr/solvers/bisect.hpp"
#include "mcdr/solvers/fw.hpp"
#include "mcdr/solvers/mw.hpp"

#include <string>

namespace mcdr {

enum class SolverKind { AUTO, MW, FW, BISECT, SDP };

inline const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::AUTO: return "auto";
    case SolverKind::MW: return "mw";
    case SolverKind::FW: return "fw";
    case SolverKind::BISECT: return "bisect";
    case SolverKind::SDP: return "sdp";
  }
  return "?";
}

inline SolverKind solver_from_string(const std::string& s) {
  if (s == "auto") return SolverKind::AUTO;
  if (s == "mw") return SolverKind::MW;
  if (s == "fw") return SolverKind::FW;
  if (s == "bisect") return SolverKind::BISECT;
  if (s == "sdp") return SolverKind::SDP;
  throw ParameterError("unknown solver '" + s + "'");
}

/// Largest n for which AUTO picks the dense SDP solver for min-max kinds.
inline constexpr Eigen::Index kAutoSdpDim = 64;

inline SolverKind auto_solver(const CovarianceSet& cov, const Objective& obj) {
  if (!is_minmax(obj.kind)) return SolverKind::FW;
  if (cov.k() == 2) return SolverKind::BISECT;
  return cov.n() <= kAutoSdpDim ? SolverKind::SDP : SolverKind::MW;
}

struct RelaxOptions {
  SolverKind solver = SolverKind::AUTO;
  double eps = 1e-6;
  int max_iters = 100000;
  MwMode mode = MwMode::AVERAGE;
  double eta = 0.0;
  double eta_multiplier = 1.0;
  FwStep step = FwStep::LINE_SEARCH;
  double sdp_tol = 1e-10;
};

struct RelaxResult {
  FantopePoint X;
  SolveReport report;
};

/// max_X min_i <B_i, X> - beta_i over the fantope, solved with the dense
/// barrier method and one auxiliary scalar.
inline RelaxResult relax_sdp(const CovarianceSet& cov, const Objective& obj, Eigen::Index d,
                             double tol = 1e-10) {
  Stopwatch clock;
  if (!is_minmax(obj.kind)) throw ParameterError("the SDP relaxation supports mm-var and mm-loss only");
  obj.validate(cov.k());
  const Eigen::Index n = cov.n();
  if (d < 1 || d > n) throw ParameterError("d outside [1, n]");
  BarrierProblem p;
  p.n = n;
  p.q = 1;
  p.C = Matrix::Zero(n, n);
  p.c = Vector::Constant(1, -1.0);
  const Matrix x0 = std::min(0.5, 0.5 * static_cast<double>(d) / static_cast<double>(n)) * Matrix::Identity(n, n);
  double z0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cov.k(); ++i) {
    const double off = obj.kind == ObjectiveKind::MM_LOSS ? obj.beta[i] : 0.0;
    p.ineq.push_back({-cov.B[i], Vector::Constant(1, 1.0), -off});
    z0 = std::min(z0, inner(cov.B[i], x0) - off);
  }
  p.ineq.push_back({Matrix::Identity(n, n), Vector::Zero(1), static_cast<double>(d)});
  BarrierOptions opts;
  opts.tol = tol;
  const BarrierResult br = barrier_solve(p, x0, Vector::Constant(1, z0 - 1.0), opts);

  RelaxResult out;
  out.X = FantopePoint(br.X, static_cast<double>(d));
  out.report.solver = "sdp";
  out.report.describe(obj, cov, out.X);
  out.report.gap = std::max(0.0, -br.objective + br.gap - out.report.value);
  out.report.gap_history.push_back(out.report.gap);
  out.report.iterations = br.newton_steps;
  out.report.certificate = Certificate::SDP_GAP;
  out.report.status = br.converged ? Status::CONVERGED : Status::UNCONVERGED;
  out.report.wall_seconds = clock.seconds();
  return out;
}

/// Solve the fantope relaxation of g with the requested (or automatic) solver.
inline RelaxResult solve_relaxation(const CovarianceSet& cov, const Objective& obj, Eigen::Index d,
                                    const RelaxOptions& opts = {}) {
  const SolverKind s = opts.solver == SolverKind::AUTO ? auto_solver(cov, obj) : opts.solver;
  switch (s) {
    case SolverKind::MW: {
      MwOptions o;
      o.eps = opts.eps;
      o.max_iters = opts.max_iters;
      o.mode = opts.mode;
      o.eta = opts.eta;
      o.eta_multiplier = opts.eta_multiplier;
      MwResult r = mw_solve(cov, obj, d, o);
      return {r.X, r.report};
    }
    case SolverKind::FW: {
      FwOptions o;
      o.eps = opts.eps;
      o.max_iters = opts.max_iters;
      o.step = opts.step;
      FwResult r = fw_solve(cov, obj, d, o);
      return {r.X, r.report};
    }
    case SolverKind::BISECT: {
      BisectResult r = binary_search_two_groups(cov, obj, d);
      return {r.X, r.report};
    }
    case SolverKind::SDP:
      return relax_sdp(cov, obj, d, opts.sdp_tol);
    case SolverKind::AUTO:
      break;
  }
  throw ParameterError("no solver selected");
}

}  // namespace mcdr
