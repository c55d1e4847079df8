#pragma once

#include "mcdr/constraint_system.hpp"
#include "mcdr/data_model.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/objectives.hpp"
#include "mcdr/report.hpp"
#include "mcdr/rounding/extreme_round.hpp"
#include "mcdr/solvers/relaxation.hpp"

#include <cmath>

namespace mcdr {

/// s = floor(sqrt(2k + 1/4) - 3/2), the rank excess allowed for k groups.
inline int rank_excess(std::size_t k) {
  return static_cast<int>(std::floor(std::sqrt(2.0 * static_cast<double>(k) + 0.25) - 1.5 + 1e-12));
}

/// maximize <B_1, X> subject to <B_i, X> = <B_i, xbar> for i >= 2 over the
/// fantope of trace bound d.
inline ConstraintSystem pinned_system(const CovarianceSet& cov, double d, const Matrix& xbar) {
  ConstraintSystem sys;
  sys.sense = Sense::MAXIMIZE;
  sys.C = cov.B.front();
  sys.d = d;
  for (std::size_t i = 1; i < cov.k(); ++i) sys.constraints.push_back({cov.B[i], Relation::EQ, inner(cov.B[i], xbar)});
  return sys;
}

/// Round a relaxation solution to an extreme point of rank at most
/// d + rank_excess(k) without lowering any group's utility.
inline FantopePoint mcdr_round(const CovarianceSet& cov, const Objective& obj, double d, const FantopePoint& xbar,
                               RoundingTrace* trace = nullptr) {
  obj.validate(cov.k());
  if (xbar.n() != cov.n()) throw ParameterError("solution dimension does not match the covariances");
  const ConstraintSystem sys = pinned_system(cov, std::max(d, xbar.trace()), xbar.X());
  return extreme_round(sys, xbar, trace);
}

struct ScaleApproxResult {
  FantopePoint X;
  SolveReport report;
  int s = 0;
};

/// Solve the relaxation at d - s and round: rank <= d, value at least
/// (1 - s/d) times the relaxation optimum at d.
inline ScaleApproxResult scale_approx(const CovarianceSet& cov, const Objective& obj, Eigen::Index d,
                                      const RelaxOptions& opts = {}) {
  Stopwatch clock;
  const int s = rank_excess(cov.k());
  if (s >= d) throw ParameterError("rank excess s = " + std::to_string(s) + " is not below d = " + std::to_string(d));
  RelaxResult rel = solve_relaxation(cov, obj, d - s, opts);
  ScaleApproxResult out;
  out.s = s;
  out.X = mcdr_round(cov, obj, static_cast<double>(d - s), rel.X);
  out.report = rel.report;
  out.report.describe(obj, cov, out.X);
  out.report.wall_seconds = clock.seconds();
  return out;
}

}  // namespace mcdr
