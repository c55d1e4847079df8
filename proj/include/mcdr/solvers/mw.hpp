#pragma once

#include "mcdr/data_model.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/objectives.hpp"
#include "mcdr/report.hpp"
#include "mcdr/solvers/pca_oracle.hpp"

#include <cmath>
#include <limits>

namespace mcdr {

enum class MwMode { AVERAGE, LAST_ITERATE };

struct MwOptions {
  double eta = 0.0;             // 0 selects the automatic rate
  double eta_multiplier = 1.0;  // scales whichever rate is used
  double eps = 1e-3;
  int max_iters = 100000;
  MwMode mode = MwMode::AVERAGE;
};

struct MwResult {
  FantopePoint X;
  Vector w;
  SolveReport report;
  double eta = 0.0;
  long horizon = 0;
  std::vector<double> dual_history;    // running minimum dual bound
  std::vector<double> primal_history;  // g at the reported iterate
};

/// Horizon used by the automatic rate: min(max_iters, ceil(2 log k L^2 / eps^2)).
inline long mw_horizon(std::size_t k, double L, double eps, int max_iters) {
  const double t = std::ceil(2.0 * std::log(static_cast<double>(k)) * L * L / (eps * eps));
  if (!(t < static_cast<double>(max_iters))) return max_iters;
  return std::max(1L, static_cast<long>(t));
}

/// Multiplicative weights on the group weights with a PCA oracle for the
/// min-max objectives.
inline MwResult mw_solve(const CovarianceSet& cov, const Objective& obj, Eigen::Index d,
                         const MwOptions& opts = {}) {
  Stopwatch clock;
  if (!is_minmax(obj.kind)) throw ParameterError("multiplicative weights supports mm-var and mm-loss only");
  obj.validate(cov.k());
  if (!(opts.eps > 0.0)) throw ParameterError("eps must be positive");
  if (opts.max_iters < 1) throw ParameterError("max_iters must be positive");
  const std::size_t k = cov.k();
  const Eigen::Index n = cov.n();
  const auto ki = static_cast<Eigen::Index>(k);
  Vector off = Vector::Zero(ki);
  if (obj.kind == ObjectiveKind::MM_LOSS)
    for (std::size_t i = 0; i < k; ++i) off[static_cast<Eigen::Index>(i)] = obj.beta[i];

  MwResult res;
  res.report.solver = "mw";
  res.report.certificate = Certificate::MW_GAP;
  const double L = cov.max_trace();
  res.horizon = mw_horizon(k, L, opts.eps, opts.max_iters);
  if (opts.eta > 0.0) {
    res.eta = opts.eta;
  } else if (k > 1 && L > 0.0) {
    res.eta = std::sqrt(2.0 * std::log(static_cast<double>(k)) / static_cast<double>(res.horizon)) / L;
  } else {
    res.eta = 1.0;
  }
  res.eta *= opts.eta_multiplier;

  Vector w = Vector::Constant(ki, 1.0 / static_cast<double>(ki));
  Vector logw = Vector::Zero(ki);
  Matrix sum = Matrix::Zero(n, n);
  double y = std::numeric_limits<double>::infinity();
  Matrix best_x;
  double best_primal = -std::numeric_limits<double>::infinity();
  Matrix x_t;
  double primal = 0.0;
  Vector ell(ki);

  int t = 0;
  bool done = false;
  while (t < opts.max_iters && !done) {
    ++t;
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < k; ++i) m += w[static_cast<Eigen::Index>(i)] * cov.B[i];
    const OracleAnswer ans = pca_oracle(m, d);
    for (std::size_t i = 0; i < k; ++i)
      ell[static_cast<Eigen::Index>(i)] = inner(cov.B[i], ans.X) - off[static_cast<Eigen::Index>(i)];
    // dual bound from the weights that produced this oracle answer
    y = std::min(y, w.dot(ell));

    sum += ans.X;
    if (opts.mode == MwMode::AVERAGE) {
      x_t = sum / static_cast<double>(t);
      Vector z(ki);
      for (std::size_t i = 0; i < k; ++i)
        z[static_cast<Eigen::Index>(i)] = inner(cov.B[i], x_t) - off[static_cast<Eigen::Index>(i)];
      primal = z.minCoeff();
    } else {
      primal = ell.minCoeff();
      if (primal > best_primal) {
        best_primal = primal;
        best_x = ans.X;
      }
      x_t = best_x;
      primal = best_primal;
    }
    const double gap = y - primal;
    res.report.gap_history.push_back(gap);
    res.dual_history.push_back(y);
    res.primal_history.push_back(primal);
    if (gap <= opts.eps || k == 1) {
      done = true;
      break;
    }
    logw -= res.eta * ell;
    const double shift = logw.maxCoeff();
    w = (logw.array() - shift).exp();
    w /= w.sum();
  }

  res.X = FantopePoint(x_t, static_cast<double>(d));
  res.w = w;
  res.report.iterations = t;
  res.report.describe(obj, cov, res.X);
  res.report.gap = std::max(0.0, y - res.report.value);
  res.report.weights = w;
  if (k == 1) {
    res.report.gap = 0.0;
    res.report.certificate = Certificate::ORACLE_EXACT;
  }
  res.report.status = done ? Status::CONVERGED : Status::UNCONVERGED;
  res.report.wall_seconds = clock.seconds();
  return res;
}

}  // namespace mcdr
