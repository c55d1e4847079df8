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

enum class FwStep { HARMONIC, LINE_SEARCH };

struct FwOptions {
  double eps = 1e-3;
  int max_iters = 10000;
  FwStep step = FwStep::HARMONIC;
};

struct FwResult {
  FantopePoint X;
  SolveReport report;
};

/// 8kd / (lambda (t + 2)), the harmonic-step suboptimality envelope.
inline double fw_envelope(std::size_t k, Eigen::Index d, double lambda, int t) {
  return 8.0 * static_cast<double>(k) * static_cast<double>(d) / (lambda * (t + 2.0));
}

/// Conditional gradient over the fantope for the smooth objectives
/// (smoothed NSW, NSW, power mean).
inline FwResult fw_solve(const CovarianceSet& cov, const Objective& obj, Eigen::Index d,
                         const FwOptions& opts = {}) {
  Stopwatch clock;
  if (is_minmax(obj.kind)) throw ParameterError("Frank-Wolfe needs a smooth objective (nsw, nsw-smoothed, power-mean)");
  obj.validate(cov.k());
  if (!(opts.eps > 0.0)) throw ParameterError("eps must be positive");
  const Eigen::Index n = cov.n();
  if (d < 1 || d > n) throw ParameterError("d outside [1, n]");
  const auto k = static_cast<Eigen::Index>(cov.k());

  Matrix x = (static_cast<double>(d) / static_cast<double>(n)) * Matrix::Identity(n, n);
  FwResult res;
  res.report.solver = "fw";
  res.report.certificate = Certificate::FW_GAP;
  bool done = false;
  int t = 0;
  double gap = 0.0;
  for (;; ++t) {
    const Vector z = utilities(cov, x);
    const Vector gz = utility_gradient(obj, z, cov);
    Matrix g = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < k; ++i) g += gz[i] * cov.B[static_cast<std::size_t>(i)];
    const OracleAnswer s = pca_oracle(g, d);
    gap = s.value - inner(x, g);
    res.report.gap_history.push_back(gap);
    if (gap <= opts.eps) {
      done = true;
      break;
    }
    if (t >= opts.max_iters) break;
    const Matrix dir = s.X - x;
    double eta = 2.0 / (t + 2.0);
    if (opts.step == FwStep::LINE_SEARCH) {
      Vector dz(k);
      for (Eigen::Index i = 0; i < k; ++i) dz[i] = inner(cov.B[static_cast<std::size_t>(i)], dir);
      // derivative of eta -> g(z + eta dz) is decreasing; bisect its sign on [0, 1]
      auto slope = [&](double e) {
        try {
          return utility_gradient(obj, Vector(z + e * dz), cov).dot(dz);
        } catch (const DegenerateUtility&) {
          return -std::numeric_limits<double>::infinity();
        }
      };
      double lo = 0.0, hi = 1.0;
      if (slope(1.0) >= 0.0) {
        eta = 1.0;
      } else {
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (slope(mid) > 0.0 ? lo : hi) = mid;
        }
        eta = lo;
      }
    }
    x = symmetrize(x + eta * dir);
  }
  res.X = FantopePoint(x, static_cast<double>(d));
  res.report.iterations = t;
  res.report.describe(obj, cov, res.X);
  res.report.gap = std::max(gap, 0.0);
  res.report.status = done ? Status::CONVERGED : Status::UNCONVERGED;
  res.report.wall_seconds = clock.seconds();
  return res;
}

}  // namespace mcdr
