#pragma once

#include "mcdr/data_model.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/objectives.hpp"
#include "mcdr/report.hpp"
#include "mcdr/solvers/pca_oracle.hpp"

namespace mcdr {

struct BisectResult {
  FantopePoint X;
  Vector w;  // (w*, 1 - w*)
  SolveReport report;
};

/// Two groups: bisect the weight w on w B_1 + (1 - w) B_2 until the
/// derivative of the dual function changes sign, then mix the two
/// bracketing oracle answers so both groups are balanced.
inline BisectResult binary_search_two_groups(const CovarianceSet& cov, const Objective& obj,
                                             Eigen::Index d, double tol_w = 1e-12) {
  Stopwatch clock;
  if (cov.k() != 2) throw ParameterError("binary search needs exactly two groups");
  if (!is_minmax(obj.kind)) throw ParameterError("binary search supports mm-var and mm-loss only");
  obj.validate(2);
  const Matrix& b1 = cov.B[0];
  const Matrix& b2 = cov.B[1];
  const double be1 = obj.kind == ObjectiveKind::MM_LOSS ? obj.beta[0] : 0.0;
  const double be2 = obj.kind == ObjectiveKind::MM_LOSS ? obj.beta[1] : 0.0;
  const Matrix diff = b1 - b2;

  struct Probe {
    double w;
    OracleAnswer a;
    double s;     // dual derivative
    double dual;  // dual value
  };
  auto probe = [&](double w) {
    Probe p{w, pca_oracle(w * b1 + (1.0 - w) * b2, d), 0.0, 0.0};
    p.s = inner(diff, p.a.X) - (be1 - be2);
    p.dual = p.a.value - w * be1 - (1.0 - w) * be2;
    return p;
  };

  BisectResult res;
  res.report.solver = "bisect";
  res.report.certificate = Certificate::MW_GAP;
  Matrix x;
  double dual;
  double wstar;
  int iters = 2;
  Probe lo = probe(0.0);
  Probe hi = probe(1.0);
  if (lo.s >= 0.0) {
    x = lo.a.X;
    dual = lo.dual;
    wstar = 0.0;
  } else if (hi.s <= 0.0) {
    x = hi.a.X;
    dual = hi.dual;
    wstar = 1.0;
  } else {
    bool exact = false;
    while (hi.w - lo.w > tol_w) {
      const double mid = 0.5 * (lo.w + hi.w);
      if (mid <= lo.w || mid >= hi.w) break;
      Probe p = probe(mid);
      ++iters;
      if (p.s == 0.0) {
        lo = hi = p;
        exact = true;
        break;
      }
      (p.s < 0.0 ? lo : hi) = std::move(p);
    }
    if (exact) {
      x = lo.a.X;
      dual = lo.dual;
      wstar = lo.w;
    } else {
      const double theta = hi.s / (hi.s - lo.s);
      x = theta * lo.a.X + (1.0 - theta) * hi.a.X;
      dual = std::min(lo.dual, hi.dual);
      wstar = theta * lo.w + (1.0 - theta) * hi.w;
    }
  }
  res.X = FantopePoint(symmetrize(x), static_cast<double>(d));
  res.w = Vector(2);
  res.w << wstar, 1.0 - wstar;
  res.report.describe(obj, cov, res.X);
  res.report.gap = std::max(0.0, dual - res.report.value);
  res.report.gap_history.push_back(res.report.gap);
  res.report.iterations = iters;
  res.report.weights = res.w;
  res.report.status = Status::CONVERGED;
  res.report.wall_seconds = clock.seconds();
  return res;
}

}  // namespace mcdr
