#pragma once

#include "mcdr/constraint_system.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/linalg.hpp"
#include "mcdr/rounding/delta_bound.hpp"
#include "mcdr/rounding/extreme_round.hpp"
#include "mcdr/solvers/barrier_sdp.hpp"

#include <limits>
#include <vector>

namespace mcdr {

struct IterativeStep {
  int r = 0;  // columns of F entering the iteration
  int ones = 0;
  int zeros = 0;
  int fractional = 0;
  int dropped = -1;             // constraint removed from S, -1 if none
  double dropped_value = 0.0;   // <F^T A_i F, X_f> of the removed constraint
  bool below_delta = true;      // dropped_value < Delta
  double objective = 0.0;       // <C, F_1 F_1^T + F X F^T> after the iteration (system sense)
  bool fallback = false;        // kept the previous fractional block instead of a fresh solve
};

struct IterativeResult {
  FantopePoint X;
  std::vector<IterativeStep> steps;
  std::vector<double> violations;  // max(0, b_i - <A_i, X>)
  double max_violation = 0.0;
  double objective = 0.0;     // <C, X>
  double sdp_optimum = 0.0;   // first relaxation value
  double sdp_gap = 0.0;
  DeltaBound delta;
};

/// Iterative rounding for  min <C,X>  s.t.  <A_i,X> >= b_i,  X in the fantope.
/// Returns a projection of rank at most d whose constraints hold up to Delta(A).
inline IterativeResult iterative_sdp(const ConstraintSystem& input, double tol = 1e-10) {
  input.validate();
  ConstraintSystem sys = input;
  for (auto& c : sys.constraints) {
    if (c.rel == Relation::EQ) throw ParameterError("iterative rounding needs inequality constraints");
    if (c.rel == Relation::LE) {
      c.A = -c.A;
      c.b = -c.b;
      c.rel = Relation::GE;
    }
  }
  const Eigen::Index n = sys.n();
  const Matrix C = sys.min_objective();
  const double sign = sys.sense == Sense::MINIMIZE ? 1.0 : -1.0;
  const std::size_t m = sys.m();

  IterativeResult out;
  if (m > 0) {
    std::vector<Matrix> mats;
    for (const auto& c : sys.constraints) mats.push_back(c.A);
    out.delta = delta_bound(mats);
  }

  ConstraintSystem first = sys;
  first.sense = Sense::MINIMIZE;
  first.C = C;
  const SdpResult top = solve_sdp(first, tol);  // throws Infeasible
  out.sdp_optimum = sign * top.value;
  out.sdp_gap = top.report.gap;

  Matrix F = Matrix::Identity(n, n);
  Matrix F1(n, 0);
  std::vector<std::size_t> S(m);
  for (std::size_t i = 0; i < m; ++i) S[i] = i;
  Matrix xf;  // fractional block from the previous iteration, in F coordinates
  bool have_prev = false;
  int rank1 = 0;
  const double d_int = std::floor(sys.d + 1e-9);

  while (F.cols() > 0) {
    const Eigen::Index r = F.cols();
    IterativeStep step;
    step.r = static_cast<int>(r);
    const double budget = d_int - rank1;
    const Matrix F1F1 = F1 * F1.transpose();

    if (budget <= 0.0) {
      step.zeros = static_cast<int>(r);
      F.resize(n, 0);
      step.objective = sign * inner(C, F1F1);
      out.steps.push_back(step);
      break;
    }

    ConstraintSystem sub;
    sub.sense = Sense::MINIMIZE;
    sub.C = symmetrize(F.transpose() * C * F);
    sub.d = budget;
    for (std::size_t i : S) {
      const auto& c = sys.constraints[i];
      sub.constraints.push_back({symmetrize(F.transpose() * c.A * F), Relation::GE, c.b - inner(c.A, F1F1)});
    }

    FantopePoint start;
    bool have_start = false;
    if (!have_prev) {
      start = top.X;
      have_start = true;
    } else {
      try {
        const SdpResult sr = solve_sdp(sub, tol);
        if (sub.max_scaled_violation(sr.X.X()) <= 1e-8 && sr.X.trace() <= budget + 1e-8) {
          start = sr.X;
          have_start = true;
        }
      } catch (const Error&) {
      }
      const FantopePoint prev(xf, budget);
      if (!have_start || inner(sub.C, prev.X()) < inner(sub.C, start.X())) {
        start = prev;
        have_start = true;
        step.fallback = true;
      }
    }

    const FantopePoint xe = extreme_round(sub, start);
    const Vector& ev = xe.eigenvalues();
    const Matrix& vec = xe.eigenvectors();
    std::vector<Eigen::Index> ones, fr;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (ev[j] > 1.0 - kTauInt) ones.push_back(j);
      else if (ev[j] > kTauInt) fr.push_back(j);
      else ++step.zeros;
    }
    step.ones = static_cast<int>(ones.size());
    step.fractional = static_cast<int>(fr.size());

    Matrix f1n(n, F1.cols() + static_cast<Eigen::Index>(ones.size()));
    f1n.leftCols(F1.cols()) = F1;
    for (std::size_t a = 0; a < ones.size(); ++a) f1n.col(F1.cols() + static_cast<Eigen::Index>(a)) = F * vec.col(ones[a]);
    F1 = f1n;
    rank1 += static_cast<int>(ones.size());

    Matrix vf(r, static_cast<Eigen::Index>(fr.size()));
    Vector lf(static_cast<Eigen::Index>(fr.size()));
    for (std::size_t a = 0; a < fr.size(); ++a) {
      vf.col(static_cast<Eigen::Index>(a)) = vec.col(fr[a]);
      lf[static_cast<Eigen::Index>(a)] = ev[fr[a]];
    }

    if (!fr.empty() && !S.empty()) {
      const Matrix xfrac = vf * lf.asDiagonal() * vf.transpose();
      std::size_t pick = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < S.size(); ++s) {
        const double v = inner(sub.constraints[s].A, xfrac);
        if (v < best) {
          best = v;
          pick = s;
        }
      }
      step.dropped = static_cast<int>(S[pick]);
      step.dropped_value = best;
      step.below_delta = best < out.delta.value + 1e-9;
      S.erase(S.begin() + static_cast<std::ptrdiff_t>(pick));
    }

    F = F * vf;
    xf = lf.asDiagonal();
    have_prev = true;
    step.objective = sign * (inner(C, F1 * F1.transpose()) + inner(C, F * xf * F.transpose()));
    out.steps.push_back(step);
  }

  out.X = FantopePoint::projection(F1);
  out.objective = inner(sys.C, out.X.X());
  for (std::size_t i = 0; i < m; ++i) {
    const double v = input.violation(i, out.X.X());
    out.violations.push_back(v);
    out.max_violation = std::max(out.max_violation, v);
  }
  return out;
}

}  // namespace mcdr
