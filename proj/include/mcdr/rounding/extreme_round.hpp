#pragma once

#include "mcdr/constraint_system.hpp"
#include "mcdr/error.hpp"
#include "mcdr/fantope.hpp"
#include "mcdr/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mcdr {

struct RoundingStep {
  int block = 0;                // fractional block size before the step
  int kernel_dim = 0;
  double direction_norm = 0.0;  // norm of the projected descent direction (0 if a kernel vector was used)
  double delta = 0.0;           // boundary step length
  int pinned = 0;               // 0 or 1, the value the first pinned eigenvalue reached
  int pinned_count = 0;
  double residual = 0.0;        // max |<Q1^T A_i Q1, Delta>| over constraints and trace
};

struct RoundingTrace {
  std::vector<RoundingStep> steps;
  int final_rank = 0;
  int final_fractional = 0;
};

/// Rank bound d + floor(sqrt(2m + 9/4) - 3/2) for m affine constraints.
inline int extreme_rank_bound(double d, std::size_t m) {
  return static_cast<int>(std::floor(d + 1e-9)) +
         static_cast<int>(std::floor(std::sqrt(2.0 * static_cast<double>(m) + 2.25) - 1.5 + 1e-12));
}

/// floor(sqrt(2m)) + 1 fractional eigenvalues at most at an extreme point.
inline int fractional_bound(std::size_t m) {
  return static_cast<int>(std::floor(std::sqrt(2.0 * static_cast<double>(m)) + 1e-12)) + 1;
}

namespace detail {

// Largest delta >= 0 with 0 <= lam + delta D <= I (lam diagonal inside (0, 1)).
inline double boundary_step(const Vector& lam, const Matrix& D) {
  const Vector s0 = lam.cwiseSqrt().cwiseInverse();
  const Vector s1 = (1.0 - lam.array()).sqrt().inverse().matrix();
  const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(s0.asDiagonal() * D * s0.asDiagonal(),
                                                          Eigen::EigenvaluesOnly)
                        .eigenvalues()
                        .minCoeff();
  const double hi = Eigen::SelfAdjointEigenSolver<Matrix>(s1.asDiagonal() * D * s1.asDiagonal(),
                                                          Eigen::EigenvaluesOnly)
                        .eigenvalues()
                        .maxCoeff();
  double delta = std::numeric_limits<double>::infinity();
  if (lo < 0.0) delta = std::min(delta, -1.0 / lo);
  if (hi > 0.0) delta = std::min(delta, 1.0 / hi);
  return delta;
}

}  // namespace detail

/// Walk from a feasible X0 to an extreme point of the feasible region of
/// `sys` without worsening the objective: repeatedly move the fractional
/// block along a direction that leaves every constraint value and the trace
/// unchanged until an eigenvalue reaches 0 or 1.
inline FantopePoint extreme_round(const ConstraintSystem& sys, const FantopePoint& x0, RoundingTrace* trace = nullptr,
                                  double tau = kTauInt) {
  sys.validate();
  if (x0.n() != sys.n()) throw ParameterError("starting point has the wrong dimension");
  for (std::size_t i = 0; i < sys.m(); ++i) {
    const double v = sys.violation(i, x0.X());
    if (v > 1e-7 * (1.0 + std::abs(sys.constraints[i].b)))
      throw InfeasibleInput("starting point violates constraint " + std::to_string(i) + " by " +
                            std::to_string(v));
  }
  if (x0.trace() > sys.d + 1e-7 * std::max(1.0, sys.d))
    throw InfeasibleInput("starting point exceeds the trace bound");

  const Matrix cmin = sys.min_objective();
  const Eigen::Index n = sys.n();
  RoundingTrace local;
  RoundingTrace& tr = trace ? *trace : local;
  tr.steps.clear();

  FantopePoint x = x0;
  bool moved = false;
  double tol = tau;
  bool retried = false;
  while (true) {
    const Vector& ev = x.eigenvalues();
    const Matrix& vec = x.eigenvectors();
    std::vector<Eigen::Index> frac;
    for (Eigen::Index j = 0; j < n; ++j)
      if (ev[j] > tol && ev[j] < 1.0 - tol) frac.push_back(j);
    const auto f = static_cast<Eigen::Index>(frac.size());
    if (f == 0) break;

    Matrix q1(n, f);
    Vector lam(f);
    for (Eigen::Index a = 0; a < f; ++a) {
      q1.col(a) = vec.col(frac[static_cast<std::size_t>(a)]);
      lam[a] = ev[frac[static_cast<std::size_t>(a)]];
    }
    const Eigen::Index dim = f * (f + 1) / 2;
    Matrix rows(static_cast<Eigen::Index>(sys.m()) + 1, dim);
    std::vector<Matrix> blocks;
    Eigen::Index used = 0;
    for (const auto& c : sys.constraints) {
      Matrix blk = q1.transpose() * c.A * q1;
      Vector r = svec(blk);
      const double nr = r.norm();
      blocks.push_back(blk);
      if (nr > 1e-14) rows.row(used++) = r.transpose() / nr;
    }
    {
      Vector r = svec(Matrix::Identity(f, f));
      rows.row(used++) = r.transpose() / r.norm();
    }
    const Matrix kernel = nullspace(rows.topRows(used), 1e-10);
    if (kernel.cols() == 0) break;

    const Vector g = -svec(q1.transpose() * cmin * q1);
    Vector p = kernel * (kernel.transpose() * g);
    RoundingStep step;
    step.block = static_cast<int>(f);
    step.kernel_dim = static_cast<int>(kernel.cols());
    if (p.norm() > 1e-12 * std::max(1.0, g.norm())) {
      step.direction_norm = p.norm();
      p /= p.norm();
    } else {
      p = kernel.col(0);
    }
    Matrix D = smat(p, f);
    if (inner(q1.transpose() * cmin * q1, D) > 0.0) D = -D;

    step.residual = std::abs(D.trace());
    for (const auto& blk : blocks) step.residual = std::max(step.residual, std::abs(inner(blk, D)));

    const double delta = detail::boundary_step(lam, D);
    if (!std::isfinite(delta)) throw NumericalStall("unbounded boundary step");
    step.delta = delta;

    Matrix m = Matrix(lam.asDiagonal()) + delta * D;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
    Vector mu = es.eigenvalues();
    int pinned = 0;
    int pinned_to = -1;
    for (Eigen::Index a = 0; a < f; ++a) {
      if (mu[a] <= tol) {
        mu[a] = 0.0;
        ++pinned;
        if (pinned_to < 0) pinned_to = 0;
      } else if (mu[a] >= 1.0 - tol) {
        mu[a] = 1.0;
        ++pinned;
        if (pinned_to < 0) pinned_to = 1;
      }
    }
    if (pinned == 0) {
      if (retried) throw NumericalStall("boundary step did not pin an eigenvalue");
      tol *= 2.0;
      retried = true;
      continue;
    }
    step.pinned = pinned_to;
    step.pinned_count = pinned;

    Matrix xn = x.X() - q1 * lam.asDiagonal() * q1.transpose();
    const Matrix u = q1 * es.eigenvectors();
    xn += u * mu.asDiagonal() * u.transpose();
    x = FantopePoint(symmetrize(xn), std::max(x0.d(), sys.d));
    tr.steps.push_back(step);
    moved = true;
  }
  const FantopePoint& out = moved ? x : x0;
  tr.final_rank = out.rank(tau);
  tr.final_fractional = out.fractional(tau);
  return out;
}

}  // namespace mcdr
